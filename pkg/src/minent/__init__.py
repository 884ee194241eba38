"""Numerical laboratory for minimal-entropy product geometries.

The package bundles five coordinated toolboxes:

* :mod:`minent.hyperbolic` - hyperboloid-model primitives for H^m
  (distances, geodesics, horofunctions, boundary quadrature).
* :mod:`minent.products` - optimal scaling profiles for products of
  hyperbolic factors and numerical volume-growth entropy.
* :mod:`minent.barycenter` - horofunction barycenters of weighted
  configurations, the associated quadratic forms, determinant bounds,
  and the discrete sphere-valued contracting map.
* :mod:`minent.shortcut` - a reduced two-radii model of a metric with a
  cheap hypersurface, used to probe where shortcuts can and cannot
  shorten geodesics, and what they do to volume growth.
* :mod:`minent.ghkit` - finite metric spaces, greedy nets, net graphs
  with length-interval edges, Gromov-Hausdorff bounds, and measure
  discrepancy.

:mod:`minent.cli` exposes the whole laboratory behind one command-line
entry point with reproducible, byte-stable reports.
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
