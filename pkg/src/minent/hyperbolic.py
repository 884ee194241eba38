"""Hyperboloid-model primitives for the real hyperbolic space H^m.

Points live on the upper sheet {q(x, x) = -1, x_0 > 0} of the unit
hyperboloid in Minkowski space R^{m,1}, where

    q(x, y) = -x_0 y_0 + x_1 y_1 + ... + x_m y_m.

Boundary directions are future-pointing null rays.  A stored ideal point
is normalized against the base point o = (1, 0, ..., 0) so that
q(o, xi) = -1, which pins the representative (first coordinate 1) and
anchors every horofunction at the base point: busemann value 0 at o.

The closed forms used here are exact in this model:

* distance          arccosh(-q(x, y))
* geodesic flow     cosh(t |v|) x + sinh(t |v|) v / |v|
* horofunction      B(x, xi) = log(-q(x, xi))
* its gradient      x - xi / (-q(x, xi)), a unit tangent vector
* its Hessian       g - dB (x) dB   in any orthonormal tangent frame,
                    obtained by differentiating B twice along geodesics.

The Hessian identity is not assumed by the test suite; it is checked
against second-order finite differences of the value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "minkowski_form",
    "base_point",
    "HyperboloidPoint",
    "IdealPoint",
    "TangentVector",
    "BusemannData",
    "BoundaryQuadrature",
    "dist",
    "exp_map",
    "tangent_frame",
    "busemann",
    "visual_density",
    "boundary_quadrature",
    "transvection_to",
    "apply_isometry",
    "apply_isometry_ideal",
    "parallel_transport",
    "random_boost",
    "random_point",
]

# Tolerances fixed by the data-type contracts.
_POINT_TOL = 1e-10
_NULL_TOL = 1e-9
_DIST_CLAMP = 1e-9


def minkowski_form(x: np.ndarray, y: np.ndarray) -> float | np.ndarray:
    """Bilinear form q of signature (m, 1); acts on the last axis."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return -x[..., 0] * y[..., 0] + np.sum(x[..., 1:] * y[..., 1:], axis=-1)


def base_point(m: int) -> "HyperboloidPoint":
    """The base point o = (1, 0, ..., 0) of H^m."""
    c = np.zeros(m + 1)
    c[0] = 1.0
    return HyperboloidPoint(c)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(np.asarray(a, dtype=float))
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class HyperboloidPoint:
    """A point of H^m, stored as its (m+1)-vector on the upper sheet.

    Construction renormalizes mild drift (q(x, x) close to -1) and
    rejects anything else; x_0 > 0 is required.
    """

    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.ndim != 1 or c.size < 3:
            raise ValueError("hyperboloid point needs m+1 coordinates with m >= 2")
        if c[0] <= 0:
            raise ValueError("point must lie on the upper sheet (x_0 > 0)")
        qq = minkowski_form(c, c)
        if not np.isfinite(qq) or qq >= 0 or abs(qq + 1.0) > 1e-6:
            raise ValueError(
                f"q(x, x) = {qq!r} is too far from -1 to be a hyperboloid point"
            )
        if abs(qq + 1.0) > 0:
            c = c / np.sqrt(-qq)
        object.__setattr__(self, "coords", _readonly(c))
        qq = minkowski_form(self.coords, self.coords)
        assert abs(qq + 1.0) <= _POINT_TOL

    @property
    def m(self) -> int:
        return self.coords.size - 1


@dataclass(frozen=True)
class IdealPoint:
    """A boundary direction of H^m: a null vector with q(o, xi) = -1.

    The normalization means the stored representative has first
    coordinate exactly 1, i.e. xi = (1, n) with n a unit vector.
    """

    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.ndim != 1 or c.size < 3:
            raise ValueError("ideal point needs m+1 coordinates with m >= 2")
        if c[0] <= 0:
            raise ValueError("ideal point must be future pointing")
        if abs(minkowski_form(c, c)) > _NULL_TOL * max(1.0, c[0] ** 2):
            raise ValueError("ideal point must be a null vector: q(xi, xi) = 0")
        if abs(c[0] - 1.0) > _NULL_TOL:
            raise ValueError(
                "ideal point not normalized against the base point; "
                "divide the representative by q(o, xi) sign-corrected, "
                "e.g. IdealPoint.normalized(coords)"
            )
        object.__setattr__(self, "coords", _readonly(c))

    @classmethod
    def normalized(cls, coords: np.ndarray) -> "IdealPoint":
        """Rescale a future-pointing null vector to the q(o, .) = -1 gauge."""
        c = np.asarray(coords, dtype=float)
        if c[0] <= 0:
            raise ValueError("ideal point must be future pointing")
        return cls(c / c[0])

    @property
    def m(self) -> int:
        return self.coords.size - 1


@dataclass(frozen=True)
class TangentVector:
    """A tangent vector at a hyperboloid point: q(base, vec) = 0."""

    base: HyperboloidPoint
    vec: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vec, dtype=float)
        if v.shape != self.base.coords.shape:
            raise ValueError("tangent vector and base point dimensions differ")
        pairing = minkowski_form(self.base.coords, v)
        scale = max(1.0, float(np.max(np.abs(v))))
        if abs(pairing) > 1e-8 * scale:
            raise ValueError(f"vector is not tangent: q(base, vec) = {pairing!r}")
        object.__setattr__(self, "vec", _readonly(v))

    @property
    def norm(self) -> float:
        return float(np.sqrt(max(minkowski_form(self.vec, self.vec), 0.0)))


def dist(x: HyperboloidPoint, y: HyperboloidPoint) -> float:
    """Geodesic distance arccosh(-q(x, y)).

    Values of -q(x, y) slightly below 1 (floating point drift for nearby
    points) are clamped to 1; anything below 1 - 1e-9 is rejected.
    """
    if x.m != y.m:
        raise ValueError(f"dimension mismatch: H^{x.m} vs H^{y.m}")
    inner = -minkowski_form(x.coords, y.coords)
    if inner < 1.0 - _DIST_CLAMP:
        raise ValueError(f"-q(x, y) = {inner!r} < 1: inputs are not hyperboloid points")
    return float(np.arccosh(max(inner, 1.0)))


def exp_map(x: HyperboloidPoint, v: TangentVector, t: float = 1.0) -> HyperboloidPoint:
    """Geodesic exponential: follow the geodesic through x with velocity v.

    Returns cosh(t |v|) x + sinh(t |v|) v / |v|, renormalized onto the
    sheet.  A zero vector returns x for every t (degenerate ray).
    """
    if v.base is not x and not np.array_equal(v.base.coords, x.coords):
        raise ValueError("tangent vector is based at a different point")
    speed = v.norm
    if speed == 0.0:
        return x
    s = t * speed
    c = np.cosh(s) * x.coords + np.sinh(s) * (v.vec / speed)
    return HyperboloidPoint(c)


def tangent_frame(x: HyperboloidPoint) -> np.ndarray:
    """A deterministic orthonormal frame of T_x H^m, shape (m, m+1).

    Rows are Minkowski-orthonormal spacelike vectors orthogonal to x,
    obtained by projecting the ambient spatial axes and running
    Gram-Schmidt in the Minkowski form.  The construction is smooth in x
    (the projected axes are always linearly independent on the sheet).
    """
    m = x.m
    xc = x.coords
    frame = np.zeros((m, m + 1))
    for a in range(1, m + 1):
        e = np.zeros(m + 1)
        e[a] = 1.0
        v = e + minkowski_form(e, xc) * xc
        for b in range(frame.shape[0]):
            fb = frame[b]
            if not np.any(fb):
                continue
            v = v - minkowski_form(v, fb) * fb
        nrm = np.sqrt(minkowski_form(v, v))
        frame[a - 1] = v / nrm
    return frame


@dataclass(frozen=True)
class BusemannData:
    """Value, gradient and Hessian of a horofunction at one point.

    ``hessian`` is the m x m matrix of the second covariant derivative
    in the orthonormal frame ``frame`` (the output of
    :func:`tangent_frame` at the same point).
    """

    value: float
    gradient: TangentVector
    hessian: np.ndarray
    frame: np.ndarray


def busemann(x: HyperboloidPoint, xi: IdealPoint) -> BusemannData:
    """Horofunction data of the boundary direction xi at the point x.

    value    log(-q(x, xi)); zero at the base point by normalization.
    gradient the unit tangent x - xi / (-q(x, xi)); the value grows
             fastest walking away from xi.
    hessian  identity minus the squared differential, in the frame
             returned by :func:`tangent_frame`; this is the second
             derivative of value along geodesics, computed in closed
             form from the model.
    """
    if x.m != xi.m:
        raise ValueError(f"dimension mismatch: H^{x.m} vs boundary of H^{xi.m}")
    s = -minkowski_form(x.coords, xi.coords)
    if s <= 0:
        raise ValueError("q(x, xi) must be negative for a future null direction")
    value = float(np.log(s))
    grad_vec = x.coords - xi.coords / s
    grad = TangentVector(x, grad_vec)
    frame = tangent_frame(x)
    # dB(e_a) in the frame; the Hessian of log(-q(., xi)) along the
    # geodesic exp(x, t e) is 1 - dB(e)^2, so polarization gives
    # delta_ab - b_a b_b with b_a = q(grad, e_a).
    b = np.array([minkowski_form(grad_vec, frame[a]) for a in range(x.m)])
    hess = np.eye(x.m) - np.outer(b, b)
    return BusemannData(value=value, gradient=grad, hessian=hess, frame=frame)


def visual_density(x: HyperboloidPoint, xi: IdealPoint, h: float) -> float:
    """Radon-Nikodym density exp(-h B(x, xi)) of the visual family.

    For h equal to the volume-growth rate m - 1 of H^m this is the
    density of the visual probability measure seen from x against the
    one seen from o; its boundary integral is 1 exactly at that h.
    """
    if h < 0:
        raise ValueError("the exponent h must be nonnegative")
    s = -minkowski_form(x.coords, xi.coords)
    return float(s ** (-h))


@dataclass(frozen=True)
class BoundaryQuadrature:
    """Nodes and weights approximating the round probability measure
    on the boundary sphere of H^m.

    nodes   (count, m+1) ideal-point representatives (first column 1).
    weights nonnegative, summing to 1 exactly (the last weight absorbs
            the rounding residue).
    scheme  'deterministic-sphere' or 'monte-carlo'.
    seed    RNG seed for the monte-carlo scheme, None otherwise.
    """

    nodes: np.ndarray
    weights: np.ndarray
    scheme: str
    seed: int | None = None

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 2 or nodes.shape[0] != w.size:
            raise ValueError("nodes and weights are inconsistent")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if float(sum(w.tolist())) != 1.0:
            raise ValueError("weights must sum to 1 exactly")
        object.__setattr__(self, "nodes", _readonly(nodes))
        object.__setattr__(self, "weights", _readonly(w))

    @property
    def m(self) -> int:
        return self.nodes.shape[1] - 1

    @property
    def count(self) -> int:
        return self.weights.size

    def ideal_points(self) -> list[IdealPoint]:
        return [IdealPoint(row) for row in self.nodes]


def _uniform_weights(count: int) -> np.ndarray:
    w = np.full(count, 1.0 / count)
    w[-1] = 1.0 - float(sum(w[:-1].tolist()))
    return w


def _spiral_sphere(count: int) -> np.ndarray:
    """Antipodally symmetrized generalized-spiral nodes on S^2.

    Half the nodes follow the golden-angle spiral, the other half are
    their antipodes, so odd first moments vanish exactly.
    """
    half = count // 2
    j = np.arange(half)
    z = 1.0 - (2.0 * j + 1.0) / (2.0 * half)
    phi = j * np.pi * (3.0 - np.sqrt(5.0))
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    pts = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    return np.vstack([pts, -pts])


def _circle_nodes(count: int) -> np.ndarray:
    ang = 2.0 * np.pi * np.arange(count) / count
    return np.column_stack([np.cos(ang), np.sin(ang)])


def boundary_quadrature(
    m: int, count: int, scheme: str = "deterministic-sphere", seed: int | None = None
) -> BoundaryQuadrature:
    """Quadrature for the round probability measure on S^{m-1}.

    The deterministic scheme covers m = 2 (equally spaced circle nodes)
    and m = 3 (antipodally symmetrized spiral on S^2); both sets are
    reproducible without randomness.  Higher-dimensional boundaries use
    seeded uniform sampling; reported statistics should then be read
    with the Monte Carlo 3-sigma tolerance.

    Counts are rounded up to even for the symmetrized spiral.
    """
    if m < 2:
        raise ValueError("boundary quadrature needs m >= 2")
    if count < 12:
        raise ValueError("count >= 12 required for any meaningful moment check")
    if scheme == "deterministic-sphere":
        if m == 2:
            sphere = _circle_nodes(count)
        elif m == 3:
            count = count + (count % 2)
            sphere = _spiral_sphere(count)
        else:
            raise ValueError(
                "deterministic nodes are only laid out on S^1 and S^2; "
                "use scheme='monte-carlo' with a seed for m >= 4"
            )
        used_seed = None
    elif scheme == "monte-carlo":
        if seed is None:
            raise ValueError("monte-carlo quadrature requires an explicit seed")
        rng = np.random.default_rng(seed)
        g = rng.standard_normal((count, m))
        sphere = g / np.linalg.norm(g, axis=1, keepdims=True)
        used_seed = int(seed)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    nodes = np.column_stack([np.ones(sphere.shape[0]), sphere])
    return BoundaryQuadrature(
        nodes=nodes,
        weights=_uniform_weights(sphere.shape[0]),
        scheme=scheme,
        seed=used_seed,
    )


def transvection_to(p: HyperboloidPoint) -> np.ndarray:
    """Lorentz matrix of the hyperbolic translation sending o to p.

    The map boosts along the geodesic from o to p and fixes the
    Minkowski-orthogonal complement of that plane.  Applied to boundary
    representatives it realizes the visual-measure transport from o
    to p: the pushforward of the round measure at o.
    """
    m = p.m
    o = base_point(m).coords
    c = -minkowski_form(o, p.coords)
    ident = np.eye(m + 1)
    if c <= 1.0 + 1e-15:
        return ident
    r = np.arccosh(c)
    w = (p.coords - c * o) / np.sinh(r)
    G = np.diag([-1.0] + [1.0] * m)
    ow = np.outer(o, w) - np.outer(w, o)
    oo = np.outer(w, w) - np.outer(o, o)
    return ident + (np.cosh(r) - 1.0) * (oo @ G) + np.sinh(r) * (ow @ G)


def apply_isometry(L: np.ndarray, x: HyperboloidPoint) -> HyperboloidPoint:
    """Apply a Lorentz matrix to a point (renormalizing drift)."""
    return HyperboloidPoint(L @ x.coords)


def apply_isometry_ideal(L: np.ndarray, xi: IdealPoint) -> IdealPoint:
    """Apply a Lorentz matrix to an ideal point, restoring the gauge."""
    return IdealPoint.normalized(L @ xi.coords)


def parallel_transport(
    x: HyperboloidPoint, y: HyperboloidPoint, v: np.ndarray
) -> np.ndarray:
    """Parallel transport of the tangent vector v along the geodesic x -> y.

    Closed form in the hyperboloid model:
        v + q(y, v) / (1 - q(x, y)) * (x + y).
    Preserves the Minkowski form; the identity map when x = y.
    """
    if x.m != y.m:
        raise ValueError("points live in different dimensions")
    denom = 1.0 - minkowski_form(x.coords, y.coords)
    return v + (minkowski_form(y.coords, v) / denom) * (x.coords + y.coords)


def random_boost(rng: np.random.Generator, m: int, scale: float = 0.5) -> np.ndarray:
    """A random Lorentz matrix: exponential of a random so(m,1) element."""
    from scipy.linalg import expm

    a = scale * rng.standard_normal((m + 1, m + 1))
    # so(m,1) elements are G S with S antisymmetric: then A^T G + G A = 0.
    G = np.diag([-1.0] + [1.0] * m)
    return expm(G @ (a - a.T) / 2.0)


def random_point(
    rng: np.random.Generator, m: int, max_radius: float = 2.0
) -> HyperboloidPoint:
    """A random point at distance uniform in [0, max_radius] from o."""
    direction = rng.standard_normal(m)
    direction /= np.linalg.norm(direction)
    r = max_radius * rng.random()
    c = np.concatenate([[np.cosh(r)], np.sinh(r) * direction])
    return HyperboloidPoint(c)
