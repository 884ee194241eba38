"""Barycenters of weighted configurations: the solver, the derived
quadratic forms, the determinant inequalities, the differential bound,
and the discrete sphere-valued map."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from minent.barycenter import (
    BarycenterProblem,
    NearSingularError,
    WeightedConfiguration,
    bar_differential_fd,
    bcg_campaign,
    bcg_inequality_check,
    form_lipschitz_ratio,
    form_pair_at,
    functional_and_grad,
    jacobian_bound_report,
    natural_map_discrete,
    natural_map_energy,
    random_configuration,
    solve_barycenter,
)
from minent.hyperbolic import (
    HyperboloidPoint,
    apply_isometry,
    base_point,
    boundary_quadrature,
    random_boost,
    random_point,
    tangent_frame,
    visual_density,
)
from minent.products import (
    ProductPoint,
    min_entropy_profile,
    product_dist,
    product_exp,
)

o3 = base_point(3)


def radial(r, axis=0):
    c = np.zeros(4)
    c[0] = math.cosh(r)
    c[axis + 1] = math.sinh(r)
    return HyperboloidPoint(c)


def single_atom(profile, point=None):
    p = point if point is not None else ProductPoint((o3, o3))
    return WeightedConfiguration(atoms=(p,), weights=(1.0,), profile=profile)


# -- configuration validation ----------------------------------------------


def test_weights_must_sum_to_one(profile33):
    p = ProductPoint((o3, o3))
    with pytest.raises(ValueError):
        WeightedConfiguration(atoms=(p, p), weights=(0.6, 0.6), profile=profile33)
    with pytest.raises(ValueError):
        WeightedConfiguration(atoms=(p, p), weights=(1.2, -0.2), profile=profile33)


# -- functional values and gradients ---------------------------------------


def test_value_zero_for_atom_at_base(profile33, quads33):
    config = single_atom(profile33)
    x = ProductPoint((o3, o3))
    value, grad = functional_and_grad(config, x, quads33)
    assert abs(value) < 1e-12
    assert max(np.abs(g).max() for g in grad) < 2e-3


def test_gradient_matches_value_finite_differences(profile33, quads33, rng):
    config = random_configuration(rng, profile33, 3, spread=1.0)
    problem = BarycenterProblem(config, quads33)
    x = ProductPoint(tuple(random_point(rng, 3, 0.8) for _ in range(2)))
    value, grad, gnorm, frames = problem.value_and_grad(x)
    h = 1e-3
    for i in range(2):
        for a in range(3):
            vecs = [np.zeros(4), np.zeros(4)]
            vecs[i] = h * frames[i][a]
            vp = problem.value_only(product_exp(x, vecs, profile33))
            vecs[i] = -h * frames[i][a]
            vm = problem.value_only(product_exp(x, vecs, profile33))
            assert (vp - vm) / (2 * h) == pytest.approx(
                grad[i][a], abs=1e-4
            )


def test_functional_dual_quadrature_routes(profile33, quads33):
    """The solver integrates over transported nodes with uniform
    weights; the same number must come out of fixed base nodes weighted
    by the visual density of each atom."""
    gen = np.random.default_rng(7)
    config = random_configuration(gen, profile33, 3, spread=1.2)
    x = ProductPoint(tuple(random_point(gen, 3, 0.7) for _ in range(2)))
    problem = BarycenterProblem(config, quads33)
    value, _ = functional_and_grad(config, x, quads33)

    from minent.hyperbolic import busemann

    quad = quads33[0]
    ideals = quad.ideal_points()
    dens_total = 0.0
    for w, atom in zip(config.weights, config.atoms):
        for i in range(2):
            dens = np.array(
                [visual_density(atom.factors[i], xi, 2.0) for xi in ideals]
            )
            bus = np.array(
                [busemann(x.factors[i], xi).value for xi in ideals]
            )
            # alpha_i / sqrt(k) weighting of the factor term
            dens_total += (
                w
                * (profile33.alpha[i] / math.sqrt(2.0))
                * float(quad.weights @ (dens * bus))
            )
    assert value == pytest.approx(dens_total, abs=1e-4)


# -- the solver ------------------------------------------------------------

def test_single_atom_fixed_point(profile33, quads33):
    gen = np.random.default_rng(2)
    p = ProductPoint(tuple(random_point(gen, 3, 1.5) for _ in range(2)))
    sol = solve_barycenter(single_atom(profile33, p), quads33, tol=1e-9)
    assert sol.converged
    assert product_dist(sol.point, p, profile33) < 1e-5


def test_midpoint_against_line_search_oracle(profile33, quads33):
    p = ProductPoint((radial(1.6), o3))
    q = ProductPoint((o3, o3))
    config = WeightedConfiguration(
        atoms=(p, q), weights=(0.5, 0.5), profile=profile33
    )
    sol = solve_barycenter(config, quads33, tol=1e-10)
    problem = BarycenterProblem(config, quads33)

    # 1-d oracle: minimize along the connecting geodesic in factor 1
    def along(t):
        return problem.value_only(ProductPoint((radial(t), o3)))

    res = minimize_scalar(
        along, bounds=(0.0, 1.6), method="bounded",
        options={"xatol": 1e-10},
    )
    t_star = float(res.x)
    # the barycenter of a symmetric two-atom pair is the metric midpoint
    assert t_star == pytest.approx(0.8, abs=2e-4)
    assert product_dist(
        sol.point, ProductPoint((radial(t_star), o3)), profile33
    ) < 2e-4


def test_solver_start_independence(profile33, quads33, rng):
    config = random_configuration(rng, profile33, 4, spread=1.2)
    tol = 1e-8
    sols = []
    for s in range(3):
        gen = np.random.default_rng(100 + s)
        x0 = ProductPoint(tuple(random_point(gen, 3, 1.0) for _ in range(2)))
        sols.append(solve_barycenter(config, quads33, tol=tol, x0=x0))
    assert all(s.converged for s in sols)
    for s in sols[1:]:
        assert product_dist(s.point, sols[0].point, profile33) <= 10 * tol


def test_solver_equivariance(profile33, quads33_fine):
    # quadrature anisotropy shifts the minimizer by O(1/count); the
    # 2000-node set keeps the residual inside the 5e-5 contract
    gen = np.random.default_rng(3)
    config = random_configuration(gen, profile33, 3, spread=1.0)
    L = random_boost(gen, 3, scale=0.4)
    moved = WeightedConfiguration(
        atoms=tuple(
            ProductPoint((apply_isometry(L, a.factors[0]), a.factors[1]))
            for a in config.atoms
        ),
        weights=config.weights,
        profile=profile33,
    )
    sol = solve_barycenter(config, quads33_fine, tol=1e-10)
    sol_moved = solve_barycenter(moved, quads33_fine, tol=1e-10)
    expected = ProductPoint(
        (apply_isometry(L, sol.point.factors[0]), sol.point.factors[1])
    )
    assert product_dist(sol_moved.point, expected, profile33) < 5e-5


def test_solver_non_convergence_reported(profile33, quads33, rng):
    config = random_configuration(rng, profile33, 4, spread=1.2)
    sol = solve_barycenter(config, quads33, tol=1e-9, max_iter=1)
    assert not sol.converged
    assert sol.iterations == 1
    assert sol.gradient_norm > 1e-9


def test_solver_rejects_unresolvable_tolerance(profile33, quads33, rng):
    config = random_configuration(rng, profile33, 2, spread=0.5)
    with pytest.raises(ValueError):
        solve_barycenter(config, quads33, tol=1e-12)


# -- derived forms ---------------------------------------------------------


def test_forms_exact_identities(profile33, quads33, rng):
    """Transported-node quadrature makes the mass, trace, and
    complement identities exact to rounding, not just to quadrature
    tolerance."""
    config = random_configuration(rng, profile33, 4, spread=1.2)
    sol = solve_barycenter(config, quads33, tol=1e-8)
    pair = form_pair_at(config, sol.point, quads33)
    assert np.abs(pair.masses - 1.0).max() < 1e-12
    assert pair.trace_h() == pytest.approx(1.0, abs=1e-12)
    for h_i, k_i in zip(pair.factor_h, pair.factor_k):
        assert np.abs(k_i - (np.eye(3) - h_i)).max() < 1e-12
        assert np.abs(h_i - h_i.T).max() < 1e-14


@given(seed=st.integers(0, 2**31 - 1))
@settings(max_examples=8, deadline=None)
def test_forms_trace_property(seed, profile33, quads33):
    gen = np.random.default_rng(seed)
    config = random_configuration(gen, profile33, int(2 + seed % 4), spread=1.0)
    x = ProductPoint(tuple(random_point(gen, 3, 1.0) for _ in range(2)))
    pair = form_pair_at(config, x, quads33)
    assert pair.trace_h() == pytest.approx(1.0, abs=1e-12)
    evals = np.linalg.eigvalsh(pair.H)
    assert evals.min() > -1e-12


def test_single_atom_forms_are_isotropic(profile33, quads33):
    config = single_atom(profile33)
    pair = form_pair_at(config, ProductPoint((o3, o3)), quads33)
    for h_i in pair.factor_h:
        assert np.abs(h_i - np.eye(3) / 3.0).max() < 5e-3


def test_form_lipschitz_ratio_reported(profile33, quads33):
    gen = np.random.default_rng(9)
    config_a = random_configuration(gen, profile33, 4, spread=1.0)
    deltas = gen.dirichlet(np.ones(4))
    mixed = 0.7 * np.array(config_a.weights) + 0.3 * deltas
    config_b = config_a.reweighted(mixed / mixed.sum())
    rep = form_lipschitz_ratio(config_a, config_b, quads33)
    assert np.isfinite(rep["ratio"])
    assert rep["ratio"] >= 0.0
    assert rep["weight_distance"] > 0.0
    assert rep["deviation"] <= rep["ratio"] * (
        rep["barycenter_distance"] + rep["weight_distance"]
    ) + 1e-15


# -- determinant inequalities ----------------------------------------------


def test_bcg_equality_case():
    for n in (3, 4, 5):
        res = bcg_inequality_check(np.eye(n) / n, n, n - 1)
        assert res.holds
        assert res.equality_gap < 1e-9
        want = (math.sqrt(n) / (n - 1)) ** n
        assert res.bound == pytest.approx(want, rel=1e-14)


def test_bcg_equality_value_h3():
    res = bcg_inequality_check(np.eye(3) / 3.0, 3, 2)
    assert res.ratio == pytest.approx(3.0 * math.sqrt(3.0) / 8.0, abs=1e-14)


def test_bcg_near_rank_one_below_bound():
    # both determinants vanish at the same order here, so the ratio
    # limits to 1/2, strictly inside the bound but not near zero
    eps = 1e-3
    H = np.diag([1.0 - 2 * eps, eps, eps])
    res = bcg_inequality_check(H, 3, 2)
    assert res.holds
    assert res.ratio < res.bound - 0.14
    assert res.ratio == pytest.approx(0.5, abs=5e-3)


def test_bcg_rank_two_degeneration_ratio_collapses():
    # only the numerator degenerates when one eigenvalue alone shrinks
    eps = 1e-4
    H = np.diag([0.5 - eps / 2, 0.5 - eps / 2, eps])
    res = bcg_inequality_check(H, 3, 2)
    assert res.holds
    assert res.ratio < 0.05 * res.bound


def test_bcg_singular_input_rejected():
    H = np.diag([1.0, 0.0, 0.0])
    with pytest.raises(NearSingularError):
        bcg_inequality_check(H, 3, 2)


def test_bcg_campaign_no_violations():
    for n in (3, 4, 5):
        out = bcg_campaign(n, 2000, seed=11)
        assert out["violations"] == 0
        assert out["max_ratio"] <= out["bound"]
        assert out["matrix_route_error"] < 1e-12


# -- the Jacobian-type bound ----------------------------------------------


def test_jacobian_single_atom_attains_bound(profile33, quads33):
    config = single_atom(profile33)
    rep = jacobian_bound_report(config, quads33)
    assert rep.holds
    assert rep.bound == pytest.approx(27.0, abs=1e-12)
    assert rep.estimate == pytest.approx(27.0, rel=0.02)


def test_jacobian_spread_config_strictly_inside(profile33, quads33):
    far = WeightedConfiguration(
        atoms=(
            ProductPoint((radial(2.0), o3)),
            ProductPoint((radial(-2.0), o3)),
        ),
        weights=(0.5, 0.5),
        profile=profile33,
    )
    rep = jacobian_bound_report(far, quads33)
    assert rep.holds
    assert rep.estimate <= 0.95 * rep.bound


def test_jacobian_bound_formula_mixed_profile():
    prof = min_entropy_profile((3, 4), (2.0, 3.0))
    o4 = base_point(4)
    config = WeightedConfiguration(
        atoms=(ProductPoint((o3, o4)),), weights=(1.0,), profile=prof
    )
    quads = [boundary_quadrature(3, 600), boundary_quadrature(4, 600, "monte-carlo", seed=5)]
    rep = jacobian_bound_report(config, quads)
    want = (4.0 * 7.0 / prof.h_min**2) ** 3.5
    assert rep.bound == pytest.approx(want, rel=1e-12)


def test_jacobian_random_sweep_holds(profile33, quads33):
    gen = np.random.default_rng(1234)
    worst = 0.0
    for _ in range(10):
        config = random_configuration(gen, profile33, int(gen.integers(2, 6)))
        rep = jacobian_bound_report(config, quads33, solution=None)
        assert rep.holds
        worst = max(worst, rep.estimate / rep.bound)
    assert worst < 1.0


def test_jacobian_near_singular_rejection(profile33, quads33):
    def antipodal(r):
        return WeightedConfiguration(
            atoms=(
                ProductPoint((radial(r), radial(r))),
                ProductPoint((radial(-r), radial(-r))),
            ),
            weights=(0.5, 0.5),
            profile=profile33,
        )

    ok = jacobian_bound_report(antipodal(8.0), quads33)
    assert ok.holds
    assert ok.h_eigen_max > 0.999
    with pytest.raises(NearSingularError) as err:
        jacobian_bound_report(antipodal(9.0), quads33)
    assert "near-singular" in str(err.value)


# -- differential of the barycenter map ------------------------------------


def test_differential_zero_direction(profile33, quads33, rng):
    config = random_configuration(rng, profile33, 3)
    est = bar_differential_fd(config, quads33, np.zeros(3))
    assert est.norm == 0.0


def test_differential_symmetric_configuration(profile33, quads33):
    atoms = tuple(
        ProductPoint((radial(1.0, axis), o3)) for axis in range(3)
    )
    config = WeightedConfiguration(
        atoms=atoms, weights=(1 / 3,) * 3, profile=profile33
    )
    u = np.array([1.0, -1.0, 0.0])
    est = bar_differential_fd(config, quads33, u, step=1e-3, tol=1e-9)
    assert est.norm <= est.bound * 1.05
    assert est.bound == pytest.approx(math.sqrt(3.0), abs=1e-12)


def test_differential_random_configuration(profile33, quads33):
    gen = np.random.default_rng(21)
    config = random_configuration(gen, profile33, 4, spread=1.0)
    u = gen.standard_normal(4)
    est = bar_differential_fd(config, quads33, u, step=1e-3, tol=1e-9)
    assert est.norm <= est.bound * 1.05
    assert est.slack <= 0.05


def test_differential_step_validation(profile33, quads33, rng):
    config = random_configuration(rng, profile33, 3)
    with pytest.raises(ValueError):
        bar_differential_fd(config, quads33, np.ones(3), step=0.01)


# -- discrete sphere-valued map --------------------------------------------


def test_natural_map_equidistant_symmetry(profile33):
    pts = [
        ProductPoint((radial(1.0), o3)),
        ProductPoint((radial(-1.0), o3)),
    ]
    x = ProductPoint((o3, o3))
    comps = natural_map_discrete(pts, 3.0, x, profile33)
    assert comps == pytest.approx(
        np.array([1.0, 1.0]) / math.sqrt(2.0), abs=1e-12
    )


def test_natural_map_concentrates_at_nearby_point(profile33):
    pts = [
        ProductPoint((radial(0.05), o3)),
        ProductPoint((radial(-3.0), o3)),
        ProductPoint((o3, radial(3.0))),
    ]
    x = ProductPoint((radial(0.05), o3))
    comps = natural_map_discrete(pts, 8.0, x, profile33)
    assert comps[0] > 0.999
    assert np.abs(comps).max() == comps[0]


def test_natural_map_underflow_error(profile33):
    pts = [
        ProductPoint((radial(8.0), o3)),
        ProductPoint((radial(-8.0), o3)),
    ]
    x = ProductPoint((o3, radial(8.0)))
    with pytest.raises(ValueError, match="underflow"):
        natural_map_discrete(pts, 300.0, x, profile33)


def test_natural_map_energy_bound(profile33):
    gen = np.random.default_rng(17)
    c = 1.1 * profile33.h_min
    pts = [
        ProductPoint(tuple(random_point(gen, 3, 1.2) for _ in range(2)))
        for _ in range(8)
    ]
    worst = 0.0
    for _ in range(10):
        x = ProductPoint(tuple(random_point(gen, 3, 1.0) for _ in range(2)))
        res = natural_map_energy(pts, c, x, profile33)
        assert res.holds
        worst = max(worst, res.energy / res.bound)
    assert worst <= 1.05
