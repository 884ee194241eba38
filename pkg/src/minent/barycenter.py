"""Horofunction barycenters of weighted configurations on a product.

For a finite configuration of atoms p_j with weights w_j summing to 1,
the functional

    F(x) = sum_j w_j int B0(x, theta) d nu_{p_j}(theta)

integrates the product horofunction against the visual probability
measure seen from each atom (the product over factors of the factor
visual measures).  F is strictly convex with a unique minimizer, the
barycenter of the configuration.  Its first and second derivatives are
the quadratic forms

    H(v, w) = sum_j w_j int dB0(v) dB0(w) d nu_{p_j}
    K(v, w) = sum_j w_j int Hess B0(v, w) d nu_{p_j}

with trace(H) = 1 (the integrand is a unit covector squared) and, for
real hyperbolic factors, the per-factor reduction K_i = Id - H_i.

Quadrature realization.  Each atom's visual measure is represented by
transporting one fixed boundary node set through the hyperbolic
translation taking the base point to the atom.  This is the same
integral as weighting fixed nodes by the visual density (the density
is the boundary Jacobian of that translation); the transported form
keeps the exact symmetries: node weights stay uniform, masses are
exactly 1, single-atom gradients vanish at the atom to machine
precision, and the whole computation is equivariant under factor
isometries.  The density-weighted route stays available in
:mod:`minent.hyperbolic` and the two routes are cross-checked in the
test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hyperbolic import (
    BoundaryQuadrature,
    HyperboloidPoint,
    TangentVector,
    dist,
    exp_map,
    parallel_transport,
    tangent_frame,
    transvection_to,
)
from .products import (
    ProductPoint,
    ScalingProfile,
    product_dist,
)

__all__ = [
    "WeightedConfiguration",
    "FormPair",
    "BarycenterSolution",
    "BarycenterProblem",
    "NearSingularError",
    "functional_and_grad",
    "solve_barycenter",
    "form_pair_at",
    "BcgResult",
    "bcg_inequality_check",
    "bcg_campaign",
    "JacobianReport",
    "jacobian_bound_report",
    "DifferentialEstimate",
    "bar_differential_fd",
    "NaturalMapResult",
    "natural_map_discrete",
    "natural_map_energy",
    "form_lipschitz_ratio",
    "random_configuration",
]


class NearSingularError(ValueError):
    """A quadratic form is too close to singular for a determinant bound."""

    def __init__(self, message: str, factor: int | None = None):
        super().__init__(message)
        self.factor = factor


@dataclass(frozen=True)
class WeightedConfiguration:
    """Finitely many atoms with positive weights summing to 1."""

    atoms: tuple[ProductPoint, ...]
    weights: tuple[float, ...]
    profile: ScalingProfile

    def __post_init__(self):
        if len(self.atoms) != len(self.weights) or not self.atoms:
            raise ValueError("atoms and weights must be matched and nonempty")
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be positive")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1 within 1e-12")
        for p in self.atoms:
            if p.dims != self.profile.dims:
                raise ValueError("atom dimensions do not match the profile")
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))

    @property
    def size(self) -> int:
        return len(self.atoms)

    def reweighted(self, weights) -> "WeightedConfiguration":
        w = np.asarray(weights, dtype=float)
        w = w / w.sum()
        return WeightedConfiguration(self.atoms, tuple(w), self.profile)


@dataclass(frozen=True)
class FormPair:
    """The two quadratic forms at a point, in the orthonormal frame of
    the scaled product metric.

    H, K             full n x n matrices (K is block diagonal).
    factor_h         per-factor second-moment matrices in the unscaled
                     factor frames; blocks of H are these over k plus
                     first-moment cross terms.
    factor_k         per-factor complements (mass Id - factor_h).
    masses           per-atom, per-factor quadrature masses (1 up to
                     rounding by construction).
    frames           per-factor orthonormal frames at the point.
    """

    H: np.ndarray
    K: np.ndarray
    factor_h: tuple[np.ndarray, ...]
    factor_k: tuple[np.ndarray, ...]
    masses: np.ndarray
    frames: tuple[np.ndarray, ...]

    def trace_h(self) -> float:
        return float(np.trace(self.H))


@dataclass(frozen=True)
class BarycenterSolution:
    point: ProductPoint
    gradient_norm: float
    value: float
    iterations: int
    converged: bool


class BarycenterProblem:
    """One configuration with its transported quadrature nodes.

    Prepares, per atom and factor, the node set representing the atom's
    visual measure, and evaluates the functional, gradient and forms at
    arbitrary points.  All evaluations share the preparation.
    """

    def __init__(
        self,
        config: WeightedConfiguration,
        quads: list[BoundaryQuadrature] | tuple[BoundaryQuadrature, ...],
    ):
        profile = config.profile
        if len(quads) != profile.k:
            raise ValueError("need one boundary quadrature per factor")
        for q, m in zip(quads, profile.dims):
            if q.m != m:
                raise ValueError(
                    f"quadrature on S^{q.m - 1} does not match factor H^{m}"
                )
            if q.scheme == "deterministic-sphere" and q.count < 200:
                raise ValueError("deterministic quadrature needs >= 200 nodes")
            if q.scheme == "monte-carlo" and q.seed is None:
                raise ValueError("monte-carlo quadrature must carry its seed")
        self.config = config
        self.profile = profile
        self.quads = tuple(quads)
        self.metrics = [np.diag([-1.0] + [1.0] * m) for m in profile.dims]
        # Transported nodes: atom j, factor i -> (count_i, m_i + 1).
        self.nodes: list[list[np.ndarray]] = []
        for atom in config.atoms:
            per_factor = []
            for i, xf in enumerate(atom.factors):
                M = transvection_to(xf)
                moved = self.quads[i].nodes @ M.T
                moved = moved / moved[:, :1]
                per_factor.append(moved)
            self.nodes.append(per_factor)
        self.w = np.array(config.weights)

    # -- raw per-factor moments ------------------------------------------

    def _moments(self, x: ProductPoint, need_forms: bool):
        """Per atom j and factor i: quadrature mass, mean horofunction
        value, mean frame differential, and (optionally) its second
        moment, at the factor point x_i."""
        prof = self.profile
        frames = [tangent_frame(xf) for xf in x.factors]
        J = self.config.size
        masses = np.zeros((J, len(prof.dims)))
        values = np.zeros((J, len(prof.dims)))
        means = [np.zeros((J, m)) for m in prof.dims]
        seconds = [np.zeros((J, m, m)) for m in prof.dims] if need_forms else None
        for i, (xf, G) in enumerate(zip(x.factors, self.metrics)):
            gx = G @ xf.coords
            fg = frames[i] @ G  # (m_i, m_i+1)
            wts = self.quads[i].weights
            for j in range(J):
                nodes = self.nodes[j][i]
                s = -(nodes @ gx)
                b = -(nodes @ fg.T) / s[:, None]
                masses[j, i] = float(wts.sum())
                values[j, i] = float(wts @ np.log(s))
                means[i][j] = wts @ b
                if need_forms:
                    seconds[i][j] = np.einsum("l,la,lb->ab", wts, b, b)
        return frames, masses, values, means, seconds

    # -- public evaluations ----------------------------------------------

    def value_and_grad(self, x: ProductPoint):
        prof = self.profile
        rk = np.sqrt(prof.k)
        frames, masses, values, means, _ = self._moments(x, need_forms=False)
        value = float(
            sum(
                (prof.alpha[i] / rk) * float(self.w @ values[:, i])
                for i in range(prof.k)
            )
        )
        grad = [np.asarray(self.w @ means[i]) / rk for i in range(prof.k)]
        gnorm = float(np.sqrt(sum(float(g @ g) for g in grad)))
        return value, grad, gnorm, frames

    def value_only(self, x: ProductPoint) -> float:
        return self.value_and_grad(x)[0]

    def forms(self, x: ProductPoint) -> FormPair:
        prof = self.profile
        k, rk = prof.k, np.sqrt(prof.k)
        frames, masses, values, means, seconds = self._moments(x, need_forms=True)
        n = prof.n
        H = np.zeros((n, n))
        K = np.zeros((n, n))
        offsets = np.concatenate([[0], np.cumsum(prof.dims)])
        factor_h = []
        factor_k = []
        for i, m in enumerate(prof.dims):
            sl = slice(offsets[i], offsets[i + 1])
            S_i = np.einsum("j,jab->ab", self.w, seconds[i])
            mass_i = float(self.w @ masses[:, i])
            factor_h.append(S_i)
            factor_k.append(mass_i * np.eye(m) - S_i)
            H[sl, sl] = S_i / k
            K[sl, sl] = factor_k[-1] / (prof.alpha[i] * rk)
            for i2 in range(i + 1, prof.k):
                sl2 = slice(offsets[i2], offsets[i2 + 1])
                cross = np.einsum("j,ja,jb->ab", self.w, means[i], means[i2]) / k
                H[sl, sl2] = cross
                H[sl2, sl] = cross.T
        H = (H + H.T) / 2.0
        K = (K + K.T) / 2.0
        return FormPair(
            H=H,
            K=K,
            factor_h=tuple(factor_h),
            factor_k=tuple(factor_k),
            masses=masses,
            frames=tuple(frames),
        )

    # -- solver -----------------------------------------------------------

    def initial_point(self) -> ProductPoint:
        """Weighted ambient average per factor, renormalized to the sheet."""
        out = []
        for i in range(self.profile.k):
            acc = np.zeros(self.profile.dims[i] + 1)
            for w, atom in zip(self.w, self.config.atoms):
                acc += w * atom.factors[i].coords
            from .hyperbolic import minkowski_form

            acc = acc / np.sqrt(-minkowski_form(acc, acc))
            out.append(HyperboloidPoint(acc))
        return ProductPoint(tuple(out))

    def retract(
        self, x: ProductPoint, frames, step_comps: list[np.ndarray]
    ) -> ProductPoint:
        """Per-factor exponential update from frame components of the
        scaled metric (components along frame / alpha_i)."""
        prof = self.profile
        new = []
        for i, xf in enumerate(x.factors):
            vec = (step_comps[i] @ frames[i]) / prof.alpha[i]
            if np.allclose(vec, 0.0):
                new.append(xf)
            else:
                new.append(exp_map(xf, TangentVector(xf, vec), 1.0))
        return ProductPoint(tuple(new))

    def solve(
        self,
        tol: float = 1e-8,
        max_iter: int = 100,
        x0: ProductPoint | None = None,
    ) -> BarycenterSolution:
        if tol < 1e-10:
            raise ValueError("tolerances below 1e-10 are not resolvable here")
        prof = self.profile
        x = x0 if x0 is not None else self.initial_point()
        value, grad, gnorm, frames = self.value_and_grad(x)
        offsets = np.concatenate([[0], np.cumsum(prof.dims)])
        for it in range(1, max_iter + 1):
            if gnorm <= tol:
                return BarycenterSolution(x, gnorm, value, it - 1, True)
            pair = self.forms(x)
            g = np.concatenate(grad)
            try:
                delta = np.linalg.solve(pair.K, -g)
            except np.linalg.LinAlgError:
                raise NearSingularError("second-derivative form is singular")
            comps = [
                delta[offsets[i] : offsets[i + 1]] for i in range(prof.k)
            ]
            t = 1.0
            for _ in range(30):
                trial = self.retract(x, frames, [t * c for c in comps])
                tval, tgrad, tnorm, tframes = self.value_and_grad(trial)
                if tval < value or tnorm < gnorm:
                    x, value, grad, gnorm, frames = trial, tval, tgrad, tnorm, tframes
                    break
                t *= 0.5
            else:
                # no progress at the smallest damping: report where we are
                return BarycenterSolution(x, gnorm, value, it, False)
        return BarycenterSolution(x, gnorm, value, max_iter, gnorm <= tol)


# -- functional wrappers ---------------------------------------------------


def functional_and_grad(
    config: WeightedConfiguration,
    x: ProductPoint,
    quads,
):
    """Value and gradient of the barycenter functional at x.

    The gradient is returned as per-factor components in the
    orthonormal frame of the scaled metric (concatenate for the full
    vector; its Euclidean norm is the gradient norm).
    """
    problem = BarycenterProblem(config, quads)
    value, grad, gnorm, _ = problem.value_and_grad(x)
    return value, grad


def solve_barycenter(
    config: WeightedConfiguration,
    quads,
    tol: float = 1e-8,
    max_iter: int = 100,
    x0: ProductPoint | None = None,
) -> BarycenterSolution:
    return BarycenterProblem(config, quads).solve(tol=tol, max_iter=max_iter, x0=x0)


def form_pair_at(config: WeightedConfiguration, x: ProductPoint, quads) -> FormPair:
    return BarycenterProblem(config, quads).forms(x)


# -- determinant inequalities ---------------------------------------------


@dataclass(frozen=True)
class BcgResult:
    ratio: float
    bound: float
    holds: bool
    equality_gap: float


def bcg_inequality_check(H: np.ndarray, n: int, h: float) -> BcgResult:
    """The determinant inequality det(H)^1/2 / det(Id - H) <= (sqrt(n)/h)^n
    for trace-1 positive semidefinite H; sharp exactly at H = Id/n when
    h = n - 1."""
    H = np.asarray(H, dtype=float)
    if H.shape != (n, n):
        raise ValueError("H must be n x n")
    if np.abs(H - H.T).max() > 1e-10:
        raise ValueError("H must be symmetric")
    if abs(np.trace(H) - 1.0) > 1e-8:
        raise ValueError("H must have unit trace")
    eig = np.linalg.eigvalsh(H)
    if eig[0] < -1e-10:
        raise ValueError("H must be positive semidefinite")
    comp = np.eye(n) - H
    det_comp = float(np.linalg.det(comp))
    if det_comp <= 0:
        raise NearSingularError(
            "det(Id - H) <= 0: an eigenvalue of H reaches 1, the ratio is undefined"
        )
    ratio = float(np.sqrt(max(np.linalg.det(H), 0.0)) / det_comp)
    bound = (np.sqrt(n) / h) ** n
    return BcgResult(
        ratio=ratio,
        bound=float(bound),
        holds=bool(ratio <= bound * (1 + 1e-12)),
        equality_gap=float(bound - ratio),
    )


def bcg_campaign(
    n: int, count: int, seed: int = 0
) -> dict:
    """Vectorized random search for violations of the determinant
    inequality at h = n - 1: ``count`` random trace-1 PSD matrices with
    Dirichlet eigenvalues and Haar-ish orthogonal frames."""
    rng = np.random.default_rng(seed)
    lam = rng.dirichlet(np.ones(n), size=count)
    gauss = rng.standard_normal((count, n, n))
    q, r = np.linalg.qr(gauss)
    sign = np.sign(np.einsum("cii->ci", r))
    q = q * sign[:, None, :]
    ratios = np.sqrt(np.prod(lam, axis=1)) / np.prod(1.0 - lam, axis=1)
    bound = (np.sqrt(n) / (n - 1)) ** n
    # The ratio depends only on the spectrum; assemble a few full
    # matrices and push them through the scalar check as a route check.
    spot = min(8, count)
    spot_err = 0.0
    for c in range(spot):
        Hc = (q[c] * lam[c][None, :]) @ q[c].T
        Hc = (Hc + Hc.T) / 2
        res = bcg_inequality_check(Hc, n, n - 1)
        spot_err = max(spot_err, abs(res.ratio - ratios[c]))
    violations = int(np.sum(ratios > bound * (1 + 1e-12)))
    return {
        "count": int(count),
        "violations": violations,
        "max_ratio": float(ratios.max()),
        "bound": float(bound),
        "min_gap": float(bound - ratios.max()),
        "matrix_route_error": float(spot_err),
        "seed": int(seed),
    }


@dataclass(frozen=True)
class JacobianReport:
    estimate: float
    bound: float
    holds: bool
    barycenter: ProductPoint
    gradient_norm: float
    h_eigen_max: float
    factor_ratios: tuple[float, ...]


def jacobian_bound_report(
    config: WeightedConfiguration,
    quads,
    solution: BarycenterSolution | None = None,
    tol: float = 1e-8,
) -> JacobianReport:
    """Both sides of the volume-distortion bound at the barycenter:
    estimate 2^n det(H)^{1/2} / det(K) against (4 n / h_min^2)^{n/2}."""
    problem = BarycenterProblem(config, quads)
    prof = config.profile
    if solution is None:
        solution = problem.solve(tol=tol)
    if not solution.converged:
        raise NearSingularError("barycenter solve did not converge; no report")
    pair = problem.forms(solution.point)
    h_eigs = np.linalg.eigvalsh(pair.H)
    if h_eigs[-1] >= 1.0 - 1e-6:
        raise NearSingularError(
            "near-singular complement: an eigenvalue of H reaches "
            f"{h_eigs[-1]:.8f}; the determinant ratio is unstable"
        )
    factor_ratios = []
    for i, (S_i, K_i) in enumerate(zip(pair.factor_h, pair.factor_k)):
        ke = np.linalg.eigvalsh(K_i)
        if ke[0] <= 0:
            raise NearSingularError(
                f"factor {i} complement is singular", factor=i
            )
        ni, hi = prof.dims[i], prof.entropies[i]
        det_h = max(float(np.linalg.det(S_i)), 0.0)
        det_k = float(np.linalg.det(K_i))
        factor_ratios.append(np.sqrt(det_h) / det_k / (np.sqrt(ni) / hi) ** ni)
    sign_k, logdet_k = np.linalg.slogdet(pair.K)
    if sign_k <= 0:
        raise NearSingularError("full complement form is singular")
    sign_h, logdet_h = np.linalg.slogdet(pair.H)
    if sign_h <= 0:
        estimate = 0.0
    else:
        estimate = float(
            np.exp(prof.n * np.log(2.0) + 0.5 * logdet_h - logdet_k)
        )
    bound = float((4.0 * prof.n / prof.h_min**2) ** (prof.n / 2.0))
    return JacobianReport(
        estimate=estimate,
        bound=bound,
        holds=bool(estimate <= bound * (1 + 1e-9)),
        barycenter=solution.point,
        gradient_norm=solution.gradient_norm,
        h_eigen_max=float(h_eigs[-1]),
        factor_ratios=tuple(float(r) for r in factor_ratios),
    )


# -- differential of the barycenter map ------------------------------------


@dataclass(frozen=True)
class DifferentialEstimate:
    norm: float
    bound: float
    slack: float
    step: float


def bar_differential_fd(
    config: WeightedConfiguration,
    quads,
    direction,
    step: float = 1e-3,
    tol: float = 1e-9,
) -> DifferentialEstimate:
    """Finite-difference norm of the barycenter differential along a
    unit tangent direction of the square-root weight sphere.

    The direction u must satisfy <u, sqrt(w)> = 0; it is normalized
    here.  Perturbed weights are (sqrt(w) + step u)^2 renormalized.
    The norm is compared against sqrt(4 n / h_min^2); the signed slack
    (norm / bound - 1) is reported, not asserted.
    """
    if step > 1e-3 or step <= 0:
        raise ValueError("step must lie in (0, 1e-3]")
    u = np.asarray(direction, dtype=float)
    f = np.sqrt(np.array(config.weights))
    if u.shape != f.shape:
        raise ValueError("direction length must match the number of atoms")
    nrm = np.linalg.norm(u)
    if nrm == 0.0:
        return DifferentialEstimate(
            norm=0.0,
            bound=float(np.sqrt(4.0 * config.profile.n / config.profile.h_min**2)),
            slack=-1.0,
            step=step,
        )
    u = u / nrm
    if abs(float(u @ f)) > 1e-8:
        u = u - (u @ f) * f
        u = u / np.linalg.norm(u)
    base = solve_barycenter(config, quads, tol=tol)
    moved = config.reweighted((f + step * u) ** 2)
    shifted = solve_barycenter(moved, quads, tol=tol, x0=base.point)
    if not (base.converged and shifted.converged):
        raise NearSingularError("barycenter solve did not converge")
    norm = product_dist(base.point, shifted.point, config.profile) / step
    bound = float(np.sqrt(4.0 * config.profile.n / config.profile.h_min**2))
    return DifferentialEstimate(
        norm=float(norm), bound=bound, slack=float(norm / bound - 1.0), step=step
    )


# -- discrete sphere-valued map --------------------------------------------


@dataclass(frozen=True)
class NaturalMapResult:
    components: np.ndarray
    energy: float
    bound: float
    holds: bool
    step: float


def natural_map_discrete(
    points: list[ProductPoint], c: float, x: ProductPoint, profile: ScalingProfile
) -> np.ndarray:
    """Unit vector with components proportional to exp(-c/2 d(x, p_j)).

    Computed through a log-domain normalization, so the output is
    finite whenever the distance gaps are; an error is raised only when
    every raw component underflows in double precision.
    """
    if c <= 0:
        raise ValueError("the exponential rate c must be positive")
    if len(points) < 2:
        raise ValueError("need at least two reference points")
    d = np.array([product_dist(x, p, profile) for p in points])
    loga = -0.5 * c * d
    if loga.max() < -700.0:
        raise ValueError(
            "every component of the sphere map underflows; bring the "
            "basepoint closer to the reference points or adjust c"
        )
    logz = loga.max() + 0.5 * np.log(np.sum(np.exp(2.0 * (loga - loga.max()))))
    return np.exp(loga - logz)


def natural_map_energy(
    points: list[ProductPoint],
    c: float,
    x: ProductPoint,
    profile: ScalingProfile,
    step: float = 1e-4,
) -> NaturalMapResult:
    """Finite-difference energy of the sphere map at x.

    Central differences of the components along an orthonormal frame of
    the scaled metric; the energy (sum of squared differential norms)
    is compared against c^2 / 4 with 5 percent headroom for the
    discretization.
    """
    comps = natural_map_discrete(points, c, x, profile)
    energy = 0.0
    for i, xf in enumerate(x.factors):
        frame = tangent_frame(xf)
        for a in range(xf.m):
            vec = frame[a] / profile.alpha[i]
            outs = []
            for sgn in (+1.0, -1.0):
                moved = list(x.factors)
                moved[i] = exp_map(xf, TangentVector(xf, vec), sgn * step)
                outs.append(
                    natural_map_discrete(
                        points, c, ProductPoint(tuple(moved)), profile
                    )
                )
            diff = (outs[0] - outs[1]) / (2.0 * step)
            energy += float(diff @ diff)
    bound = c * c / 4.0
    return NaturalMapResult(
        components=comps,
        energy=float(energy),
        bound=bound,
        holds=bool(energy <= bound * 1.05),
        step=step,
    )


# -- empirical Lipschitz data for the second form --------------------------


def form_lipschitz_ratio(
    config_a: WeightedConfiguration,
    config_b: WeightedConfiguration,
    quads,
    tol: float = 1e-9,
) -> dict:
    """Compare the H forms of two configurations after parallel
    transport between their barycenters.

    Returns the ratio of the form deviation to the configuration
    distance (barycenter distance plus square-root-weight distance).
    The family sampled in the tests shares its atom set, so the weight
    term is the natural configuration distance.
    """
    if config_a.profile is not config_b.profile and config_a.profile != config_b.profile:
        raise ValueError("configurations must share a profile")
    prof = config_a.profile
    sol_a = solve_barycenter(config_a, quads, tol=tol)
    sol_b = solve_barycenter(config_b, quads, tol=tol, x0=sol_a.point)
    pair_a = form_pair_at(config_a, sol_a.point, quads)
    pair_b_frames = []
    # Transport the frame at Bar(a) to Bar(b) factor by factor and
    # express H_b in the transported frame.
    problem_b = BarycenterProblem(config_b, quads)
    transported = []
    for i, (fa, xa, xb) in enumerate(
        zip(pair_a.frames, sol_a.point.factors, sol_b.point.factors)
    ):
        rows = np.vstack(
            [parallel_transport(xa, xb, fa[r]) for r in range(fa.shape[0])]
        )
        transported.append(rows)
    h_b = _forms_in_frames(problem_b, sol_b.point, transported).H
    dev = float(np.abs(h_b - pair_a.H).max())
    w_dist = float(
        np.linalg.norm(
            np.sqrt(np.array(config_a.weights)) - np.sqrt(np.array(config_b.weights))
        )
    )
    b_dist = product_dist(sol_a.point, sol_b.point, prof)
    denom = b_dist + w_dist
    return {
        "deviation": dev,
        "barycenter_distance": b_dist,
        "weight_distance": w_dist,
        "ratio": dev / denom if denom > 0 else 0.0,
    }


def _forms_in_frames(problem: BarycenterProblem, x: ProductPoint, frames) -> FormPair:
    """Forms of the problem at x expressed in externally supplied
    per-factor orthonormal frames (used for transported comparisons)."""
    prof = problem.profile
    k, rk = prof.k, np.sqrt(prof.k)
    J = problem.config.size
    n = prof.n
    offsets = np.concatenate([[0], np.cumsum(prof.dims)])
    means = [np.zeros((J, m)) for m in prof.dims]
    seconds = [np.zeros((J, m, m)) for m in prof.dims]
    masses = np.zeros((J, k))
    for i, (xf, G) in enumerate(zip(x.factors, problem.metrics)):
        gx = G @ xf.coords
        fg = frames[i] @ G
        wts = problem.quads[i].weights
        for j in range(J):
            nodes = problem.nodes[j][i]
            s = -(nodes @ gx)
            b = -(nodes @ fg.T) / s[:, None]
            masses[j, i] = float(wts.sum())
            means[i][j] = wts @ b
            seconds[i][j] = np.einsum("l,la,lb->ab", wts, b, b)
    H = np.zeros((n, n))
    K = np.zeros((n, n))
    factor_h = []
    factor_k = []
    for i, m in enumerate(prof.dims):
        sl = slice(offsets[i], offsets[i + 1])
        S_i = np.einsum("j,jab->ab", problem.w, seconds[i])
        mass_i = float(problem.w @ masses[:, i])
        factor_h.append(S_i)
        factor_k.append(mass_i * np.eye(m) - S_i)
        H[sl, sl] = S_i / k
        K[sl, sl] = factor_k[-1] / (prof.alpha[i] * rk)
        for i2 in range(i + 1, k):
            sl2 = slice(offsets[i2], offsets[i2 + 1])
            cross = np.einsum("j,ja,jb->ab", problem.w, means[i], means[i2]) / k
            H[sl, sl2] = cross
            H[sl2, sl] = cross.T
    return FormPair(
        H=(H + H.T) / 2,
        K=(K + K.T) / 2,
        factor_h=tuple(factor_h),
        factor_k=tuple(factor_k),
        masses=masses,
        frames=tuple(frames),
    )


# -- sampling helpers ------------------------------------------------------


def random_configuration(
    rng: np.random.Generator,
    profile: ScalingProfile,
    n_atoms: int,
    spread: float = 1.5,
) -> WeightedConfiguration:
    """Random atoms within the given radius and Dirichlet weights."""
    from .hyperbolic import random_point

    atoms = []
    for _ in range(n_atoms):
        atoms.append(
            ProductPoint(
                tuple(random_point(rng, m, spread) for m in profile.dims)
            )
        )
    w = rng.dirichlet(np.full(n_atoms, 2.0))
    w = w / w.sum()
    w[-1] = 1.0 - float(sum(w[:-1].tolist()))
    return WeightedConfiguration(tuple(atoms), tuple(w), profile)
