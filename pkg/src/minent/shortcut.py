"""Shortcut metrics on the radial quarter-plane.

A product of two pointed hyperbolic factors, restricted to paths with
frozen angular coordinates, is the Euclidean quarter-plane in the
radial coordinates (r1, r2).  The shortcut model places a segment in
that plane along which travel in a designated cheap direction costs
sqrt(eta) per unit length, eta in (0, 1].  This module computes the
induced path metric on a grid, the turning-angle condition for
minimizers meeting a cheap line, volume growth of metric balls under
the radial density sinh^(n-1)(r1) sinh^(n-1)(r2), the diagonal region
on which the shortcut does not shorten anything, and the reflection
construction producing two distinct minimizers that share a segment.

Grid metric.  Distances come from Dijkstra on a grid graph whose moves
are the primitive integer vectors of infinity-norm at most 3 (40
directions).  The worst-case metric distortion of that stencil is
sec(theta_gap / 2) - 1 with theta_gap = atan(1/3), about 1.3 percent;
the model measures the distortion on its own grid once and every
tolerance folds it in.  A plain 8-neighbor stencil distorts by up to
8 percent, which would drown the effects measured here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _dijkstra

from .products import GrowthEstimate

__all__ = [
    "ShortcutModel",
    "CornerPath",
    "Witness",
    "RegionReport",
    "BranchingReport",
    "turning_angle_threshold",
    "shorter_path_witness",
    "d_eta_reduced",
    "extract_grid_path",
    "r_c_verify",
    "eta_entropy_estimate",
    "branching_geodesic_demo",
    "corner_path_between",
]

# Primitive moves with infinity-norm <= 3, one per undirected direction.
_HALF_STENCIL = tuple(
    (dx, dy)
    for dx in range(-3, 4)
    for dy in range(-3, 4)
    if (dx, dy) != (0, 0)
    and math.gcd(abs(dx), abs(dy)) == 1
    and (dx > 0 or (dx == 0 and dy > 0))
)

# Largest angular gap between adjacent stencil directions.
ANGULAR_RESOLUTION = math.atan(1.0 / 3.0)


@dataclass(frozen=True)
class ShortcutModel:
    """Quarter-plane grid with one cheap segment.

    n            dimension of each hyperbolic factor (enters only the
                 volume density sinh^(n-1)).
    eta          cost multiplier squared along the segment: movement in
                 the cheap direction costs sqrt(eta) per unit length.
    segment      (r1_lo, r1_hi, offset): the segment spans r1 in
                 [r1_lo, r1_hi].  Horizontal orientation puts it at
                 height r2 = offset with cheap direction (1, 0);
                 diagonal orientation puts it on the line
                 r2 = r1 + offset with cheap direction (1, 1)/sqrt(2).
    spacing      grid spacing delta, at most 0.05.
    extent       the grid covers [0, extent]^2.

    The off-diagonal horizontal default exercises the turning-angle and
    diagonal-region statements; the diagonal orientation feeds the
    growth sweeps, where the cheap direction must carry the dominant
    volume for the discount to move the measured rate.
    """

    n: int = 3
    eta: float = 1.0
    segment: tuple[float, float, float] = (2.0, 6.0, 1.0)
    spacing: float = 0.05
    extent: float = 12.0
    orientation: str = "horizontal"

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("factor dimension must be at least 3")
        if not (0.0 < self.eta <= 1.0):
            raise ValueError("eta must lie in (0, 1]")
        if self.spacing > 0.05 or self.spacing <= 0:
            raise ValueError("grid spacing must lie in (0, 0.05]")
        if self.orientation not in ("horizontal", "diagonal"):
            raise ValueError("orientation must be horizontal or diagonal")
        lo, hi, off = self.segment
        if self.orientation == "horizontal":
            inside = 0.0 <= lo < hi <= self.extent and 0.0 <= off <= self.extent
        else:
            inside = (
                0.0 <= lo < hi <= self.extent
                and 0.0 <= lo + off
                and hi + off <= self.extent
            )
        if not inside:
            raise ValueError("segment must lie within the grid extent")
        if abs(off / self.spacing - round(off / self.spacing)) > 1e-9:
            raise ValueError("segment offset must lie on the grid")

    @property
    def cheap_direction(self) -> tuple[float, float]:
        if self.orientation == "horizontal":
            return (1.0, 0.0)
        r = math.sqrt(0.5)
        return (r, r)

    @property
    def side(self) -> int:
        return int(round(self.extent / self.spacing)) + 1

    def line_frame(self):
        """Support line of the segment: (origin, unit along, unit
        normal, length along)."""
        lo, hi, off = self.segment
        if self.orientation == "horizontal":
            origin = np.array([lo, off])
            along = np.array([1.0, 0.0])
            length = hi - lo
        else:
            origin = np.array([lo, lo + off])
            along = np.array([1.0, 1.0]) / math.sqrt(2.0)
            length = (hi - lo) * math.sqrt(2.0)
        normal = np.array([-along[1], along[0]])
        return origin, along, normal, length


@dataclass(frozen=True)
class CornerPath:
    """Piecewise-linear path with per-segment cost multipliers."""

    vertices: tuple[tuple[float, float], ...]
    multipliers: tuple[float, ...]
    total_length: float
    turning_angles: tuple[float, ...]

    def __post_init__(self):
        if len(self.vertices) < 2:
            raise ValueError("a path needs at least two vertices")
        if len(self.multipliers) != len(self.vertices) - 1:
            raise ValueError("one multiplier per segment")
        v = np.asarray(self.vertices, dtype=float)
        seg = np.diff(v, axis=0)
        lengths = np.hypot(seg[:, 0], seg[:, 1])
        total = float(np.dot(lengths, self.multipliers))
        if abs(total - self.total_length) > 1e-12 * max(1.0, total):
            raise ValueError("total length does not match the segments")
        for a in self.turning_angles:
            if not (0.0 <= a <= math.pi + 1e-12):
                raise ValueError("turning angles must lie in [0, pi]")

    @classmethod
    def from_vertices(cls, vertices, multipliers) -> "CornerPath":
        v = np.asarray(vertices, dtype=float)
        seg = np.diff(v, axis=0)
        lengths = np.hypot(seg[:, 0], seg[:, 1])
        mult = np.asarray(multipliers, dtype=float)
        total = float(np.dot(lengths, mult))
        angles = []
        for s in range(len(seg) - 1):
            a, b = seg[s], seg[s + 1]
            na, nb = np.hypot(*a), np.hypot(*b)
            if na == 0 or nb == 0:
                angles.append(0.0)
                continue
            c = float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))
            angles.append(math.acos(c))
        return cls(
            vertices=tuple(map(tuple, v.tolist())),
            multipliers=tuple(mult.tolist()),
            total_length=total,
            turning_angles=tuple(angles),
        )


class _GridEngine:
    """Sparse graph for one model, with cached distance fields."""

    def __init__(self, model: ShortcutModel):
        self.model = model
        N = model.side
        self.N = N
        d = model.spacing
        rows, cols, costs = [], [], []
        lo, hi, off = model.segment
        j_off = int(round(off / d))
        i_lo = int(math.ceil(lo / d - 1e-9))
        i_hi = int(math.floor(hi / d + 1e-9))
        cheap_move = (1, 0) if model.orientation == "horizontal" else (1, 1)
        root_eta = math.sqrt(model.eta)
        for dx, dy in _HALF_STENCIL:
            i0, i1 = max(0, -dx), N - max(0, dx)
            j0, j1 = max(0, -dy), N - max(0, dy)
            ii, jj = np.meshgrid(
                np.arange(i0, i1), np.arange(j0, j1), indexing="ij"
            )
            src = ii * N + jj
            dst = (ii + dx) * N + (jj + dy)
            cost = d * math.hypot(dx, dy)
            w = np.full(src.size, cost)
            if (dx, dy) == cheap_move:
                if model.orientation == "horizontal":
                    on_seg = (jj == j_off) & (ii >= i_lo) & (ii + 1 <= i_hi)
                else:
                    on_seg = (jj - ii == j_off) & (ii >= i_lo) & (ii + 1 <= i_hi)
                w[on_seg.ravel()] = root_eta * cost
            rows.append(src.ravel())
            cols.append(dst.ravel())
            costs.append(w)
        self.graph = csr_matrix(
            (np.concatenate(costs), (np.concatenate(rows), np.concatenate(cols))),
            shape=(N * N, N * N),
        )
        self._fields: dict[int, np.ndarray] = {}
        self._preds: dict[int, np.ndarray] = {}
        self._slack: float | None = None

    def node_of(self, point) -> int:
        d = self.model.spacing
        i = int(round(point[0] / d))
        j = int(round(point[1] / d))
        if not (0 <= i < self.N and 0 <= j < self.N):
            raise ValueError(
                f"point {tuple(point)} lies outside the grid extent "
                f"[0, {self.model.extent}]"
            )
        return i * self.N + j

    def coords(self, flat: np.ndarray) -> np.ndarray:
        d = self.model.spacing
        return np.stack([(flat // self.N) * d, (flat % self.N) * d], axis=-1)

    def field(self, src: int, predecessors: bool = False) -> np.ndarray:
        if predecessors and src not in self._preds:
            dist, pred = _dijkstra(
                self.graph, directed=False, indices=src, return_predecessors=True
            )
            self._fields[src] = dist
            self._preds[src] = pred
        elif src not in self._fields:
            self._fields[src] = _dijkstra(self.graph, directed=False, indices=src)
        return self._fields[src]

    def predecessors(self, src: int) -> np.ndarray:
        self.field(src, predecessors=True)
        return self._preds[src]

    def slack(self) -> float:
        """Measured stencil distortion: max over grid nodes at radius
        at least 2 of grid distance over Euclidean distance, minus 1,
        on the shortcut-free graph."""
        if self._slack is None:
            base = ShortcutModel(
                n=self.model.n,
                eta=1.0,
                segment=(0.0, 1.0, 0.0),
                spacing=self.model.spacing,
                extent=min(self.model.extent, 6.0),
            )
            eng = _GridEngine(base)
            origin = eng.node_of((0.0, 0.0))
            dist = eng.field(origin)
            pts = eng.coords(np.arange(eng.N * eng.N))
            euclid = np.hypot(pts[:, 0], pts[:, 1])
            mask = euclid >= 2.0
            self._slack = float((dist[mask] / euclid[mask]).max() - 1.0)
        return self._slack


_ENGINES: dict[ShortcutModel, _GridEngine] = {}


def _engine(model: ShortcutModel) -> _GridEngine:
    if model not in _ENGINES:
        if len(_ENGINES) > 8:
            _ENGINES.clear()
        _ENGINES[model] = _GridEngine(model)
    return _ENGINES[model]


def metric_slack(model: ShortcutModel) -> float:
    """Measured stencil distortion of the model's grid, from the
    shortcut-free reference graph at the same spacing."""
    return _engine(model).slack()


# -- turning angles and the corner witness ---------------------------------


def turning_angle_threshold(eta: float) -> float:
    """Largest corner angle a minimizer can have where a line of cost
    eta is available: arccos(eta)."""
    if not (0.0 < eta < 1.0):
        raise ValueError("eta must lie strictly between 0 and 1")
    return math.acos(eta)


@dataclass(frozen=True)
class Witness:
    theta: float
    corner: tuple[float, float]
    start: tuple[float, float]
    end: tuple[float, float]
    savings: float


def shorter_path_witness(eta: float, alpha: float) -> Witness | None:
    """Explicit shortcut through a corner of angle alpha, if one exists.

    A path runs one unit into the corner A and leaves along a line of
    cost eta at angle alpha.  Cutting the corner at angle theta from
    the incoming direction beats the cornered path exactly when

        f(theta) = cos(alpha) + sin(alpha) tan(theta / 2) < eta,

    which has solutions in (0, alpha) iff cos(alpha) < eta.  Returns
    the cut with f at the midpoint between cos(alpha) and eta, with the
    start point P, the cut target Q on the cheap line, and the strict
    savings |PA| + eta |AQ| - |PQ| > 0.  Returns None when
    cos(alpha) >= eta.
    """
    if not (0.0 < alpha < math.pi / 2):
        raise ValueError("the corner angle must lie in (0, pi/2)")
    if not (0.0 < eta <= 1.0):
        raise ValueError("eta must lie in (0, 1]")
    ca, sa = math.cos(alpha), math.sin(alpha)
    if ca >= eta:
        return None
    t_mid = (eta - ca) / (2.0 * sa)
    theta = 2.0 * math.atan(t_mid)
    # Triangle P -> A -> Q, P one unit before the corner, exit angle
    # alpha, cut angle theta at P; law of sines fixes the lengths.
    P = (-1.0, 0.0)
    A = (0.0, 0.0)
    aq = math.sin(theta) / math.sin(alpha - theta)
    Q = (aq * ca, aq * sa)
    pq = math.hypot(Q[0] - P[0], Q[1] - P[1])
    savings = 1.0 + eta * aq - pq
    if savings <= 0.0:
        return None
    return Witness(theta=theta, corner=A, start=P, end=Q, savings=savings)


# -- grid metric -----------------------------------------------------------


def d_eta_reduced(model: ShortcutModel, a, b) -> float:
    """Shortest-path distance between the grid nodes nearest a and b."""
    eng = _engine(model)
    na, nb = eng.node_of(a), eng.node_of(b)
    if na == nb:
        return 0.0
    if na in eng._fields:
        return float(eng.field(na)[nb])
    if nb in eng._fields:
        return float(eng.field(nb)[na])
    return float(eng.field(na)[nb])


def extract_grid_path(model: ShortcutModel, a, b) -> CornerPath:
    """Minimizing grid path a -> b as a corner path, with multipliers
    read off the graph edge costs."""
    eng = _engine(model)
    na, nb = eng.node_of(a), eng.node_of(b)
    pred = eng.predecessors(na)
    chain = [nb]
    while chain[-1] != na:
        p = pred[chain[-1]]
        if p < 0:
            raise ValueError("no path between the requested points")
        chain.append(int(p))
    chain.reverse()
    verts = eng.coords(np.array(chain))
    mults = []
    d = model.spacing
    for u, v in zip(chain[:-1], chain[1:]):
        w = eng.graph[u, v]
        if w == 0.0:
            w = eng.graph[v, u]
        seg = math.dist(eng.coords(np.array([u]))[0], eng.coords(np.array([v]))[0])
        mults.append(float(w) / seg)
    # merge collinear same-cost steps so turning angles are meaningful
    keep = [0]
    for s in range(1, len(verts) - 1):
        prev = verts[s] - verts[keep[-1]]
        nxt = verts[s + 1] - verts[s]
        cross = prev[0] * nxt[1] - prev[1] * nxt[0]
        if abs(cross) > 1e-12 or abs(mults[s] - mults[s - 1]) > 1e-12:
            keep.append(s)
    keep.append(len(verts) - 1)
    kept_mults = [mults[s] for s in keep[:-1]]
    return CornerPath.from_vertices(verts[keep], kept_mults)


# -- diagonal region -------------------------------------------------------


@dataclass(frozen=True)
class RegionReport:
    c: float
    samples: int
    equal_within_slack: bool
    max_ratio_defect: float
    c_max: float
    violations: tuple[tuple[float, float], ...]


def r_c_verify(
    model: ShortcutModel,
    c: float,
    samples: int = 200,
    radius_lo: float = 1.0,
    radius_hi: float | None = None,
    slack_margin: float | None = None,
) -> RegionReport:
    """Check that the shortcut does not shorten distances from the
    origin inside the diagonal wedge |angle - pi/4| <= c.

    For sampled x in the wedge, asserts grid distance >= Euclidean
    times (1 - slack_margin); failures are collected, not raised.
    Also reports c_max: the widest wedge (on the sampled angle grid)
    with no failure anywhere inside.
    """
    if c <= 0:
        raise ValueError("the wedge half-width c must be positive")
    eng = _engine(model)
    slack = eng.slack() if slack_margin is None else slack_margin
    if radius_hi is None:
        radius_hi = 0.75 * model.extent
    origin = eng.node_of((0.0, 0.0))
    dist = eng.field(origin)
    n_ang = max(int(np.sqrt(samples)) * 2, 16)
    n_rad = max(samples // n_ang, 4)
    # coarse full-quadrant sweep plus a fine band across the wedge, so
    # the wedge always holds samples and c_max is measured, not clipped
    band = np.clip(
        np.linspace(math.pi / 4 - c, math.pi / 4 + c, 9),
        0.02,
        math.pi / 2 - 0.02,
    )
    angles = np.unique(
        np.concatenate(
            [np.linspace(0.02, math.pi / 2 - 0.02, n_ang), band]
        )
    )
    n_ang = angles.size
    radii = np.linspace(radius_lo, radius_hi, n_rad)
    ratio_defect = np.zeros(n_ang)
    for ai, ang in enumerate(angles):
        worst = 0.0
        for r in radii:
            x = (r * math.cos(ang), r * math.sin(ang))
            node = eng.node_of(x)
            snapped = eng.coords(np.array([node]))[0]
            euclid = math.hypot(snapped[0], snapped[1])
            if euclid < radius_lo / 2:
                continue
            defect = 1.0 - float(dist[node]) / euclid
            worst = max(worst, defect)
        ratio_defect[ai] = worst
    in_wedge = np.abs(angles - math.pi / 4) <= c + 1e-12
    bad = ratio_defect > slack
    violations = []
    for ai in np.nonzero(in_wedge & bad)[0]:
        violations.append((float(angles[ai]), float(ratio_defect[ai])))
    # widest clean wedge around the diagonal on this angle grid
    c_max = float(np.abs(angles - math.pi / 4).max())
    for ai in np.nonzero(bad)[0]:
        c_max = min(c_max, abs(float(angles[ai]) - math.pi / 4))
    return RegionReport(
        c=c,
        samples=int(n_ang * n_rad),
        equal_within_slack=not violations,
        max_ratio_defect=float(ratio_defect[in_wedge].max()),
        c_max=c_max,
        violations=tuple(violations),
    )


# -- volume growth ---------------------------------------------------------


def eta_entropy_estimate(
    model: ShortcutModel,
    radius_lo: float,
    radius_hi: float,
    rho_step: float = 0.25,
) -> GrowthEstimate:
    """Least-squares slope of log V(rho), where V(rho) is the mass of
    the grid ball of radius rho around the origin under the density
    sinh^(n-1)(r1) sinh^(n-1)(r2).

    Cell masses accumulate in the log domain, sorted by grid distance,
    so sinh overflow never occurs.
    """
    if not (0 < radius_lo < radius_hi):
        raise ValueError("need 0 < radius_lo < radius_hi")
    if radius_hi > model.extent:
        raise ValueError("radius range exceeds the grid extent")
    eng = _engine(model)
    origin = eng.node_of((0.0, 0.0))
    dist = eng.field(origin)
    pts = eng.coords(np.arange(eng.N * eng.N))
    p = model.n - 1
    with np.errstate(divide="ignore"):
        log_mass = (
            2.0 * math.log(model.spacing)
            + p * np.log(np.sinh(pts[:, 0]))
            + p * np.log(np.sinh(pts[:, 1]))
        )
    finite = np.isfinite(log_mass)
    dist, log_mass = dist[finite], log_mass[finite]
    order = np.argsort(dist)
    dist = dist[order]
    cum = np.logaddexp.accumulate(log_mass[order])
    rho = np.arange(radius_lo, radius_hi + 1e-9, rho_step)
    idx = np.searchsorted(dist, rho, side="right") - 1
    if np.any(idx < 0):
        raise ValueError("radius range starts below the first occupied cell")
    log_v = cum[idx]
    A = np.stack([rho, np.ones_like(rho)], axis=1)
    coef, *_ = np.linalg.lstsq(A, log_v, rcond=None)
    resid = log_v - A @ coef
    return GrowthEstimate(
        slope=float(coef[0]),
        intercept=float(coef[1]),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        rho=rho,
        log_volume=log_v,
        method="shortcut-grid",
    )


# -- branching minimizers --------------------------------------------------


@dataclass(frozen=True)
class BranchingReport:
    used: bool
    path: CornerPath | None
    reflected_path: CornerPath | None
    straight_length: float
    shared_segment: tuple[tuple[float, float], tuple[float, float]] | None
    shared_length: float
    length_difference: float


def corner_path_between(model: ShortcutModel, p, q) -> CornerPath | None:
    """Optimal path p -> q through the cheap segment, or None if the
    straight line is at least as good.

    Entry and exit obey the refraction rule: the offset from the foot
    of the perpendicular is h sqrt(eta / (1 - eta)) for clearance h, as
    the one-dimensional optimization gives; offsets are clamped to the
    segment ends.
    """
    if model.eta >= 1.0:
        return None
    origin, along, normal, length_total = model.line_frame()
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    sp, sq = float((p - origin) @ along), float((q - origin) @ along)
    if sp > sq:
        p, q = q, p
        sp, sq = sq, sp
    hp = abs(float((p - origin) @ normal))
    hq = abs(float((q - origin) @ normal))
    mu = math.sqrt(model.eta)
    shift = math.sqrt(model.eta / (1.0 - model.eta))
    u = min(max(sp + hp * shift, 0.0), length_total)
    v = min(max(sq - hq * shift, 0.0), length_total)
    if v <= u:
        return None
    entry = origin + u * along
    leave = origin + v * along
    length = (
        math.dist(p, entry) + mu * (v - u) + math.dist(leave, q)
    )
    if length >= math.dist(p, q):
        return None
    return CornerPath.from_vertices(
        [tuple(p), tuple(entry), tuple(leave), tuple(q)], [1.0, mu, 1.0]
    )


def branching_geodesic_demo(model: ShortcutModel, p, q) -> BranchingReport:
    """Two distinct minimizers of equal length through the shared
    cheap segment: the optimal corner path for (p, q) and the one for
    the pair reflected across the segment's line.

    If the straight line beats every corner path the report comes back
    with used=False (inconclusive), not an error.
    """
    origin, along, normal, _ = model.line_frame()
    straight = math.dist(p, q)
    path = corner_path_between(model, p, q)
    if path is None:
        return BranchingReport(
            used=False,
            path=None,
            reflected_path=None,
            straight_length=straight,
            shared_segment=None,
            shared_length=0.0,
            length_difference=float("nan"),
        )
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    p_ref = tuple(p - 2.0 * float((p - origin) @ normal) * normal)
    q_ref = tuple(q - 2.0 * float((q - origin) @ normal) * normal)
    ref = corner_path_between(model, p_ref, q_ref)
    if ref is None:
        return BranchingReport(
            used=False,
            path=path,
            reflected_path=None,
            straight_length=straight,
            shared_segment=None,
            shared_length=0.0,
            length_difference=float("nan"),
        )
    seg = (path.vertices[1], path.vertices[2])
    shared = math.dist(seg[0], seg[1])
    return BranchingReport(
        used=True,
        path=path,
        reflected_path=ref,
        straight_length=straight,
        shared_segment=seg,
        shared_length=shared,
        length_difference=abs(path.total_length - ref.total_length),
    )
