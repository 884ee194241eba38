"""Finite metric spaces, nets, net graphs, and Gromov-Hausdorff bounds.

The stability argument approximates a manifold by a graph: choose an
epsilon-net, join net points whose images are closer than epsilon,
assign each edge its target distance, and compare the graph metric
with the target metric.  This module provides that pipeline on finite
metric spaces, plus distortion-based GH distance bounds, epsilon
isometry certification, and an exact bounded-Lipschitz comparison of
weighted spaces.

Everything here is synthetic: edge lengths are assigned numbers, not
lengths of realizable paths in a manifold.  The graph construction and
the two-sided approximation check mirror the continuum argument; the
correspondence is a modeling choice, not a theorem.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

__all__ = [
    "FiniteMetricSpace",
    "NetGraph",
    "Correspondence",
    "GraphMetricResult",
    "IsometryCheck",
    "greedy_net",
    "build_net_graph",
    "graph_metric",
    "approximation_check",
    "ApproximationReport",
    "gh_bounds",
    "epsilon_isometry_check",
    "measure_compare",
    "circle_space",
    "torus_grid_space",
    "random_tree_space",
    "read_space_csv",
    "write_space_csv",
]

_EXACT_CAP = 9


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Distance matrix with optional weights.

    Validates the metric axioms up front, so downstream code never
    re-checks: zero diagonal, symmetry, triangle inequality within
    1e-9, weights a probability vector.
    """

    dist: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        d = np.asarray(self.dist, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError("distance matrix must be square")
        n = d.shape[0]
        if n == 0:
            raise ValueError("empty space")
        if np.abs(np.diag(d)).max() > 0:
            raise ValueError("diagonal must be zero")
        if np.abs(d - d.T).max() > 1e-12:
            raise ValueError("distance matrix must be symmetric")
        if d.min() < 0:
            raise ValueError("distances must be nonnegative")
        # triangle inequality: d_ij <= min_k (d_ik + d_kj)
        via = (d[:, :, None] + d[None, :, :]).min(axis=1)
        if (d - via).max() > 1e-9:
            raise ValueError("triangle inequality violated beyond 1e-9")
        object.__setattr__(self, "dist", d)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (n,) or w.min() < 0 or abs(w.sum() - 1.0) > 1e-9:
                raise ValueError("weights must be a probability vector")
            object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return self.dist.shape[0]

    @property
    def diameter(self) -> float:
        return float(self.dist.max())

    def effective_weights(self) -> np.ndarray:
        if self.weights is not None:
            return self.weights
        return np.full(self.size, 1.0 / self.size)

    def restrict(self, idx) -> "FiniteMetricSpace":
        idx = np.asarray(idx, dtype=int)
        w = None
        if self.weights is not None:
            w = self.weights[idx]
            w = w / w.sum()
        return FiniteMetricSpace(self.dist[np.ix_(idx, idx)], w)


@dataclass
class NetGraph:
    """Graph on net vertices with assigned edge lengths.

    Every edge length L must satisfy the strict interval
    max{0, d - eps/n_count} < L < d + delta, with d the target
    distance of the edge's endpoint images.
    """

    vertices: tuple[int, ...]
    edges: list[tuple[int, int, float]]
    target_dist: np.ndarray
    eps: float
    delta: float
    n_count: int

    def interval_violations(self) -> list[tuple[int, int, float, float, float]]:
        """Edges whose length leaves the mandated open interval:
        (u, v, length, low, high)."""
        bad = []
        for u, v, length in self.edges:
            d = float(self.target_dist[u, v])
            low = max(0.0, d - self.eps / self.n_count)
            high = d + self.delta
            if not (low < length < high):
                bad.append((u, v, length, low, high))
        return bad

    def validate(self):
        bad = self.interval_violations()
        if bad:
            u, v, length, low, high = bad[0]
            raise ValueError(
                f"edge ({u},{v}) length {length} outside its interval "
                f"({low}, {high})"
            )


@dataclass(frozen=True)
class Correspondence:
    """Relation between index sets, covering both sides."""

    pairs: tuple[tuple[int, int], ...]
    size_x: int
    size_y: int

    def __post_init__(self):
        left = {p[0] for p in self.pairs}
        right = {p[1] for p in self.pairs}
        if left != set(range(self.size_x)) or right != set(range(self.size_y)):
            raise ValueError("correspondence must cover both index sets")

    def distortion(self, dx: np.ndarray, dy: np.ndarray) -> float:
        ps = np.array(self.pairs)
        xi, yi = ps[:, 0], ps[:, 1]
        return float(
            np.abs(dx[np.ix_(xi, xi)] - dy[np.ix_(yi, yi)]).max()
        )


# -- nets and graphs -------------------------------------------------------


def greedy_net(X: FiniteMetricSpace, eps: float) -> tuple[int, ...]:
    """Greedy epsilon-net: start at index 0 and repeatedly add, among
    the points at distance >= eps from the chosen set, the one closest
    to it (lowest index on ties).

    The result is eps-separated by construction and eps-covering
    because the loop only stops when no admissible point remains.
    Taking the nearest admissible point packs the net at its maximin
    density: separations sit just above eps instead of the sparse
    far-point cascade, which roughly halves the count.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    chosen = [0]
    d_to_set = X.dist[0].copy()
    while True:
        admissible = d_to_set >= eps
        if not admissible.any():
            break
        cand = np.where(admissible, d_to_set, np.inf)
        nxt = int(np.argmin(cand))
        chosen.append(nxt)
        d_to_set = np.minimum(d_to_set, X.dist[nxt])
    return tuple(chosen)


def build_net_graph(
    net,
    phi,
    target: FiniteMetricSpace,
    eps: float,
    delta: float,
    n_count: int,
) -> NetGraph:
    """Connect net vertices whose phi-images are closer than eps in the
    target; each edge gets the target distance as its length.

    The construction precondition is
    delta < min(eps / 4, eps^2 / (6 diam(target))); violating it is an
    error, since the two-sided approximation argument needs it.

    The target distance always lies strictly inside the mandated
    interval, which makes the approximation checks as sharp as this
    family of graphs allows.
    """
    net = tuple(net)
    phi = tuple(phi)
    if len(phi) != len(net):
        raise ValueError("need one target image per net vertex")
    diam = target.diameter
    bound = min(eps / 4.0, eps * eps / (6.0 * diam)) if diam > 0 else eps / 4.0
    if not (0.0 < delta < bound):
        raise ValueError(
            f"delta = {delta} violates the construction precondition "
            f"delta < min(eps/4, eps^2/(6 diam)) = {bound}"
        )
    if n_count <= 0:
        raise ValueError("n_count must be positive")
    edges = []
    td = target.dist
    for a in range(len(net)):
        for b in range(a + 1, len(net)):
            d = float(td[phi[a], phi[b]])
            if d < eps:
                edges.append((a, b, d))
    sub = td[np.ix_(phi, phi)]
    graph = NetGraph(
        vertices=net,
        edges=edges,
        target_dist=sub,
        eps=eps,
        delta=delta,
        n_count=n_count,
    )
    graph.validate()
    return graph


@dataclass(frozen=True)
class GraphMetricResult:
    matrix: np.ndarray
    connected: bool
    components: int

    def space(self) -> FiniteMetricSpace:
        if not self.connected:
            raise ValueError("graph is disconnected; no finite metric")
        return FiniteMetricSpace(self.matrix)


def graph_metric(G: NetGraph) -> GraphMetricResult:
    """All-pairs shortest path lengths of the net graph."""
    n = len(G.vertices)
    if G.edges:
        rows = np.array([e[0] for e in G.edges])
        cols = np.array([e[1] for e in G.edges])
        vals = np.array([e[2] for e in G.edges])
        sp = csr_matrix((vals, (rows, cols)), shape=(n, n))
    else:
        sp = csr_matrix((n, n))
    ncomp, _ = connected_components(sp, directed=False)
    mat = dijkstra(sp, directed=False)
    mat = np.minimum(mat, mat.T)
    np.fill_diagonal(mat, 0.0)
    return GraphMetricResult(matrix=mat, connected=(ncomp == 1), components=ncomp)


@dataclass(frozen=True)
class ApproximationReport:
    max_deviation: float
    passed: bool
    step1_max: float
    step2_max: float
    connected: bool
    interval_ok: bool


def approximation_check(
    G: NetGraph, phi, target: FiniteMetricSpace, eps: float
) -> ApproximationReport:
    """Two-sided comparison of the graph metric with the target metric
    on the net: step 1 is d_graph <= d_target + eps, step 2 is
    d_graph >= d_target - eps; pass iff the max deviation is <= eps.

    Edge intervals are re-validated first; a violated interval fails
    the check regardless of the metric comparison.
    """
    interval_ok = not G.interval_violations()
    res = graph_metric(G)
    phi = tuple(phi)
    sub = target.dist[np.ix_(phi, phi)]
    if not res.connected:
        return ApproximationReport(
            max_deviation=float("inf"),
            passed=False,
            step1_max=float("inf"),
            step2_max=float("inf"),
            connected=False,
            interval_ok=interval_ok,
        )
    diff = res.matrix - sub
    step1 = float(diff.max())   # graph exceeding target
    step2 = float((-diff).max())  # target exceeding graph
    dev = float(np.abs(diff).max())
    return ApproximationReport(
        max_deviation=dev,
        passed=bool(interval_ok and dev <= eps),
        step1_max=step1,
        step2_max=step2,
        connected=True,
        interval_ok=interval_ok,
    )


# -- GH distance bounds ----------------------------------------------------


def _sorted_multiset_gap(dx: np.ndarray, dy: np.ndarray) -> float:
    iu = np.triu_indices(dx.shape[0], k=1)
    a = np.sort(dx[iu])
    iv = np.triu_indices(dy.shape[0], k=1)
    b = np.sort(dy[iv])
    if a.size != b.size:
        return 0.0
    if a.size == 0:
        return 0.0
    return float(np.abs(a - b).max())


def _pair_distortion(dx, dy, f, g) -> float:
    """Distortion of the correspondence graph(f) plus transposed
    graph(g)."""
    nx, ny = dx.shape[0], dy.shape[0]
    f = np.asarray(f)
    g = np.asarray(g)
    m = 0.0
    m = max(m, float(np.abs(dx - dy[np.ix_(f, f)]).max()))
    m = max(m, float(np.abs(dy - dx[np.ix_(g, g)]).max()))
    cross = np.abs(dx[:, g] - dy[f, :])
    m = max(m, float(cross.max()))
    return m


def _exact_upper(dx: np.ndarray, dy: np.ndarray) -> float:
    """Minimal correspondence distortion via branch and bound over map
    pairs (f: X -> Y, g: Y -> X).

    Any correspondence contains the graph of some f together with the
    transposed graph of some g, and dropping other pairs never raises
    distortion, so the minimum over map pairs is the minimum over
    correspondences.  Assignments interleave the two maps; a partial
    assignment is pruned as soon as its distortion reaches the best
    complete one.
    """
    nx, ny = dx.shape[0], dy.shape[0]
    slots = [("f", i) for i in range(nx)] + [("g", j) for j in range(ny)]
    # assign high-eccentricity points first for early pruning
    slots.sort(
        key=lambda s: -(dx[s[1]].max() if s[0] == "f" else dy[s[1]].max())
    )
    best = [_greedy_upper(dx, dy)]
    f = np.full(nx, -1, int)
    g = np.full(ny, -1, int)

    def partial_cost(side, idx, val) -> float:
        m = 0.0
        if side == "f":
            done = np.nonzero(f >= 0)[0]
            if done.size:
                m = max(m, float(np.abs(dx[idx, done] - dy[val, f[done]]).max()))
            gdone = np.nonzero(g >= 0)[0]
            if gdone.size:
                m = max(
                    m, float(np.abs(dx[idx, g[gdone]] - dy[val, gdone]).max())
                )
        else:
            done = np.nonzero(g >= 0)[0]
            if done.size:
                m = max(m, float(np.abs(dy[idx, done] - dx[val, g[done]]).max()))
            fdone = np.nonzero(f >= 0)[0]
            if fdone.size:
                m = max(
                    m, float(np.abs(dy[idx, f[fdone]] - dx[val, fdone]).max())
                )
        return m

    def rec(k: int, cur: float):
        if cur >= best[0]:
            return
        if k == len(slots):
            best[0] = cur
            return
        side, idx = slots[k]
        nvals = ny if side == "f" else nx
        cands = []
        for val in range(nvals):
            c = partial_cost(side, idx, val)
            if max(cur, c) < best[0]:
                cands.append((c, val))
        cands.sort()
        for c, val in cands:
            if side == "f":
                f[idx] = val
            else:
                g[idx] = val
            rec(k + 1, max(cur, c))
            if side == "f":
                f[idx] = -1
            else:
                g[idx] = -1

    rec(0, 0.0)
    return best[0]


def _greedy_upper(dx: np.ndarray, dy: np.ndarray) -> float:
    """Heuristic correspondence: match points by sorted eccentricity
    profile, then locally improve each assignment once."""
    nx, ny = dx.shape[0], dy.shape[0]
    ex = np.argsort(-dx.max(axis=1))
    ey = np.argsort(-dy.max(axis=1))
    f = np.zeros(nx, int)
    for rank, i in enumerate(ex):
        f[i] = ey[min(rank, ny - 1)]
    g = np.zeros(ny, int)
    for rank, j in enumerate(ey):
        g[j] = ex[min(rank, nx - 1)]
    for _ in range(2):
        for i in range(nx):
            costs = [
                _pair_distortion(dx, dy, np.r_[f[:i], [v], f[i + 1:]], g)
                for v in range(ny)
            ]
            f[i] = int(np.argmin(costs))
        for j in range(ny):
            costs = [
                _pair_distortion(dx, dy, f, np.r_[g[:j], [v], g[j + 1:]])
                for v in range(nx)
            ]
            g[j] = int(np.argmin(costs))
    return _pair_distortion(dx, dy, f, g)


@dataclass(frozen=True)
class GhBounds:
    lower: float
    upper: float
    exact: bool


def gh_bounds(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> GhBounds:
    """Lower and upper bounds for the Gromov-Hausdorff distance.

    lower: max of half the diameter gap and (equal sizes only) half the
    bottleneck matching gap of the sorted distance multisets.
    upper: half the minimal correspondence distortion, exact up to size
    9 per side, a labeled greedy heuristic beyond.
    """
    dx, dy = X.dist, Y.dist
    lower = abs(X.diameter - Y.diameter) / 2.0
    lower = max(lower, _sorted_multiset_gap(dx, dy) / 2.0)
    if X.size <= _EXACT_CAP and Y.size <= _EXACT_CAP:
        upper = _exact_upper(dx, dy) / 2.0
        exact = True
    else:
        upper = _greedy_upper(dx, dy) / 2.0
        exact = False
    if exact and upper < lower:
        # both routes are exact-side bounds; a crossing would be a bug
        raise AssertionError(
            f"lower bound {lower} exceeds exact upper bound {upper}"
        )
    return GhBounds(lower=float(lower), upper=float(upper), exact=exact)


@dataclass(frozen=True)
class IsometryCheck:
    passed: bool
    distortion: float
    covering_radius: float
    witness: tuple[int, int] | None


def epsilon_isometry_check(
    f, X: FiniteMetricSpace, Y: FiniteMetricSpace, eps: float
) -> IsometryCheck:
    """f is an eps-isometry iff its metric distortion is at most eps
    and its image is an eps-net of Y."""
    f = np.asarray(tuple(f), dtype=int)
    if f.shape != (X.size,):
        raise ValueError("f must assign a target index to every point of X")
    diff = np.abs(X.dist - Y.dist[np.ix_(f, f)])
    distortion = float(diff.max())
    witness = None
    if distortion > eps:
        i, j = np.unravel_index(int(np.argmax(diff)), diff.shape)
        witness = (int(i), int(j))
    covering = float(Y.dist[:, np.unique(f)].min(axis=1).max())
    return IsometryCheck(
        passed=bool(distortion <= eps and covering <= eps),
        distortion=distortion,
        covering_radius=covering,
        witness=witness,
    )


# -- weighted comparison ---------------------------------------------------


def measure_compare(
    X: FiniteMetricSpace,
    Y: FiniteMetricSpace | None = None,
    mapping=None,
) -> float:
    """Exact bounded-Lipschitz discrepancy between the weights of X and
    the weights of Y pushed onto X's index set.

    sup { sum_i f_i (mu_i - nu_i) : |f_i - f_j| <= d_ij }, a linear
    program solved exactly; on a connected finite space this equals the
    first Wasserstein distance.  Y defaults to X (same support,
    different weights); otherwise `mapping` sends Y's indices into X's.
    """
    mu = X.effective_weights()
    if Y is None:
        raise ValueError("need a second weighted space or weight vector")
    if mapping is None:
        if Y.size != X.size:
            raise ValueError("sizes differ; provide a mapping into X")
        mapping = np.arange(X.size)
    mapping = np.asarray(mapping, dtype=int)
    nu = np.zeros(X.size)
    np.add.at(nu, mapping, Y.effective_weights())
    n = X.size
    delta = mu - nu
    if np.abs(delta).max() == 0.0:
        return 0.0
    # maximize delta @ f subject to f_i - f_j <= d_ij for all ordered pairs
    rows = []
    rhs = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            row = np.zeros(n)
            row[i], row[j] = 1.0, -1.0
            rows.append(row)
            rhs.append(X.dist[i, j])
    res = linprog(
        -delta,
        A_ub=np.array(rows),
        b_ub=np.array(rhs),
        bounds=[(None, None)] * n,
        method="highs",
    )
    if not res.success:
        raise RuntimeError(f"discrepancy LP failed: {res.message}")
    return float(-res.fun)


# -- sample spaces ---------------------------------------------------------


def circle_space(
    n: int, radius: float = 1.0, metric: str = "geodesic"
) -> FiniteMetricSpace:
    """n equally spaced points on a circle, geodesic (arc length) or
    chord metric."""
    ang = 2.0 * math.pi * np.arange(n) / n
    gap = np.abs(ang[:, None] - ang[None, :])
    gap = np.minimum(gap, 2.0 * math.pi - gap)
    if metric == "geodesic":
        d = radius * gap
    elif metric == "chord":
        d = 2.0 * radius * np.sin(gap / 2.0)
    else:
        raise ValueError("metric must be geodesic or chord")
    return FiniteMetricSpace(d)


def torus_grid_space(a: int, b: int, lx: float = 1.0, ly: float = 1.0) -> FiniteMetricSpace:
    """a x b grid on the flat torus of circumferences lx, ly, with the
    quotient Euclidean metric."""
    xs = lx * np.arange(a) / a
    ys = ly * np.arange(b) / b
    px, py = np.meshgrid(xs, ys, indexing="ij")
    p = np.stack([px.ravel(), py.ravel()], axis=1)
    dx = np.abs(p[:, None, 0] - p[None, :, 0])
    dx = np.minimum(dx, lx - dx)
    dy = np.abs(p[:, None, 1] - p[None, :, 1])
    dy = np.minimum(dy, ly - dy)
    return FiniteMetricSpace(np.hypot(dx, dy))


def random_tree_space(n: int, seed: int = 0) -> FiniteMetricSpace:
    """Random tree with uniform edge lengths in [0.5, 1.5]; path metric."""
    rng = np.random.default_rng(seed)
    parent = [0] * n
    for v in range(1, n):
        parent[v] = int(rng.integers(0, v))
    lengths = rng.uniform(0.5, 1.5, size=n)
    rows = np.arange(1, n)
    cols = np.array(parent[1:])
    sp = csr_matrix((lengths[1:], (rows, cols)), shape=(n, n))
    d = dijkstra(sp, directed=False)
    return FiniteMetricSpace(d)


# -- CSV interchange -------------------------------------------------------


def write_space_csv(path, X: FiniteMetricSpace):
    """N on the first line, the N x N matrix, then an optional weight
    row prefixed with 'w'."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{X.size}\n")
        for row in X.dist:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
        if X.weights is not None:
            fh.write("w," + ",".join(f"{v:.17g}" for v in X.weights) + "\n")


def read_space_csv(path) -> FiniteMetricSpace:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty space file")
    try:
        n = int(lines[0])
    except ValueError:
        raise ValueError(f"{path}: first line must be the point count")
    if len(lines) < n + 1:
        raise ValueError(f"{path}: expected {n} matrix rows")
    rows = []
    for ln in lines[1 : n + 1]:
        vals = [float(v) for v in ln.split(",")]
        if len(vals) != n:
            raise ValueError(f"{path}: matrix row of length {len(vals)}, want {n}")
        rows.append(vals)
    weights = None
    if len(lines) > n + 1 and lines[n + 1].startswith("w"):
        weights = [float(v) for v in lines[n + 1].split(",")[1:]]
    return FiniteMetricSpace(np.array(rows), None if weights is None else np.array(weights))
