"""Statistics over sample batches and exact laws.

Every estimator accepts either a :class:`~gibbs_lattice.samplers.SampleBatch`
or an :class:`~gibbs_lattice.exact.ExactDistribution`. Exact inputs give
``stderr = 0`` and ``n = 0``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence, Union

import numpy as np

from . import kernels
from .exact import ExactDistribution, bernoulli_connectivity, connection_matrix, enumerate_measure
from .graph import Graph, GraphError
from .models import BERNOULLI, ISING, ModelError, ModelSpec, h_from_p_h, p_h_from_h
from .samplers import ChainConfig, SampleBatch, sample

Source = Union[SampleBatch, ExactDistribution]


class NoDecayError(ValueError):
    """Raised when a two-point profile does not decrease with distance."""


@dataclass(frozen=True)
class EstimateResult:
    mean: float
    stderr: float
    n: int

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("stderr must be >= 0")

    @property
    def exact(self) -> bool:
        return self.n == 0

    def within(self, target: float, sigmas: float = 3.0, floor: float = 0.0) -> bool:
        return abs(self.mean - target) <= sigmas * self.stderr + floor

    def to_json(self) -> dict:
        return asdict(self)


def pool(results: Sequence[EstimateResult]) -> EstimateResult:
    """Count-weighted pooling of estimates from disjoint shards."""
    n = sum(r.n for r in results)
    if n == 0:
        raise ValueError("nothing to pool")
    mean = sum(r.mean * r.n for r in results) / n
    # within-shard variance (from stderr) plus between-shard spread
    ss = sum((r.stderr ** 2 * r.n) * max(r.n - 1, 0) + r.n * (r.mean - mean) ** 2 for r in results)
    var = ss / max(n - 1, 1)
    return EstimateResult(mean, math.sqrt(var / n), n)


@dataclass(frozen=True)
class DecayFit:
    """Fit ``tau(r) ~ C exp(-r / xi)``."""

    C: float
    xi: float
    r2: float
    window: tuple[float, float]

    def to_json(self) -> dict:
        return {"C": self.C, "xi": self.xi, "r2": self.r2, "window": list(self.window)}


@dataclass(frozen=True)
class CriterionReport:
    """Value of the finite-size sum b(S); decay is certified when b < 1."""

    b_value: float
    satisfied: bool
    S_descriptor: str
    K: float
    d: int

    def __post_init__(self):
        if self.satisfied != (self.b_value < 1.0):
            raise ValueError("satisfied must equal b < 1")

    def to_json(self) -> dict:
        return {"b": self.b_value, "satisfied": self.satisfied, "K": self.K, "d": self.d,
                "S": self.S_descriptor}


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _rows(source: Source) -> tuple[np.ndarray, np.ndarray | None]:
    """0/1 rows and (for exact laws) their probabilities."""
    if isinstance(source, ExactDistribution):
        support = source.support
        return source.bits(support), source.probs[support]
    return source.data, None


def _graph(source: Source) -> Graph:
    g = source.graph
    if g is None:
        raise GraphError("source carries no graph")
    return g


def _kind(source: Source) -> str:
    return source.kind


def _from_values(values: np.ndarray, weights: np.ndarray | None, binary: bool) -> EstimateResult:
    values = np.asarray(values, dtype=float)
    if weights is not None:
        return EstimateResult(float(values @ weights), 0.0, 0)
    n = len(values)
    mean = float(values.mean())
    if binary:
        se = math.sqrt(max(mean * (1.0 - mean), 0.0) / n)
    else:
        se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return EstimateResult(mean, se, n)


def _check_real(g: Graph, *vertices: int):
    for v in vertices:
        if g.ghost is not None and v == g.ghost:
            raise GraphError("estimators take non-ghost endpoints")
        if not 0 <= v < g.n_vertices:
            raise GraphError(f"vertex {v} does not exist")


def connection_events(source: Source, a: int, b: int, ghost_free: bool = False) -> np.ndarray:
    """Boolean per row: are ``a`` and ``b`` joined by open edges."""
    g = _graph(source)
    bits, _ = _rows(source)
    labels = connection_matrix(g, bits, ghost_free)
    return labels[:, a] == labels[:, b]


# ---------------------------------------------------------------------------
# two-point functions
# ---------------------------------------------------------------------------

def connectivity(source: Source, a: int, b: int, ghost_free: bool = False) -> EstimateResult:
    """Probability of ``a <-> b``; with ``ghost_free`` ghost edges are masked first."""
    g = _graph(source)
    _check_real(g, a, b)
    if _kind(source) != "edge":
        raise GraphError("connectivity needs edge configurations")
    _, w = _rows(source)
    if a == b:
        return EstimateResult(1.0, 0.0, 0 if w is not None else len(source))
    return _from_values(connection_events(source, a, b, ghost_free), w, binary=True)


def _spins(source: Source) -> tuple[np.ndarray, np.ndarray | None]:
    if isinstance(source, SampleBatch):
        if source.kind == "spin":
            return source.data.astype(np.int64), None
        if source.spins is not None:
            return source.spins.astype(np.int64), None
        raise GraphError("batch carries no spins")
    if source.kind != "spin":
        raise GraphError("exact law is not a spin law")
    bits, w = _rows(source)
    s = 2 * bits.astype(np.int64) - 1
    if source.graph is not None and source.graph.ghost is not None:
        s = np.hstack([s, np.ones((len(s), 1), dtype=np.int64)])
    return s, w


def magnetization(source: Source, v: int) -> EstimateResult:
    s, w = _spins(source)
    return _from_values(s[:, v], w, binary=False)


def spin_two_point(source: Source, a: int, b: int) -> EstimateResult:
    """Mean of ``s_a s_b``."""
    _check_real(_graph(source), a, b)
    s, w = _spins(source)
    return _from_values(s[:, a] * s[:, b], w, binary=False)


def truncated(source: Source, a: int, b: int) -> EstimateResult:
    """``<s_a s_b> - <s_a><s_b>`` with delta-method error propagation."""
    _check_real(_graph(source), a, b)
    s, w = _spins(source)
    sa, sb = s[:, a].astype(float), s[:, b].astype(float)
    if w is not None:
        ma, mb = sa @ w, sb @ w
        return EstimateResult(float((sa * sb) @ w - ma * mb), 0.0, 0)
    ma, mb = sa.mean(), sb.mean()
    value = float((sa * sb).mean() - ma * mb)
    influence = sa * sb - mb * sa - ma * sb
    n = len(sa)
    se = float(influence.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return EstimateResult(value, se, n)


# ---------------------------------------------------------------------------
# correlation length
# ---------------------------------------------------------------------------

def fit_correlation_length(distances: Sequence[float], taus: Sequence[float],
                           window: tuple[float, float] | None = None) -> DecayFit:
    """Unweighted least squares of ``log tau`` against distance.

    ``xi = -1 / slope``. Needs at least three distinct distances inside the
    window; a nonnegative slope raises :class:`NoDecayError`.
    """
    r = np.asarray(distances, dtype=float)
    t = np.asarray(taus, dtype=float)
    if r.shape != t.shape:
        raise ValueError("distances and taus differ in length")
    if window is not None:
        keep = (r >= window[0]) & (r <= window[1])
        r, t = r[keep], t[keep]
    if np.any(t <= 0):
        raise ValueError("two-point values must be positive to take logarithms")
    if len(np.unique(r)) < 3:
        raise ValueError("need at least three distinct distances")
    y = np.log(t)
    slope, intercept = np.polyfit(r, y, 1)
    if slope >= 0 or not np.isfinite(slope):
        raise NoDecayError("two-point function does not decay over the window")
    resid = y - (slope * r + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    r2 = min(max(r2, 0.0), 1.0)
    return DecayFit(float(math.exp(intercept)), float(-1.0 / slope), r2, (float(r.min()), float(r.max())))


# ---------------------------------------------------------------------------
# geometric events
# ---------------------------------------------------------------------------

def _sup_norms(g: Graph, origin: int) -> np.ndarray:
    if g.embedding is None:
        raise GraphError("graph has no embedding")
    coords = np.asarray(g.embedding, dtype=np.int64)
    return np.abs(coords - coords[origin]).max(axis=1)


def _origin(g: Graph) -> int:
    d = g.dimension
    return g.vertex((0,) * d)


def reach_events(source: Source, k: int, origin: int | None = None,
                 ghost_free: bool = True) -> np.ndarray:
    """Boolean per row: ``origin <-> {x : |x - origin|_inf = k}``."""
    g = _graph(source)
    origin = _origin(g) if origin is None else origin
    dist = _sup_norms(g, origin)
    if k > dist.max():
        raise GraphError(f"radius {k} exceeds the box")
    bits, _ = _rows(source)
    if k == 0:
        return np.ones(len(bits), dtype=bool)
    labels = connection_matrix(g, bits, ghost_free)
    sphere = np.flatnonzero(dist == k)
    return (labels[:, sphere] == labels[:, [origin]]).any(axis=1)


def boundary_reach(source: Source, k: int, origin: int | None = None) -> EstimateResult:
    """Probability that the origin connects to the sphere of radius ``k``."""
    _, w = _rows(source)
    return _from_values(reach_events(source, k, origin), w, binary=True)


def crossing_events(source: Source, direction: str = "horizontal") -> np.ndarray:
    """Boolean per row: an open path joins the two opposite sides of a rectangle."""
    g = _graph(source)
    if g.dimension != 2:
        raise GraphError("crossings are defined on two-dimensional rectangles")
    axis = {"horizontal": 0, "lr": 0, "vertical": 1, "tb": 1}.get(direction)
    if axis is None:
        raise ValueError(f"unknown direction {direction!r}")
    coords = np.asarray(g.embedding, dtype=np.int64)[:, axis]
    low = np.flatnonzero(coords == coords.min())
    high = np.flatnonzero(coords == coords.max())
    bits, _ = _rows(source)
    labels = connection_matrix(g, bits, ghost_free=True)
    n = len(bits)
    hit_low = np.zeros((n, g.n_vertices), dtype=bool)
    hit_high = np.zeros((n, g.n_vertices), dtype=bool)
    rows = np.arange(n)[:, None]
    hit_low[rows, labels[:, low]] = True
    hit_high[rows, labels[:, high]] = True
    return (hit_low & hit_high).any(axis=1)


def crossing_probability(source: Source, direction: str = "horizontal") -> EstimateResult:
    _, w = _rows(source)
    return _from_values(crossing_events(source, direction), w, binary=True)


def wrap_events(source: Source, axis: int | None = None) -> np.ndarray:
    """Boolean per row: the open subgraph has a cycle winding around the torus.

    Winding is detected by union-find that records lattice displacements;
    ghost edges are ignored since they carry no displacement.
    """
    g = _graph(source)
    if g.periods is None or g.shifts is None:
        raise GraphError("wrap-around needs a torus")
    bits, _ = _rows(source)
    if g.ghost is not None:
        bits = bits.copy()
        bits[:, g.n_internal_edges:] = 0
    eu, ev = g.endpoints
    wraps = kernels.batch_windings(bits, eu, ev, np.asarray(g.shifts), g.n_vertices)
    if axis is None:
        return wraps.any(axis=1)
    return wraps[:, axis].astype(bool)


def wrap_around_probability(source: Source, axis: int | None = None) -> EstimateResult:
    """Fraction wrapping along ``axis`` (any axis when ``None``)."""
    _, w = _rows(source)
    return _from_values(wrap_events(source, axis), w, binary=True)


# ---------------------------------------------------------------------------
# finite-size criterion
# ---------------------------------------------------------------------------

def finite_size_criterion(g_S: Graph, m: ModelSpec, x0: int, K: float | None = None,
                          d: int | None = None, mode: str = "exact",
                          batch: SampleBatch | None = None,
                          chain: ChainConfig | None = None) -> CriterionReport:
    """``b(S) = sum over u in the boundary of S of 2 d K tau_S(x0, u)``.

    ``tau_S`` is the connection probability inside ``S`` with free boundary
    conditions. ``K`` defaults to ``p`` for Bernoulli percolation and ``d`` to
    the embedding dimension. ``mode="mc"`` estimates ``tau_S`` from ``batch``
    (or from a fresh run with ``chain``).
    """
    if not g_S.boundary:
        raise GraphError("the criterion needs a boundary set")
    if x0 not in g_S.real_vertices:
        raise GraphError("x0 is not a vertex of S")
    if K is None:
        if m.tag != BERNOULLI:
            raise ModelError("K has no default outside Bernoulli percolation")
        K = m.p
    d = g_S.dimension if d is None else d
    if d is None:
        raise GraphError("dimension unknown; pass d")
    if m.tag == ISING:
        raise ModelError("the criterion is stated for percolation models")
    targets = sorted(g_S.boundary)
    if mode == "exact":
        if m.tag == BERNOULLI:
            taus = [bernoulli_connectivity(g_S, m.p, x0, u) for u in targets]
        else:
            law = enumerate_measure(g_S, m)
            taus = [connectivity(law, x0, u).mean for u in targets]
    elif mode == "mc":
        if batch is None:
            if chain is None:
                raise ValueError("mc mode needs a batch or a chain configuration")
            batch = sample(g_S, m, chain)
        taus = [connectivity(batch, x0, u).mean for u in targets]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    b = float(sum(2 * d * K * t for t in taus))
    desc = f"graph:{g_S.key} |V|={g_S.n_vertices} |E|={g_S.n_edges} |dS|={len(targets)} x0={x0}"
    return CriterionReport(b, b < 1.0, desc, float(K), int(d))


# ---------------------------------------------------------------------------
# Kertész line bounds
# ---------------------------------------------------------------------------

def kertesz_mu(d: int) -> float:
    """mu = (2d+1)^(2d+1) / (2d)^(2d)."""
    return (2 * d + 1) ** (2 * d + 1) / (2 * d) ** (2 * d)


def kertesz_upper(p: float) -> float:
    """Upper bound on the critical ghost field for d = 2, q = 2.

    ``arctanh(sqrt(2 (1-p)^2 / p^2 - 1))``; returns ``+inf`` (no constraint)
    whenever the radicand is negative or the arctanh argument reaches 1.
    """
    if not 0.0 < p <= 1.0:
        return math.inf
    radicand = 2.0 * (1.0 - p) ** 2 / (p * p) - 1.0
    if radicand < 0.0:
        return math.inf
    arg = math.sqrt(radicand)
    if arg >= 1.0:
        return math.inf
    return math.atanh(arg)


def kertesz_lower(d: int, k: int) -> float:
    """Ghost-edge threshold ``1 - (1 - delta/2)^(1/|Lambda_{3k}|)`` with ``delta = mu^(-4^d)``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    log_delta = -(4 ** d) * math.log(kertesz_mu(d))
    delta = math.exp(log_delta)
    volume = (6 * k + 1) ** d
    return -math.expm1(math.log1p(-delta / 2.0) / volume)


def kertesz_bounds(p: float, d: int = 2, q: float = 2.0, k: int = 1, mode: str = "upper") -> float:
    """``mode="upper"``: field bound h(p); ``mode="lower"``: p_h threshold."""
    if mode == "upper":
        if d != 2 or q != 2:
            raise ValueError("the upper bound is stated for d = 2, q = 2")
        return kertesz_upper(p)
    if mode == "lower":
        return kertesz_lower(d, k)
    raise ValueError(f"unknown mode {mode!r}")


def kertesz_lower_field(d: int, k: int, q: float = 2.0) -> float:
    """The lower threshold expressed as a field via ``p_h = 1 - exp(-q h / (q-1))``."""
    return h_from_p_h(kertesz_lower(d, k), q)


__all__ = [
    "EstimateResult", "DecayFit", "CriterionReport", "NoDecayError", "pool",
    "connectivity", "connection_events", "magnetization", "spin_two_point", "truncated",
    "fit_correlation_length", "reach_events", "boundary_reach", "crossing_events",
    "crossing_probability", "wrap_events", "wrap_around_probability", "finite_size_criterion",
    "kertesz_mu", "kertesz_upper", "kertesz_lower", "kertesz_bounds", "kertesz_lower_field",
    "p_h_from_h",
]
