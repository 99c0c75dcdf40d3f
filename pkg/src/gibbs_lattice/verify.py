"""Machine checks of the coupling identities, inequalities and conventions.

Each check returns :class:`CheckReport` records; exact checks compare laws
produced by the brute-force engine, sampled checks compare batches against
exact laws with widened tolerances.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import networkx as nx
import numpy as np

from .constants import (
    DCISGR_CANDIDATES, DCISGR_CONNECTION_SQUARED, DCISGR_ISING_SQUARED, DCISGR_LINEAR,
    DCISGR_TOLERANCE,
)
from .estimators import connectivity, spin_two_point
from .exact import (
    ExactDistribution, bernoulli_connectivity, bits_to_codes, codes_to_bits, connection_matrix,
    enumerate_measure,
    exact_ueg_of, exact_union_law, total_variation, two_point_from,
)
from .graph import Graph, GraphError, attach_ghost, build_box, cycle_graph, even_subgraphs, from_edges
from .models import ModelError, ModelSpec, RANDOM_CLUSTER, current_p_from_beta, p_from_beta
from .samplers import (
    ChainConfig, S_AUX, SampleBatch, empirical_distribution, rng_stream, sample_bernoulli,
    sample_double_current, sample_fk_es, sample_loop_o1, sample_union, ueg_of_rows,
)

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"
MC_TV_TOL = 0.015


@dataclass
class CheckReport:
    name: str
    status: str
    metric: float
    tolerance: float
    details: str = ""
    data: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_json(self) -> dict:
        out = {"name": self.name, "status": self.status, "metric": self.metric,
               "tolerance": self.tolerance, "details": self.details}
        if self.data:
            out["data"] = self.data
        return out


def _status(ok: bool) -> str:
    return PASS if ok else FAIL


def _tv_report(name: str, tv: float, tol: float, details: str = "") -> CheckReport:
    return CheckReport(name, _status(tv < tol), float(tv), tol, details)


def write_reports(path, reports: Iterable[CheckReport]) -> None:
    """JSON lines, one report per line."""
    with open(path, "w", newline="\n") as fh:
        for r in reports:
            fh.write(json.dumps(r.to_json(), sort_keys=True) + "\n")


def all_passed(reports: Iterable[CheckReport]) -> bool:
    return all(r.status != FAIL for r in reports)


# ---------------------------------------------------------------------------
# Coupling identities
# ---------------------------------------------------------------------------

def check_coupling_identities(g: Graph, beta: float, tol: float = 1e-10, mode: str = "exact",
                              chain: ChainConfig | None = None) -> list[CheckReport]:
    """The four couplings between loop O(1), currents and random cluster.

    1. loop(x) | Ber(1 - 1/cosh beta)  ==  single current(x)
    2. loop(x) | Ber(tanh beta)        ==  random cluster(p = 1 - e^{-2 beta}, q = 2)
    3. UEG of random cluster           ==  loop(x)
    4. UEG of double current           ==  loop(x)

    with ``x = tanh beta``. ``mode="mc"`` replaces the left-hand sides by
    sampled batches and compares with the exact right-hand sides at
    ``max(tol, 0.015)``. Graphs with a ghost vertex are rejected.
    """
    if g.ghost is not None:
        raise GraphError("the coupling identities are checked without a field; drop the ghost")
    x = math.tanh(beta)
    p = p_from_beta(beta)
    loop = enumerate_measure(g, ModelSpec.loop_o1(x))
    single = enumerate_measure(g, ModelSpec.single_current(x))
    rc = enumerate_measure(g, ModelSpec.random_cluster(p, 2.0))
    tag = f"beta={beta:g} graph={g.key}"
    if mode == "exact":
        ber_c = enumerate_measure(g, ModelSpec.bernoulli(current_p_from_beta(beta)))
        ber_t = enumerate_measure(g, ModelSpec.bernoulli(x))
        double = enumerate_measure(g, ModelSpec.double_current(x))
        tvs = [
            total_variation(exact_union_law(loop, ber_c), single),
            total_variation(exact_union_law(loop, ber_t), rc),
            total_variation(exact_ueg_of(rc), loop),
            total_variation(exact_ueg_of(double), loop),
        ]
    elif mode == "mc":
        chain = chain or ChainConfig(seed=1, n_samples=100_000)
        tol = max(tol, MC_TV_TOL)
        loop_b = sample_loop_o1(g, x, chain) if x > 0 else None
        zero = np.zeros((chain.n_samples, g.n_edges), dtype=np.uint8)
        loop_b = loop_b or SampleBatch("edge", zero, g)
        ber_c = sample_bernoulli(g, current_p_from_beta(beta), ChainConfig(chain.seed + 1, 0, 1, chain.n_samples))
        ber_t = sample_bernoulli(g, x, ChainConfig(chain.seed + 2, 0, 1, chain.n_samples))
        rc_b = sample_fk_es(g, p, 0.0, chain)
        dc_b = sample_double_current(g, x, chain)
        ueg_rc = SampleBatch("edge", ueg_of_rows(g, rc_b.data, rng_stream(chain.seed, 0, S_AUX)), g)
        ueg_dc = SampleBatch("edge", ueg_of_rows(g, dc_b.data, rng_stream(chain.seed, 1, S_AUX)), g)
        tvs = [
            total_variation(empirical_distribution(sample_union(loop_b, ber_c)), single),
            total_variation(empirical_distribution(sample_union(loop_b, ber_t)), rc),
            total_variation(empirical_distribution(ueg_rc), loop),
            total_variation(empirical_distribution(ueg_dc), loop),
        ]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    names = ["loop_union_current_bernoulli", "loop_union_tanh_bernoulli",
             "ueg_of_random_cluster", "ueg_of_double_current"]
    return [_tv_report(f"coupling/{n}", tv, tol, f"{tag} mode={mode}") for n, tv in zip(names, tvs)]


# ---------------------------------------------------------------------------
# Edwards–Sokal and the double-current relation
# ---------------------------------------------------------------------------

def edwards_sokal_deviation(g: Graph, beta: float, h: float = 0.0) -> float:
    """max |<s_a s_b> - P_RC[a <-> b]| over vertex pairs (ghost pairs included).

    The Ising field ``h`` sits on the ghost edges with coupling ``h``; the
    matching random-cluster field is ``beta * h`` so that ghost edges open
    with probability ``1 - exp(-2 beta h)``.
    """
    if h and g.ghost is None:
        g = attach_ghost(g)
    ising = enumerate_measure(g, ModelSpec.ising(beta, h))
    rc = enumerate_measure(g, ModelSpec.random_cluster(p_from_beta(beta), 2.0, beta * h))
    real = list(g.real_vertices)
    worst = 0.0
    for a, b in itertools.combinations(real, 2):
        worst = max(worst, abs(two_point_from(ising, a, b) - two_point_from(rc, a, b)))
    if g.ghost is not None:
        # one-point functions: <s_a> = P[a <-> ghost]
        bits = rc.bits()
        labels = connection_matrix(g, bits)
        probs = rc.probs[rc.support]
        sbits = ising.bits()
        sprobs = ising.probs[ising.support]
        for a in real:
            mag = float(((2.0 * sbits[:, a] - 1.0) * sprobs).sum())
            conn = float(probs[labels[:, a] == labels[:, g.ghost]].sum())
            worst = max(worst, abs(mag - conn))
    return worst


def check_edwards_sokal(g: Graph, beta: float, h: float = 0.0, tol: float = 1e-10) -> CheckReport:
    dev = edwards_sokal_deviation(g, beta, h)
    return CheckReport("edwards_sokal", _status(dev < tol), dev, tol,
                       f"beta={beta:g} h={h:g} graph={g.key}")


def double_current_deviations(g: Graph, beta: float) -> dict[str, float]:
    """Max deviation of each candidate relation over all vertex pairs."""
    x = math.tanh(beta)
    ising = enumerate_measure(g, ModelSpec.ising(beta))
    double = enumerate_measure(g, ModelSpec.double_current(x))
    dev = {c: 0.0 for c in DCISGR_CANDIDATES}
    real = list(g.real_vertices)
    for a, b in itertools.combinations_with_replacement(real, 2):
        s = two_point_from(ising, a, b)
        c = two_point_from(double, a, b)
        dev[DCISGR_LINEAR] = max(dev[DCISGR_LINEAR], abs(s - c))
        dev[DCISGR_CONNECTION_SQUARED] = max(dev[DCISGR_CONNECTION_SQUARED], abs(s - c * c))
        dev[DCISGR_ISING_SQUARED] = max(dev[DCISGR_ISING_SQUARED], abs(s * s - c))
    return dev


def check_double_current_identity(graphs: Sequence[Graph], betas: Sequence[float],
                                  tol: float = DCISGR_TOLERANCE) -> CheckReport:
    """Decide which reading of the double-current relation holds.

    Passes when exactly one candidate holds on every graph and beta; the
    surviving convention is reported in ``data["convention"]``.
    """
    worst = {c: 0.0 for c in DCISGR_CANDIDATES}
    for g in graphs:
        for beta in betas:
            for c, v in double_current_deviations(g, beta).items():
                worst[c] = max(worst[c], v)
    holding = [c for c in DCISGR_CANDIDATES if worst[c] < tol]
    winner = holding[0] if len(holding) == 1 else None
    metric = worst[winner] if winner else min(worst.values())
    details = ", ".join(f"{c}: {worst[c]:.3e}" for c in DCISGR_CANDIDATES)
    return CheckReport("double_current_identity", _status(winner is not None), metric, tol, details,
                       {"convention": winner, "deviations": worst, "holding": holding})


# ---------------------------------------------------------------------------
# Monotonicity of loop O(1) connection probabilities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConnectionPolynomials:
    """``l_x[a <-> b] = N(x) / D(x)`` with coefficient arrays indexed by power."""

    numerator: np.ndarray
    denominator: np.ndarray

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return _polyval(self.numerator, x) / _polyval(self.denominator, x)

    def derivative_sign_poly(self) -> np.ndarray:
        """Coefficients of ``N' D - N D'``, whose sign is the sign of the slope."""
        N, D = self.numerator, self.denominator
        dN = np.arange(1, len(N)) * N[1:] if len(N) > 1 else np.zeros(1)
        dD = np.arange(1, len(D)) * D[1:] if len(D) > 1 else np.zeros(1)
        return _polysub(np.convolve(dN, D), np.convolve(N, dD))


def _polyval(coef: np.ndarray, x):
    out = np.zeros_like(x, dtype=float)
    for c in coef[::-1]:
        out = out * x + c
    return out


def _polysub(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = max(len(a), len(b))
    out = np.zeros(n)
    out[: len(a)] += a
    out[: len(b)] -= b
    return out


def loop_connection_polynomials(g: Graph, a: int, b: int) -> ConnectionPolynomials:
    """Exact rational form of ``x -> l_x[a <-> b]`` from the even subgraphs."""
    evens = even_subgraphs(g)
    bits = np.stack([e.to_array() for e in evens])
    sizes = bits.sum(axis=1).astype(np.int64)
    labels = connection_matrix(g, bits)
    hit = labels[:, a] == labels[:, b]
    D = np.bincount(sizes, minlength=g.n_edges + 1).astype(float)
    N = np.bincount(sizes[hit], minlength=g.n_edges + 1).astype(float)
    return ConnectionPolynomials(N, D)


def default_x_grid() -> np.ndarray:
    return np.round(np.arange(1, 101) / 100.0, 2)


def _bisect_root(f: Callable[[float], float], lo: float, hi: float, width: float) -> float:
    flo = f(lo)
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def decreasing_intervals(poly: ConnectionPolynomials, x_grid: np.ndarray,
                         width: float = 1e-6) -> list[tuple[float, float]]:
    """Maximal sub-intervals of the grid range where the curve strictly decreases.

    The grid locates sign changes of the slope; each endpoint is refined by
    bisection to ``width``.
    """
    W = poly.derivative_sign_poly()
    scale = np.abs(W).max() if len(W) and np.abs(W).max() > 0 else 1.0
    W = W / scale

    def w(x):
        return float(_polyval(W, np.asarray(x, dtype=float)))

    xs = np.asarray(x_grid, dtype=float)
    fine = np.unique(np.concatenate([xs, np.linspace(xs.min(), xs.max(), 20 * len(xs) + 1)]))
    vals = np.array([w(x) for x in fine])
    neg = vals < -1e-13
    out = []
    i = 0
    while i < len(fine):
        if not neg[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(fine) and neg[j + 1]:
            j += 1
        lo = fine[i] if i == 0 else _bisect_root(w, fine[i - 1], fine[i], width)
        hi = fine[j] if j == len(fine) - 1 else _bisect_root(w, fine[j], fine[j + 1], width)
        out.append((float(lo), float(hi)))
        i = j + 1
    return out


def scan_monotonicity(graph_iter: Iterable, a: int | None = None, b: int | None = None,
                      x_grid: Sequence[float] | None = None, all_pairs: bool = False,
                      width: float = 1e-6) -> list[CheckReport]:
    """Look for graphs where ``x -> l_x[a <-> b]`` decreases somewhere.

    ``graph_iter`` yields graphs or ``(label, graph)`` or ``(label, graph,
    a, b)`` tuples. With ``all_pairs`` every unordered pair of distinct
    vertices is scanned. A report with status ``fail`` is a non-monotone
    witness; its ``data`` holds the graph, pair, grid values and the refined
    decreasing intervals.
    """
    xs = default_x_grid() if x_grid is None else np.asarray(x_grid, dtype=float)
    reports = []
    for item in graph_iter:
        label, g, pa, pb = _unpack(item, a, b)
        pairs = itertools.combinations(g.real_vertices, 2) if all_pairs else [(pa, pb)]
        for u, v in pairs:
            poly = loop_connection_polynomials(g, u, v)
            vals = poly(xs)
            steps = np.diff(vals)
            drops = steps < -1e-12 * np.maximum(np.abs(vals[1:]), 1e-300)
            intervals = decreasing_intervals(poly, xs, width) if drops.any() else []
            witness = bool(drops.any())
            worst = float(-steps.min()) if len(steps) else 0.0
            reports.append(CheckReport(
                f"monotonicity/{label}/{u}-{v}", FAIL if witness else PASS, max(worst, 0.0), 0.0,
                f"decreasing on {intervals}" if witness else "increasing on grid",
                {"graph": g.to_json(), "a": u, "b": v, "intervals": intervals,
                 "values": vals.tolist() if witness else []},
            ))
    return reports


def _unpack(item, a, b):
    if isinstance(item, Graph):
        return item.key, item, a, b
    if len(item) == 2:
        return item[0], item[1], a, b
    return item


def _glued(l1: int, l2: int, s1: int, s2: int) -> Graph:
    """Cycles C1 (length l1) and C2 (length l2) sharing vertex 0, plus vertex
    ``s1`` of C1 identified with position ``s2`` of C2 when ``s1 > 0``."""
    edges = [(i, (i + 1) % l1) for i in range(l1)]
    ring = [0]
    nxt = l1
    for pos in range(1, l2):
        if s1 and pos == s2:
            ring.append(s1)
        else:
            ring.append(nxt)
            nxt += 1
    ring.append(0)
    edges += list(zip(ring[:-1], ring[1:]))
    return from_edges(nxt, edges)


def two_cycle_family(max_edges: int = 10, unequal_only: bool = True):
    """Even graphs made of two cycles sharing one or two vertices.

    Yields ``(label, graph)``. Cycles have length >= 3 and total edge count
    at most ``max_edges``; the two-vertex gluings cover every pair of
    positions up to symmetry that leaves the graph simple.
    """
    seen = set()
    for l1 in range(3, max_edges - 2):
        for l2 in range(l1, max_edges - l1 + 1):
            if unequal_only and l1 == l2:
                continue
            yield f"eight{l1}-{l2}", _glued(l1, l2, 0, 0)
            for s1 in range(1, l1 // 2 + 1):
                for s2 in range(1, l2):
                    g = _glued(l1, l2, s1, s2)
                    if len(set(map(frozenset, g.edges))) != g.n_edges:
                        continue  # gluing created a parallel edge
                    key = (l1, l2, s1, min(s2, l2 - s2))
                    if key in seen:
                        continue
                    seen.add(key)
                    yield f"theta{l1}-{l2}@{s1},{s2}", g


def single_cycle_family(max_edges: int = 10):
    for n in range(3, max_edges + 1):
        yield f"cycle{n}", cycle_graph(n)


# ---------------------------------------------------------------------------
# Stochastic domination
# ---------------------------------------------------------------------------

def domination_flow(A: ExactDistribution, B: ExactDistribution) -> float:
    """Maximum flow of the monotone-coupling network.

    Mass of ``A`` enters at each configuration, moves up the Boolean lattice
    along cover relations (adding one edge, infinite capacity) and leaves as
    mass of ``B``. All of ``A`` can be routed iff ``A`` is stochastically
    dominated by ``B``.
    """
    if A.kind != "edge" or B.kind != "edge" or A.n_bits != B.n_bits:
        raise GraphError("distributions live on different edge sets")
    n = A.n_bits
    net = nx.DiGraph()
    net.add_node("s")
    net.add_node("t")
    for c in np.flatnonzero(A.probs > 0):
        net.add_edge("s", int(c), capacity=float(A.probs[c]))
    for c in np.flatnonzero(B.probs > 0):
        net.add_edge(int(c), "t", capacity=float(B.probs[c]))
    for c in range(1 << n):
        for i in range(n):
            if not c >> i & 1:
                net.add_edge(c, c | 1 << i)  # no capacity attribute: unbounded
    value, _ = nx.maximum_flow(net, "s", "t")
    return float(value)


def check_stochastic_domination(A: ExactDistribution, B: ExactDistribution,
                                slack: float = 1e-9, max_edges: int = 12) -> CheckReport:
    """Is ``A`` stochastically dominated by ``B`` (A below B)?"""
    if A.n_bits > max_edges:
        raise GraphError(f"domination checks are limited to {max_edges} edges")
    flow = domination_flow(A, B)
    deficit = 1.0 - flow
    return CheckReport("stochastic_domination", _status(deficit <= slack), deficit, slack,
                       f"max flow {flow:.12f}")


def upsets(n_bits: int):
    """All increasing families of subsets of ``n_bits`` elements (small n only)."""
    total = 1 << n_bits
    if total > 16:
        raise ValueError("up-set enumeration is only feasible for n <= 4")
    for fam in range(1 << total):
        members = [c for c in range(total) if fam >> c & 1]
        ok = all(fam >> (c | 1 << i) & 1 for c in members for i in range(n_bits))
        if ok:
            yield members


def dominated_by_upsets(A: ExactDistribution, B: ExactDistribution, slack: float = 1e-12) -> bool:
    """Reference: A(U) <= B(U) for every up-set U."""
    return all(A.probs[u].sum() <= B.probs[u].sum() + slack for u in upsets(A.n_bits))


# ---------------------------------------------------------------------------
# Domain Markov property
# ---------------------------------------------------------------------------

def inner_edge_indices(g_outer: Graph, g_inner: Graph) -> list[int]:
    """Outer edge indices of the inner graph, matched through embeddings."""
    if g_outer.embedding is None or g_inner.embedding is None:
        raise GraphError("nested graphs are matched through their embeddings")
    idx = g_outer.coordinate_index
    want = {}
    for u, v in g_inner.edges:
        try:
            key = frozenset((idx[g_inner.embedding[u]], idx[g_inner.embedding[v]]))
        except KeyError:
            raise GraphError("inner graph is not a subgraph of the outer graph") from None
        want[key] = want.get(key, 0) + 1
    out = []
    for e, (u, v) in enumerate(g_outer.edges):
        key = frozenset((u, v))
        if want.get(key, 0) > 0:
            want[key] -= 1
            out.append(e)
    if any(want.values()):
        raise GraphError("inner graph is not a subgraph of the outer graph")
    return out


def check_dmp(g_outer: Graph, g_inner: Graph | Sequence[int], m: ModelSpec,
              tol: float = 1e-10) -> CheckReport:
    """Conditional law inside equals the random-cluster law with induced wiring.

    For every outside configuration ``w2`` of positive probability the inner
    edges are compared with the random-cluster measure on the inner graph in
    which vertices joined by ``w2`` are identified.
    """
    if m.tag != RANDOM_CLUSTER:
        raise ModelError("the Markov property check needs a random-cluster model")
    if m.h:
        raise ModelError("the Markov property check is implemented for h = 0")
    inner = list(g_inner) if not isinstance(g_inner, Graph) else inner_edge_indices(g_outer, g_inner)
    outer_law = enumerate_measure(g_outer, m)
    E = g_outer.n_edges
    outside = [e for e in range(E) if e not in set(inner)]
    k = len(inner)
    codes = np.arange(1 << E, dtype=np.int64)
    bits = codes_to_bits(codes, E)
    in_code = bits_to_codes(bits[:, inner]) if k else np.zeros(len(codes), dtype=np.int64)
    out_code = bits_to_codes(bits[:, outside]) if outside else np.zeros(len(codes), dtype=np.int64)
    table = np.zeros((1 << len(outside), 1 << k))
    np.add.at(table, (out_code, in_code), outer_law.probs)
    inner_vertices = sorted({v for e in inner for v in g_outer.edges[e]})
    worst = 0.0
    count = 0
    for oc in np.flatnonzero(table.sum(axis=1) > 0):
        cond = table[oc] / table[oc].sum()
        obits = codes_to_bits(np.array([oc]), len(outside))[0]
        quotient = _wired_inner(g_outer, inner, inner_vertices, outside, obits)
        ref = enumerate_measure(quotient, m).probs
        worst = max(worst, 0.5 * float(np.abs(cond - ref).sum()))
        count += 1
    return CheckReport("domain_markov", _status(worst < tol), worst, tol,
                       f"{count} outside configurations, {k} inner edges")


def _wired_inner(g: Graph, inner: list[int], inner_vertices: list[int], outside: list[int],
                 obits: np.ndarray) -> Graph:
    parent = list(range(g.n_vertices))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for e, on in zip(outside, obits):
        if on:
            u, v = g.edges[e]
            parent[find(u)] = find(v)
    label: dict[int, int] = {}
    for v in inner_vertices:
        label.setdefault(find(v), len(label))
    edges = [(label[find(g.edges[e][0])], label[find(g.edges[e][1])]) for e in inner]
    return Graph(len(label), tuple(edges), allow_loops=True)


# ---------------------------------------------------------------------------
# Decay bounds for Bernoulli percolation on the square lattice
# ---------------------------------------------------------------------------

def connection_table(g: Graph, p: float, edges: Sequence[int] | None = None) -> np.ndarray:
    """Exact ``P_p[u <-> v]`` for all vertex pairs (frontier dynamic programme)."""
    V = g.n_vertices
    T = np.eye(V)
    for u, v in itertools.combinations(range(V), 2):
        T[u, v] = T[v, u] = bernoulli_connectivity(g, p, u, v, edges)
    return T


def check_decay_bounds(box: Graph | None = None, p_list: Sequence[float] = (0.05, 0.1, 0.2),
                       slack: float = 1e-12) -> list[CheckReport]:
    """Exponential bound, one-step bound and separating-surface inequality.

    On a two-dimensional box centred at the origin, for every ``p``:

    * ``P[0 <-> x] <= (4p)^{|x|_1}`` for every ``x``;
    * ``P[0 <-> x] <= p * sum_i P[a_i <-> x]`` over the neighbours ``a_i``
      of 0, for ``x != 0``;
    * ``P[0 <-> x] <= sum_{y in dB_1} P_{B_1}[0 <-> y] P[y <-> x]`` for ``x``
      outside the unit box ``B_1``, where ``P_{B_1}`` uses only its edges.
    """
    box = build_box(2, 2) if box is None else box
    if box.dimension != 2:
        raise GraphError("decay bounds are checked on two-dimensional boxes")
    coords = np.asarray(box.embedding)
    origin = box.vertex((0, 0))
    l1 = np.abs(coords).sum(axis=1)
    linf = np.abs(coords).max(axis=1)
    nbrs = [v for v in range(box.n_vertices) if l1[v] == 1]
    unit_vertices = set(np.flatnonzero(linf <= 1).tolist())
    unit_edges = [e for e, (u, v) in enumerate(box.edges) if u in unit_vertices and v in unit_vertices]
    shell = [v for v in range(box.n_vertices) if linf[v] == 1]
    outside = [v for v in range(box.n_vertices) if linf[v] > 1]
    names = ("decay/exponential_4p", "decay/one_step", "decay/separating_surface")
    worst = dict.fromkeys(names, -math.inf)
    counts = dict.fromkeys(names, 0)
    for p in p_list:
        T = connection_table(box, p)
        inside = {y: bernoulli_connectivity(box, p, origin, y, unit_edges) for y in shell}
        for x in range(box.n_vertices):
            lhs = T[origin, x]
            checks = [(names[0], (4 * p) ** l1[x])]
            if x != origin:
                checks.append((names[1], p * sum(T[a, x] for a in nbrs)))
            if x in outside:
                checks.append((names[2], sum(inside[y] * T[y, x] for y in shell)))
            for name, rhs in checks:
                worst[name] = max(worst[name], lhs - rhs)
                counts[name] += int(lhs > rhs + slack)
    return [
        CheckReport(n, _status(counts[n] == 0), float(worst[n]), slack,
                    f"{counts[n]} violations; p in {list(p_list)}", {"violations": counts[n]})
        for n in names
    ]


# ---------------------------------------------------------------------------
# Suite runner
# ---------------------------------------------------------------------------

def run_suite(jobs: Sequence[Callable[[], CheckReport | list[CheckReport]]],
              workers: int = 1) -> list[CheckReport]:
    """Run independent checks (possibly in threads); reports keep job order."""
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda job: job(), jobs))
    else:
        results = [job() for job in jobs]
    out: list[CheckReport] = []
    for r in results:
        out.extend(r if isinstance(r, list) else [r])
    return out


def default_suite(g: Graph, beta: float, h: float = 0.0, mode: str = "exact",
                  chain: ChainConfig | None = None) -> list[Callable]:
    """Coupling identities, Edwards–Sokal and the double-current relation on ``g``."""
    jobs: list[Callable] = [
        lambda: check_coupling_identities(g, beta, mode=mode, chain=chain),
        lambda: check_edwards_sokal(g, beta, h),
    ]
    if g.ghost is None:
        jobs.append(lambda: check_double_current_identity([g], [beta]))
    return jobs


__all__ = [
    "CheckReport", "PASS", "FAIL", "INCONCLUSIVE", "write_reports", "all_passed",
    "check_coupling_identities", "edwards_sokal_deviation", "check_edwards_sokal",
    "double_current_deviations", "check_double_current_identity", "ConnectionPolynomials",
    "loop_connection_polynomials", "decreasing_intervals", "scan_monotonicity",
    "two_cycle_family", "single_cycle_family", "domination_flow",
    "check_stochastic_domination", "upsets", "dominated_by_upsets", "inner_edge_indices",
    "check_dmp", "connection_table", "check_decay_bounds", "run_suite", "default_suite",
    "connectivity", "spin_two_point",
]
