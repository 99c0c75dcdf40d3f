"""Brute-force oracle: enumerate every configuration of a small graph.

Distributions are stored densely over integer codes. For edge models bit
``i`` of a code is edge ``i``; for spin models bit ``v`` is set when the
(non-ghost) vertex ``v`` carries spin +1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .config import max_states
from .graph import EdgeConfig, Graph, GraphError, SpinConfig, even_subgraphs, incidence_matrix
from .models import (
    BERNOULLI, DISAGREEMENT, DOUBLE_CURRENT, ISING, LOOP_O1, RANDOM_CLUSTER, SINGLE_CURRENT,
    ModelSpec, current_p_from_x, p_h_from_h,
)

CHUNK = 1 << 16


class StateSpaceTooLarge(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ExactDistribution:
    """Normalised law over all ``2**n_bits`` codes of one graph."""

    kind: str  # "edge" or "spin"
    n_bits: int
    probs: np.ndarray
    log_Z: float
    graph: Graph | None = None
    model: ModelSpec | None = None

    @property
    def Z(self) -> float:
        return math.exp(self.log_Z)

    @property
    def weights(self) -> np.ndarray:
        """Unnormalised weights."""
        return self.probs * self.Z

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.probs > 0)

    def bits(self, codes: np.ndarray | None = None) -> np.ndarray:
        codes = self.support if codes is None else codes
        return codes_to_bits(codes, self.n_bits)

    def prob(self, config) -> float:
        if isinstance(config, EdgeConfig):
            return float(self.probs[config.mask])
        if isinstance(config, SpinConfig):
            return float(self.probs[spin_code(config, self.graph)])
        return float(self.probs[int(config)])

    def config(self, code: int):
        if self.kind == "edge":
            return EdgeConfig(int(code), self.n_bits)
        spins = [1 if code >> v & 1 else -1 for v in range(self.n_bits)]
        ghost = None
        if self.graph is not None and self.graph.ghost is not None:
            spins.append(1)
            ghost = self.graph.ghost
        return SpinConfig(tuple(spins), ghost)

    def items(self):
        for code in self.support:
            yield self.config(int(code)), float(self.probs[code])


def codes_to_bits(codes, n_bits: int) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    return ((codes[:, None] >> np.arange(n_bits, dtype=np.int64)) & 1).astype(np.uint8)


def bits_to_codes(bits) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64)
    if bits.shape[1] > 62:
        raise ValueError("too many bits to pack into integer codes")
    return bits @ (np.int64(1) << np.arange(bits.shape[1], dtype=np.int64))


def spin_code(sigma: SpinConfig, g: Graph | None) -> int:
    n = len(sigma) - (1 if g is not None and g.ghost is not None else 0)
    return sum(1 << v for v in range(n) if sigma[v] == 1)


def _xlog(k, p: float):
    if p == 0.0:
        return np.where(k == 0, 0.0, -np.inf)
    return k * math.log(p)


def _check_size(n_bits: int):
    if n_bits > 62 or (1 << n_bits) > max_states():
        raise StateSpaceTooLarge(f"2^{n_bits} configurations exceed the exact-engine cap")


def _normalise(logw: np.ndarray) -> tuple[np.ndarray, float]:
    top = logw.max()
    if not np.isfinite(top):
        raise ValueError("all configurations have zero weight")
    w = np.exp(logw - top)
    total = w.sum()
    return w / total, float(top + math.log(total))


# ---------------------------------------------------------------------------
# Energies
# ---------------------------------------------------------------------------

def edge_couplings(g: Graph, h: float) -> np.ndarray:
    """J_e = 1 on internal edges and h on ghost edges."""
    J = np.ones(g.n_edges)
    J[g.n_internal_edges:] = h
    return J


def ising_energy(g: Graph, sigma: SpinConfig, h: float = 0.0, convention: str = "pair_product") -> float:
    """Energy of a spin configuration.

    pair_product: -sum_E J_e s_x s_y - h sum_v s_v (the field term moves onto
    the ghost edges when the graph has a ghost). disagreement_count: number of
    disagreeing edges, ghost edges weighted by h.
    """
    if len(sigma) != g.n_vertices:
        raise GraphError("spin configuration does not assign every vertex")
    s = sigma.to_array().astype(float)
    return float(_energies(g, s[None, :], h, convention)[0])


def _energies(g: Graph, s: np.ndarray, h: float, convention: str) -> np.ndarray:
    eu, ev = g.endpoints
    J = edge_couplings(g, h)
    prod = s[:, eu] * s[:, ev]
    if convention == DISAGREEMENT:
        return ((1.0 - prod) / 2.0) @ J
    energy = -(prod @ J)
    if g.ghost is None and h:
        energy = energy - h * s.sum(axis=1)
    return energy


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

def enumerate_measure(g: Graph, m: ModelSpec, chunk: int = CHUNK) -> ExactDistribution:
    if m.tag == ISING:
        return _enumerate_ising(g, m, chunk)
    if m.tag == SINGLE_CURRENT:
        loop = enumerate_measure(g, ModelSpec.loop_o1(m.x), chunk)
        ber = enumerate_measure(g, ModelSpec.bernoulli(current_p_from_x(m.x)), chunk)
        out = exact_union_law(loop, ber)
        return ExactDistribution("edge", out.n_bits, out.probs, 0.0, g, m)
    if m.tag == DOUBLE_CURRENT:
        single = enumerate_measure(g, ModelSpec.single_current(m.x), chunk)
        out = exact_union_law(single, single)
        return ExactDistribution("edge", out.n_bits, out.probs, 0.0, g, m)
    return _enumerate_edges(g, m, chunk)


def _enumerate_ising(g: Graph, m: ModelSpec, chunk: int) -> ExactDistribution:
    n_real = len(g.real_vertices)
    _check_size(n_real)
    total = 1 << n_real
    logw = np.empty(total)
    for start in range(0, total, chunk):
        codes = np.arange(start, min(total, start + chunk), dtype=np.int64)
        s = 2.0 * codes_to_bits(codes, n_real) - 1.0
        if g.ghost is not None:
            s = np.hstack([s, np.ones((len(codes), 1))])
        logw[start:start + len(codes)] = -m.beta * _energies(g, s, m.h, m.energy_convention)
    probs, log_Z = _normalise(logw)
    return ExactDistribution("spin", n_real, probs, log_Z, g, m)


def _enumerate_edges(g: Graph, m: ModelSpec, chunk: int) -> ExactDistribution:
    n = g.n_edges
    _check_size(n)
    total = 1 << n
    logw = np.empty(total)
    n_in = g.n_internal_edges
    eu, ev = g.endpoints
    inc = incidence_matrix(g) if m.tag == LOOP_O1 else None
    for start in range(0, total, chunk):
        codes = np.arange(start, min(total, start + chunk), dtype=np.int64)
        bits = codes_to_bits(codes, n)
        sl = slice(start, start + len(codes))
        if m.tag == BERNOULLI:
            o = bits.sum(axis=1, dtype=np.int64)
            logw[sl] = _xlog(o, m.p) + _xlog(n - o, 1.0 - m.p)
        elif m.tag == RANDOM_CLUSTER:
            o_in = bits[:, :n_in].sum(axis=1, dtype=np.int64)
            o_g = bits[:, n_in:].sum(axis=1, dtype=np.int64)
            p_h = p_h_from_h(m.h, m.q)
            _, kappa = kernels.batch_components(bits, eu, ev, g.n_vertices)
            logw[sl] = (
                _xlog(o_in, m.p) + _xlog(n_in - o_in, 1.0 - m.p)
                + _xlog(o_g, p_h) + _xlog(n - n_in - o_g, 1.0 - p_h)
                + kappa * math.log(m.q)
            )
        elif m.tag == LOOP_O1:
            odd = ((bits.astype(np.int64) @ inc) & 1).any(axis=1)
            o = bits.sum(axis=1, dtype=np.int64)
            lw = _xlog(o, m.x)
            logw[sl] = np.where(odd, -np.inf, lw)
        else:
            raise ValueError(f"{m.tag} is not an edge model")
    probs, log_Z = _normalise(logw)
    return ExactDistribution("edge", n, probs, log_Z, g, m)


def partition_function(g: Graph, m: ModelSpec) -> float:
    return enumerate_measure(g, m).Z


def event_probability(
    dist: ExactDistribution, predicate: Callable, vectorized: bool = False
) -> float:
    """Total probability of configurations satisfying ``predicate``.

    With ``vectorized`` the predicate receives the 0/1 matrix of the support
    (one row per configuration) and returns a boolean array.
    """
    support = dist.support
    if vectorized:
        hit = np.asarray(predicate(dist.bits(support)), dtype=bool)
        return float(dist.probs[support][hit].sum())
    return float(sum(dist.probs[c] for c in support if predicate(dist.config(int(c)))))


def connection_matrix(g: Graph, bits: np.ndarray, ghost_free: bool = False) -> np.ndarray:
    """Cluster labels for each row of an edge matrix; ghost edges masked on request."""
    if ghost_free and g.ghost is not None:
        bits = bits.copy()
        bits[:, g.n_internal_edges:] = 0
    eu, ev = g.endpoints
    labels, _ = kernels.batch_components(bits, eu, ev, g.n_vertices)
    return labels


def two_point_exact(g: Graph, m: ModelSpec, a: int, b: int, ghost_free: bool = False) -> float:
    """<s_a s_b> for the Ising model, P[a <-> b] for edge models."""
    return two_point_from(enumerate_measure(g, m), a, b, ghost_free)


def two_point_from(dist: ExactDistribution, a: int, b: int, ghost_free: bool = False) -> float:
    g = dist.graph
    if g.ghost is not None and g.ghost in (a, b):
        raise GraphError("two-point functions take non-ghost endpoints")
    if a == b:
        return 1.0
    support = dist.support
    bits = dist.bits(support)
    p = dist.probs[support]
    if dist.kind == "spin":
        same = bits[:, a] == bits[:, b]
        return float(2.0 * p[same].sum() - 1.0)
    labels = connection_matrix(g, bits, ghost_free)
    return float(p[labels[:, a] == labels[:, b]].sum())


# ---------------------------------------------------------------------------
# Pushforwards
# ---------------------------------------------------------------------------

def _same_universe(A: ExactDistribution, B: ExactDistribution):
    if A.kind != "edge" or B.kind != "edge" or A.n_bits != B.n_bits:
        raise GraphError("distributions live on different edge sets")
    if A.graph is not None and B.graph is not None and A.graph.key != B.graph.key:
        raise GraphError("distributions live on different graphs")


def exact_union_law(A: ExactDistribution, B: ExactDistribution) -> ExactDistribution:
    """Law of X | Y for independent X ~ A, Y ~ B."""
    _same_universe(A, B)
    total = 1 << A.n_bits
    if len(A.support) > len(B.support):
        A, B = B, A
    codes_b = B.support
    pb = B.probs[codes_b]
    out = np.zeros(total)
    for a in A.support:
        out += np.bincount(codes_b | a, weights=pb * A.probs[a], minlength=total)
    return ExactDistribution("edge", A.n_bits, out, 0.0, A.graph or B.graph)


def superset_sums(values: np.ndarray, n_bits: int) -> np.ndarray:
    """S[c] = sum of values[w] over all w containing c (additions only)."""
    s = np.array(values, dtype=float, copy=True)
    for i in range(n_bits):
        view = s.reshape(-1, 2, 1 << i)
        view[:, 0, :] += view[:, 1, :]
    return s


def exact_ueg_of(A: ExactDistribution) -> ExactDistribution:
    """Law of a uniform even subgraph of the open subgraph of omega ~ A."""
    g = A.graph
    if g is None or A.kind != "edge":
        raise GraphError("UEG pushforward needs an edge law on a known graph")
    n = A.n_bits
    codes = np.arange(1 << n, dtype=np.int64)
    bits = codes_to_bits(codes, n)
    _, kappa = kernels.batch_components(bits, *g.endpoints, g.n_vertices)
    dim = bits.sum(axis=1, dtype=np.int64) - g.n_vertices + kappa
    spread = superset_sums(A.probs / np.exp2(dim), n)
    out = np.zeros(1 << n)
    for eta in even_subgraphs(g):
        out[eta.mask] = spread[eta.mask]
    return ExactDistribution("edge", n, out, 0.0, g)


def total_variation(A: ExactDistribution, B: ExactDistribution) -> float:
    if A.kind != B.kind or A.n_bits != B.n_bits:
        raise GraphError("distributions live on different universes")
    return float(0.5 * np.abs(A.probs - B.probs).sum())


def point_mass(n_bits: int, code: int, kind: str = "edge", graph: Graph | None = None) -> ExactDistribution:
    probs = np.zeros(1 << n_bits)
    probs[code] = 1.0
    return ExactDistribution(kind, n_bits, probs, 0.0, graph)


# ---------------------------------------------------------------------------
# Bernoulli connectivity beyond brute-force size
# ---------------------------------------------------------------------------

def bernoulli_connectivity(g: Graph, p: float, a: int, b: int,
                           edges: list[int] | None = None) -> float:
    """Exact P_p[a <-> b] by a frontier sweep over the edges.

    Processes edges one at a time, keeping the partition of the active
    vertices into open clusters. Only the clusters of ``a`` and ``b`` are
    tracked; cost grows with the frontier width, not with 2^|E|. ``edges``
    restricts percolation to a subset of edges (others are absent).
    """
    if a == b:
        return 1.0
    order = list(range(g.n_edges)) if edges is None else sorted(edges)
    last: dict[int, int] = {}
    for pos, e in enumerate(order):
        for v in g.edges[e]:
            last[v] = pos
    if a not in last or b not in last:
        return 0.0
    front: list[int] = []
    # state: (labels aligned with front, label of a's cluster, label of b's cluster)
    states: dict[tuple, float] = {((), -1, -1): 1.0}
    success = 0.0
    for pos, e in enumerate(order):
        u, v = g.edges[e]
        new = [w for w in dict.fromkeys((u, v)) if w not in front]
        front_next = front + new
        iu, iv = front_next.index(u), front_next.index(v)
        retire = [w for w in dict.fromkeys((u, v)) if last[w] == pos]
        keep = [i for i, w in enumerate(front_next) if w not in retire]
        nxt: dict[tuple, float] = {}
        for (labels, la, lb), w in states.items():
            base = list(labels)
            fresh = max(base, default=-1) + 1
            for _ in new:
                base.append(fresh)
                fresh += 1
            if a in new:
                la = base[front_next.index(a)]
            if b in new:
                lb = base[front_next.index(b)]
            for is_open, weight in ((0, 1.0 - p), (1, p)):
                if weight == 0.0:
                    continue
                lab = list(base)
                la2, lb2 = la, lb
                if is_open and lab[iu] != lab[iv]:
                    old, tgt = lab[iv], lab[iu]
                    lab = [tgt if x == old else x for x in lab]
                    la2 = tgt if la2 == old else la2
                    lb2 = tgt if lb2 == old else lb2
                if la2 >= 0 and la2 == lb2:
                    success += w * weight
                    continue
                kept = [lab[i] for i in keep]
                if (la2 >= 0 and la2 not in kept) or (lb2 >= 0 and lb2 not in kept):
                    continue  # a or b sealed off
                relabel: dict[int, int] = {}
                canon = []
                for x in kept:
                    if x not in relabel:
                        relabel[x] = len(relabel)
                    canon.append(relabel[x])
                key = (tuple(canon), relabel.get(la2, -1), relabel.get(lb2, -1))
                nxt[key] = nxt.get(key, 0.0) + w * weight
        states = nxt
        front = [front_next[i] for i in keep]
    return success
