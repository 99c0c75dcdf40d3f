"""Monte Carlo samplers for every model, plus the coupling constructors.

All randomness comes from counter-based Philox streams keyed by
``(seed, chain index)`` with a separate counter block per stream purpose, so
a batch depends only on ``(graph, model, ChainConfig)`` and never on how many
worker threads ran the chains. Hot loops live in :mod:`gibbs_lattice.kernels`
and consume pre-drawn uniforms, which is what makes the compiled and the
pure-Python backends produce identical batches.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import kernels
from .exact import ExactDistribution, bits_to_codes
from .graph import EdgeConfig, Graph, GraphError, SpinConfig, fundamental_cycle_basis, spanning_forest
from .models import (
    BERNOULLI, DISAGREEMENT, DOUBLE_CURRENT, ISING, LOOP_O1, PAIR_PRODUCT, RANDOM_CLUSTER,
    SINGLE_CURRENT, ModelError, ModelSpec, current_p_from_x,
)

#: uniforms handed to a kernel per call; bounds scratch memory
BLOCK = 1 << 21

# stream identifiers (third Philox counter word)
S_INIT, S_MAIN, S_AUX = 0, 1, 2
S_LOOP_A, S_BER_A, S_LOOP_B, S_BER_B = 3, 4, 5, 6


class SamplerError(ValueError):
    pass


def rng_stream(seed: int, chain: int = 0, stream: int = 0) -> np.random.Generator:
    """Philox generator for one (seed, chain, purpose) triple.

    The 128-bit key packs the seed and the chain index; the stream id sits in
    a high counter word, so distinct purposes never share random numbers.
    """
    key = (int(seed) & (2**64 - 1)) | (int(chain) << 64)
    bitgen = np.random.Philox(key=key, counter=[0, 0, int(stream), 0])
    return np.random.Generator(bitgen)


@dataclass(frozen=True)
class ChainConfig:
    """Run-length parameters of a Markov chain (sweeps, not single updates).

    ``n_samples`` is the total over all chains; chain ``c`` records the
    ``c``-th share of it after its own burn-in.
    """

    seed: int = 0
    burn_in: int = 10_000
    thinning: int = 1
    n_samples: int = 1000
    n_chains: int = 1

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise SamplerError("seed must be a 64-bit unsigned integer")
        if self.burn_in < 0:
            raise SamplerError("burn_in must be >= 0")
        if self.thinning < 1:
            raise SamplerError("thinning must be >= 1")
        if self.n_samples < 1:
            raise SamplerError("n_samples must be >= 1")
        if self.n_chains < 1:
            raise SamplerError("n_chains must be >= 1")

    def shares(self) -> list[int]:
        q, r = divmod(self.n_samples, self.n_chains)
        return [q + (c < r) for c in range(self.n_chains)]

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> ChainConfig:
        return cls(**{k: int(v) for k, v in data.items()})


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """Sampled configurations with their provenance.

    ``data`` is ``uint8[N, |E|]`` for edge batches and ``int8[N, |V|]`` for
    spin batches (ghost column pinned to +1). Joint Edwards–Sokal batches are
    edge batches that also carry ``spins``.
    """

    kind: str
    data: np.ndarray
    graph: Graph
    model: ModelSpec | None = None
    chain: ChainConfig | None = None
    sampler: str = ""
    spins: np.ndarray | None = None

    def __post_init__(self):
        width = self.graph.n_edges if self.kind == "edge" else self.graph.n_vertices
        if self.data.ndim != 2 or self.data.shape[1] != width:
            raise GraphError("batch rows do not match the graph")

    def __len__(self) -> int:
        return self.data.shape[0]

    def configs(self) -> list:
        if self.kind == "edge":
            return [EdgeConfig.from_array(row) for row in self.data]
        return [SpinConfig.from_array(row, self.graph.ghost) for row in self.data]

    def spin_batch(self) -> SampleBatch:
        if self.spins is None:
            raise SamplerError("batch carries no spins")
        return SampleBatch("spin", self.spins, self.graph, self.model, self.chain, self.sampler)

    @property
    def provenance(self) -> dict:
        return {
            "graph": self.graph.key,
            "kind": self.kind,
            "sampler": self.sampler,
            "model": self.model.to_json() if self.model is not None else None,
            "chain": self.chain.to_json() if self.chain is not None else None,
            "n": len(self),
        }


# ---------------------------------------------------------------------------
# Chain driver
# ---------------------------------------------------------------------------

def _drive(step: Callable, per_sweep: int, burn_in: int, thinning: int, n: int,
           rng: np.random.Generator, width: int, dtype) -> np.ndarray:
    """Run ``step(uniforms, thinning, out)`` through burn-in and recording.

    ``step`` performs ``out.shape[0] * thinning`` sweeps, each consuming
    ``per_sweep`` uniforms, writing one row after every ``thinning`` sweeps.
    """
    scratch = np.empty((1, width), dtype=dtype)
    left = burn_in
    chunk = max(1, BLOCK // max(per_sweep, 1))
    while left > 0:
        t = min(left, chunk)
        step(rng.random(t * per_sweep), t, scratch)
        left -= t
    out = np.empty((n, width), dtype=dtype)
    rows = max(1, BLOCK // max(per_sweep * thinning, 1))
    for start in range(0, n, rows):
        stop = min(n, start + rows)
        step(rng.random((stop - start) * thinning * per_sweep), thinning, out[start:stop])
    return out


def _over_chains(run_one: Callable[[int, int], np.ndarray], chain: ChainConfig,
                 workers: int = 1) -> np.ndarray:
    """Run every chain (possibly in threads) and stack in chain order."""
    jobs = [(c, n) for c, n in enumerate(chain.shares()) if n > 0]
    if workers <= 1 or len(jobs) == 1:
        parts = [run_one(c, n) for c, n in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: run_one(*job), jobs))
    return np.concatenate(parts, axis=0)


def _edge_probabilities(g: Graph, p: float, p_h: float) -> np.ndarray:
    pe = np.full(g.n_edges, float(p))
    pe[g.n_internal_edges:] = p_h
    return pe


# ---------------------------------------------------------------------------
# Bernoulli
# ---------------------------------------------------------------------------

def bernoulli_rows(g: Graph, p, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` independent configurations; ``p`` may be a per-edge array."""
    return (rng.random((n, g.n_edges)) < p).astype(np.uint8)


def sample_bernoulli(g: Graph, p: float, chain: ChainConfig, workers: int = 1) -> SampleBatch:
    """I.i.d. product measure: each edge open independently with probability ``p``."""
    model = ModelSpec.bernoulli(p)
    data = _over_chains(
        lambda c, n: bernoulli_rows(g, model.p, n, rng_stream(chain.seed, c, S_MAIN)), chain, workers
    )
    return SampleBatch("edge", data, g, model, chain, "bernoulli")


# ---------------------------------------------------------------------------
# Ising (single-site heat bath)
# ---------------------------------------------------------------------------

def _ising_tables(g: Graph, beta: float, h: float, convention: str):
    indptr, nbr, eid = g.incidence
    J = np.ones(g.n_edges)
    J[g.n_internal_edges:] = h
    coup = J[eid]
    field = np.zeros(g.n_vertices)
    if g.ghost is None and convention == PAIR_PRODUCT:
        field[:] = h
    # disagreement counting is the pair-product energy at half the temperature
    beta_eff = beta / 2.0 if convention == DISAGREEMENT else beta
    order = np.array(list(g.real_vertices), dtype=np.int32)
    return indptr, nbr, coup, field, order, beta_eff


def sample_ising(g: Graph, beta: float, h: float = 0.0, chain: ChainConfig | None = None,
                 convention: str = PAIR_PRODUCT, workers: int = 1, impl=None) -> SampleBatch:
    """Glauber heat-bath dynamics, systematic scan over the non-ghost vertices.

    Each update resamples one spin from its conditional law given its
    neighbours, so only the local field enters. The ghost spin stays +1.
    """
    chain = chain or ChainConfig()
    model = ModelSpec.ising(beta, h, convention)
    indptr, nbr, coup, field, order, beta_eff = _ising_tables(g, beta, h, convention)
    V = g.n_vertices

    def run_one(c: int, n: int) -> np.ndarray:
        init = rng_stream(chain.seed, c, S_INIT)
        spins = np.where(init.random(V) < 0.5, 1, -1).astype(np.int8)
        if g.ghost is not None:
            spins[g.ghost] = 1

        def step(u, t, out):
            kernels.glauber_run(spins, indptr, nbr, coup, field, order, beta_eff, u, t, out, impl=impl)

        return _drive(step, len(order), chain.burn_in, chain.thinning, n,
                      rng_stream(chain.seed, c, S_MAIN), V, np.int8)

    data = _over_chains(run_one, chain, workers)
    return SampleBatch("spin", data, g, model, chain, "glauber")


# ---------------------------------------------------------------------------
# Random cluster
# ---------------------------------------------------------------------------

def sample_rc_general(g: Graph, p: float, q: float, h: float = 0.0,
                      chain: ChainConfig | None = None, workers: int = 1, impl=None) -> SampleBatch:
    """Single-bond heat bath for the random-cluster measure with ghost field.

    An edge whose endpoints are joined by the rest of the configuration opens
    with probability ``p``; otherwise with ``p / (p + q (1 - p))``. Ghost
    edges use ``p_h`` in place of ``p``.
    """
    chain = chain or ChainConfig()
    model = ModelSpec.random_cluster(p, q, h)
    pe = _edge_probabilities(g, model.p, model.p_h)
    eu, ev = g.endpoints
    indptr, nbr, eid = g.incidence

    def run_one(c: int, n: int) -> np.ndarray:
        bits = np.zeros(g.n_edges, dtype=np.uint8)

        def step(u, t, out):
            kernels.rc_run(bits, eu, ev, indptr, nbr, eid, pe, model.q, u, t, out, impl=impl)

        return _drive(step, g.n_edges, chain.burn_in, chain.thinning, n,
                      rng_stream(chain.seed, c, S_MAIN), g.n_edges, np.uint8)

    data = _over_chains(run_one, chain, workers)
    return SampleBatch("edge", data, g, model, chain, "rc_heat_bath")


def sample_fk_es(g: Graph, p: float, h: float = 0.0, chain: ChainConfig | None = None,
                 q: float = 2.0, workers: int = 1) -> SampleBatch:
    """Edwards–Sokal alternating chain for q = 2.

    Given spins, each agreeing edge opens with probability ``p`` (ghost edges
    with ``p_h``); given edges, every cluster receives a fair spin except the
    ghost's cluster, which is +1. The returned edge batch carries the spins
    of the same sweep.
    """
    if q != 2:
        raise SamplerError("the Edwards–Sokal sampler only supports q = 2")
    chain = chain or ChainConfig()
    model = ModelSpec.random_cluster(p, 2.0, h)
    pe = _edge_probabilities(g, model.p, model.p_h)
    eu, ev = g.endpoints
    V, E, ghost = g.n_vertices, g.n_edges, g.ghost

    def run_one(c: int, n: int):
        init = rng_stream(chain.seed, c, S_INIT)
        rng = rng_stream(chain.seed, c, S_MAIN)
        s = np.where(init.random(V) < 0.5, 1, -1).astype(np.int8)
        if ghost is not None:
            s[ghost] = 1
        edges_out = np.empty((n, E), dtype=np.uint8)
        spins_out = np.empty((n, V), dtype=np.int8)
        bits = np.zeros((1, E), dtype=np.uint8)
        total = chain.burn_in + n * chain.thinning
        rec = 0
        for sweep in range(total):
            bits[0] = (s[eu] == s[ev]) & (rng.random(E) < pe)
            labels, count = kernels.batch_components(bits, eu, ev, V)
            coins = np.where(rng.random(int(count[0])) < 0.5, 1, -1).astype(np.int8)
            if ghost is not None:
                coins[labels[0, ghost]] = 1
            s = coins[labels[0]]
            done = sweep + 1 - chain.burn_in
            if done > 0 and done % chain.thinning == 0:
                edges_out[rec] = bits[0]
                spins_out[rec] = s
                rec += 1
        return np.hstack([edges_out, spins_out.view(np.uint8)])

    both = _over_chains(run_one, chain, workers)
    edges, spins = both[:, :E].copy(), both[:, E:].view(np.int8).copy()
    return SampleBatch("edge", edges, g, model, chain, "edwards_sokal", spins=spins)


# ---------------------------------------------------------------------------
# Uniform even subgraphs
# ---------------------------------------------------------------------------

def cycle_basis_matrix(g: Graph, within: EdgeConfig | None = None) -> np.ndarray:
    """Fundamental cycles of (the open subgraph of) ``g`` as a ``uint8[k, |E|]`` matrix."""
    basis = fundamental_cycle_basis(g, spanning_forest(g, within), within)
    if not basis:
        return np.zeros((0, g.n_edges), dtype=np.uint8)
    return np.stack([c.to_array() for c in basis]).astype(np.uint8)


def _xor_combinations(basis: np.ndarray, coef: np.ndarray) -> np.ndarray:
    if basis.shape[0] == 0:
        return np.zeros((coef.shape[0], basis.shape[1]), dtype=np.uint8)
    return ((coef.astype(np.int64) @ basis.astype(np.int64)) & 1).astype(np.uint8)


def ueg_rows(g: Graph, n: int, rng: np.random.Generator, within: EdgeConfig | None = None,
             basis: np.ndarray | None = None) -> np.ndarray:
    """``n`` exact uniform even subgraphs: XOR of a uniform subset of basis cycles."""
    basis = cycle_basis_matrix(g, within) if basis is None else basis
    coef = rng.integers(0, 2, size=(n, basis.shape[0]), dtype=np.uint8)
    return _xor_combinations(basis, coef)


def sample_ueg(g: Graph, seed: int) -> EdgeConfig:
    return EdgeConfig.from_array(ueg_rows(g, 1, rng_stream(seed, 0, S_MAIN))[0])


def sample_ueg_batch(g: Graph, chain: ChainConfig, workers: int = 1) -> SampleBatch:
    """I.i.d. uniform even subgraphs (the Haar measure of the cycle space)."""
    basis = cycle_basis_matrix(g)
    data = _over_chains(
        lambda c, n: ueg_rows(g, n, rng_stream(chain.seed, c, S_MAIN), basis=basis), chain, workers
    )
    return SampleBatch("edge", data, g, ModelSpec.loop_o1(1.0), chain, "ueg")


def sample_ueg_of(g: Graph, omega: EdgeConfig, seed: int) -> EdgeConfig:
    """Uniform even subgraph of the open subgraph of ``omega``."""
    if omega.n_edges != g.n_edges:
        raise GraphError("configuration does not belong to this graph")
    return EdgeConfig.from_array(ueg_rows(g, 1, rng_stream(seed, 0, S_MAIN), within=omega)[0])


def ueg_of_rows(g: Graph, bits: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One uniform even subgraph of each row of ``bits``, drawn in row order."""
    out = np.zeros_like(bits, dtype=np.uint8)
    cache: dict[bytes, np.ndarray] = {}
    for i, row in enumerate(np.asarray(bits, dtype=np.uint8)):
        key = row.tobytes()
        basis = cache.get(key)
        if basis is None:
            basis = cycle_basis_matrix(g, EdgeConfig.from_array(row))
            if len(cache) < 4096:
                cache[key] = basis
        coef = rng.integers(0, 2, size=(1, basis.shape[0]), dtype=np.uint8)
        out[i] = _xor_combinations(basis, coef)[0]
    return out


def sample_ueg_of_batch(batch: SampleBatch, seed: int) -> SampleBatch:
    """Apply the UEG map row by row to an edge batch."""
    if batch.kind != "edge":
        raise SamplerError("UEG map needs an edge batch")
    data = ueg_of_rows(batch.graph, batch.data, rng_stream(seed, 0, S_AUX))
    return SampleBatch("edge", data, batch.graph, None, batch.chain, f"ueg_of({batch.sampler})")


# ---------------------------------------------------------------------------
# Loop O(1) and random currents
# ---------------------------------------------------------------------------

def _loop_chain(g: Graph, x: float, chain: ChainConfig, c: int, n: int, stream: int,
                basis: np.ndarray, impl=None) -> np.ndarray:
    rng = rng_stream(chain.seed, c, stream)
    if x == 1.0:
        return ueg_rows(g, n, rng, basis=basis)
    k = basis.shape[0]
    bptr = np.zeros(k + 1, dtype=np.int32)
    bptr[1:] = np.cumsum(basis.sum(axis=1))
    bedges = np.flatnonzero(basis.ravel()) % g.n_edges if k else np.zeros(0)
    bedges = bedges.astype(np.int32)
    eta = np.zeros(g.n_edges, dtype=np.uint8)

    def step(u, t, out):
        kernels.loop_run(eta, bptr, bedges, x, u, t, out, impl=impl)

    return _drive(step, 2 * k, chain.burn_in, chain.thinning, n, rng, g.n_edges, np.uint8)


def _check_x(x: float, allow_zero: bool = False):
    if not (0.0 < x <= 1.0 or (allow_zero and x == 0.0)):
        raise ModelError("loop weight x must lie in (0, 1]")


def sample_loop_o1(g: Graph, x: float, chain: ChainConfig | None = None,
                   workers: int = 1, impl=None) -> SampleBatch:
    """Metropolis chain on even subgraphs.

    Proposes ``eta XOR C`` for a uniformly chosen fundamental cycle ``C`` and
    accepts with probability ``min(1, x^(o(eta') - o(eta)))``. At ``x = 1``
    the target is uniform and exact i.i.d. draws are returned instead.
    """
    _check_x(x)
    chain = chain or ChainConfig()
    basis = cycle_basis_matrix(g)
    data = _over_chains(lambda c, n: _loop_chain(g, x, chain, c, n, S_MAIN, basis, impl), chain, workers)
    return SampleBatch("edge", data, g, ModelSpec.loop_o1(x), chain, "loop_metropolis")


def _single_current_rows(g, x, chain, c, n, basis, loop_stream, ber_stream):
    loop = _loop_chain(g, x, chain, c, n, loop_stream, basis)
    ber = bernoulli_rows(g, current_p_from_x(x), n, rng_stream(chain.seed, c, ber_stream))
    return loop | ber


def sample_single_current(g: Graph, x: float, chain: ChainConfig | None = None,
                          workers: int = 1) -> SampleBatch:
    """Loop O(1) at ``x`` united with independent Bernoulli(1 - sqrt(1 - x^2))."""
    chain = chain or ChainConfig()
    model = ModelSpec.single_current(x)
    if x == 0.0:
        data = np.zeros((chain.n_samples, g.n_edges), dtype=np.uint8)
        return SampleBatch("edge", data, g, model, chain, "single_current")
    _check_x(x)
    basis = cycle_basis_matrix(g)
    data = _over_chains(
        lambda c, n: _single_current_rows(g, x, chain, c, n, basis, S_LOOP_A, S_BER_A), chain, workers
    )
    return SampleBatch("edge", data, g, model, chain, "single_current")


def sample_double_current(g: Graph, x: float, chain: ChainConfig | None = None,
                          workers: int = 1) -> SampleBatch:
    """Union of two independent single currents at the same ``x``."""
    chain = chain or ChainConfig()
    model = ModelSpec.double_current(x)
    if x == 0.0:
        data = np.zeros((chain.n_samples, g.n_edges), dtype=np.uint8)
        return SampleBatch("edge", data, g, model, chain, "double_current")
    _check_x(x)
    basis = cycle_basis_matrix(g)

    def run_one(c, n):
        first = _single_current_rows(g, x, chain, c, n, basis, S_LOOP_A, S_BER_A)
        second = _single_current_rows(g, x, chain, c, n, basis, S_LOOP_B, S_BER_B)
        return first | second

    data = _over_chains(run_one, chain, workers)
    return SampleBatch("edge", data, g, model, chain, "double_current")


def sample_union(a: SampleBatch, b: SampleBatch) -> SampleBatch:
    """Element-wise union of two independently generated edge batches."""
    if a.kind != "edge" or b.kind != "edge":
        raise SamplerError("unions are defined for edge batches")
    if a.graph.key != b.graph.key or len(a) != len(b):
        raise SamplerError("batches differ in graph or length")
    return SampleBatch("edge", a.data | b.data, a.graph, None, a.chain, f"union({a.sampler},{b.sampler})")


# ---------------------------------------------------------------------------
# Dispatch and summaries
# ---------------------------------------------------------------------------

def sample(g: Graph, model: ModelSpec, chain: ChainConfig, workers: int = 1) -> SampleBatch:
    """Default sampler for each model tag."""
    if model.tag == ISING:
        return sample_ising(g, model.beta, model.h, chain, model.energy_convention, workers)
    if model.tag == BERNOULLI:
        return sample_bernoulli(g, model.p, chain, workers)
    if model.tag == RANDOM_CLUSTER:
        return sample_rc_general(g, model.p, model.q, model.h, chain, workers)
    if model.tag == LOOP_O1:
        return sample_loop_o1(g, model.x, chain, workers)
    if model.tag == SINGLE_CURRENT:
        return sample_single_current(g, model.x, chain, workers)
    if model.tag == DOUBLE_CURRENT:
        return sample_double_current(g, model.x, chain, workers)
    raise ModelError(f"no sampler for {model.tag}")


def batch_codes(batch: SampleBatch) -> np.ndarray:
    """Integer codes of the rows, matching the exact engine's encoding."""
    if batch.kind == "edge":
        return bits_to_codes(batch.data)
    real = list(batch.graph.real_vertices)
    return bits_to_codes(batch.data[:, real] > 0)


def empirical_distribution(batch: SampleBatch) -> ExactDistribution:
    """Empirical law of a batch in the exact engine's dense format."""
    if batch.kind == "edge":
        n_bits = batch.graph.n_edges
    else:
        n_bits = len(batch.graph.real_vertices)
    if n_bits > 26:
        raise SamplerError("too many bits for a dense empirical law")
    counts = np.bincount(batch_codes(batch), minlength=1 << n_bits).astype(float)
    return ExactDistribution(batch.kind, n_bits, counts / counts.sum(), 0.0, batch.graph, batch.model)
