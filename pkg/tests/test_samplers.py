from __future__ import annotations

import numpy as np
import pytest

from gibbs_lattice.exact import enumerate_measure, total_variation
from gibbs_lattice.graph import (
    EdgeConfig, GraphError, attach_ghost, complete_graph, connected_components, cycle_graph,
    grid_graph, is_even, path_graph,
)
from gibbs_lattice.models import ModelError, ModelSpec
from gibbs_lattice.samplers import (
    ChainConfig, SampleBatch, SamplerError, batch_codes, empirical_distribution, rng_stream, sample,
    sample_bernoulli, sample_double_current, sample_fk_es, sample_ising, sample_loop_o1,
    sample_rc_general, sample_single_current, sample_ueg, sample_ueg_of, sample_ueg_of_batch,
    sample_union,
)

SHORT = ChainConfig(seed=3, burn_in=200, n_samples=500)
MEDIUM = ChainConfig(seed=4, burn_in=2000, n_samples=40_000)


def test_rng_streams_are_reproducible_and_distinct():
    a = rng_stream(1, 0, 1).random(5)
    assert np.array_equal(a, rng_stream(1, 0, 1).random(5))
    assert not np.array_equal(a, rng_stream(1, 0, 2).random(5))
    assert not np.array_equal(a, rng_stream(1, 1, 1).random(5))
    assert not np.array_equal(a, rng_stream(2, 0, 1).random(5))


def test_chain_config():
    c = ChainConfig(n_samples=10, n_chains=3)
    assert c.shares() == [4, 3, 3]
    assert ChainConfig.from_json(c.to_json()) == c
    for bad in ({"thinning": 0}, {"burn_in": -1}, {"n_samples": 0}, {"seed": -1}, {"n_chains": 0}):
        with pytest.raises(SamplerError):
            ChainConfig(**bad)


def test_batch_shape_guard():
    with pytest.raises(GraphError):
        SampleBatch("edge", np.zeros((2, 3), dtype=np.uint8), cycle_graph(4))


@pytest.mark.parametrize("model", [
    ModelSpec.ising(0.3), ModelSpec.bernoulli(0.4), ModelSpec.random_cluster(0.5, 1.7),
    ModelSpec.loop_o1(0.5), ModelSpec.single_current(0.5), ModelSpec.double_current(0.5),
])
def test_same_seed_same_batch_regardless_of_workers(model):
    g = grid_graph(3, 2)
    chain = ChainConfig(seed=9, burn_in=50, n_samples=301, n_chains=3)
    a = sample(g, model, chain, workers=1)
    b = sample(g, model, chain, workers=3)
    assert np.array_equal(a.data, b.data)
    assert len(a) == 301
    c = sample(g, model, ChainConfig(seed=10, burn_in=50, n_samples=301, n_chains=3))
    assert not np.array_equal(a.data, c.data)


def test_provenance_records_everything():
    b = sample_bernoulli(cycle_graph(4), 0.3, SHORT)
    prov = b.provenance
    assert prov["graph"] == cycle_graph(4).key
    assert prov["model"] == {"tag": "bernoulli", "p": 0.3}
    assert prov["chain"]["seed"] == 3 and prov["n"] == 500


def test_loop_samples_are_even():
    g = grid_graph(3, 3)
    b = sample_loop_o1(g, 0.4, SHORT)
    assert all(is_even(g, w) for w in b.configs())


def test_ueg_helpers():
    g = complete_graph(5)
    eta = sample_ueg(g, 1)
    assert is_even(g, eta)
    omega = EdgeConfig.from_edges([0, 1, 4, 5, 7], g.n_edges)
    for seed in range(20):
        sub = sample_ueg_of(g, omega, seed)
        assert sub.issubset(omega) and is_even(g, sub)
    with pytest.raises(GraphError):
        sample_ueg_of(g, EdgeConfig(0, 3), 0)


def test_ueg_of_batch_stays_inside():
    g = grid_graph(3, 3)
    b = sample_bernoulli(g, 0.7, SHORT)
    u = sample_ueg_of_batch(b, 1)
    assert ((u.data & ~b.data) == 0).all()


def test_edwards_sokal_joint_consistency():
    g = attach_ghost(grid_graph(3, 2))
    b = sample_fk_es(g, 0.5, 0.3, SHORT)
    eu, ev = g.endpoints
    assert (b.spins[:, g.ghost] == 1).all()
    # every open edge joins equal spins
    open_ends = b.data.astype(bool)
    assert (b.spins[:, eu][open_ends] == b.spins[:, ev][open_ends]).all()
    # vertices in the ghost's cluster are +1
    for row, s in zip(b.data[:50], b.spins[:50]):
        labels = connected_components(g, EdgeConfig.from_array(row)).labels
        assert (s[labels == labels[g.ghost]] == 1).all()
    with pytest.raises(SamplerError):
        sample_fk_es(g, 0.5, 0.0, SHORT, q=3.0)


def test_currents_at_zero_and_invalid_x():
    g = cycle_graph(4)
    assert not sample_single_current(g, 0.0, SHORT).data.any()
    assert not sample_double_current(g, 0.0, SHORT).data.any()
    with pytest.raises(ModelError):
        sample_loop_o1(g, 0.0, SHORT)


def test_union_of_batches():
    g = path_graph(4)
    a = sample_bernoulli(g, 0.2, SHORT)
    b = sample_bernoulli(g, 0.3, ChainConfig(seed=8, n_samples=500))
    u = sample_union(a, b)
    assert np.array_equal(u.data, a.data | b.data)
    with pytest.raises(SamplerError):
        sample_union(a, sample_bernoulli(g, 0.2, ChainConfig(n_samples=3)))


def test_empirical_law_encoding_matches_exact_engine():
    g = cycle_graph(4)
    b = SampleBatch("edge", np.array([[1, 0, 0, 0], [1, 0, 0, 0], [0, 1, 1, 0]], dtype=np.uint8), g)
    assert batch_codes(b).tolist() == [1, 1, 6]
    law = empirical_distribution(b)
    assert law.probs[1] == pytest.approx(2 / 3) and law.probs[6] == pytest.approx(1 / 3)


@pytest.mark.parametrize("convention", ["pair_product", "disagreement_count"])
def test_glauber_with_field_matches_oracle(convention):
    g = attach_ghost(cycle_graph(4))
    m = ModelSpec.ising(0.5, 0.3, convention)
    b = sample_ising(g, 0.5, 0.3, MEDIUM, convention)
    assert total_variation(empirical_distribution(b), enumerate_measure(g, m)) < 0.03


def test_heat_bath_with_field_matches_oracle():
    g = attach_ghost(path_graph(3))
    m = ModelSpec.random_cluster(0.5, 2.5, 0.2)
    b = sample_rc_general(g, 0.5, 2.5, 0.2, MEDIUM)
    assert total_variation(empirical_distribution(b), enumerate_measure(g, m)) < 0.03


def test_es_with_field_matches_oracle():
    g = attach_ghost(path_graph(3))
    b = sample_fk_es(g, 0.4, 0.25, MEDIUM)
    assert total_variation(empirical_distribution(b), enumerate_measure(g, ModelSpec.random_cluster(0.4, 2.0, 0.25))) < 0.03
