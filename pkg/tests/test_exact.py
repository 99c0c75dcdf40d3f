"""Exact engine against closed forms derived by hand."""

from __future__ import annotations

import math
from itertools import product

import numpy as np
import pytest

from gibbs_lattice.config import max_states
from gibbs_lattice.exact import (
    StateSpaceTooLarge, bernoulli_connectivity, bits_to_codes, codes_to_bits, enumerate_measure,
    event_probability, exact_ueg_of, exact_union_law, partition_function, point_mass,
    total_variation, two_point_exact, two_point_from,
)
from gibbs_lattice.graph import (
    EdgeConfig, attach_ghost, build_box, complete_graph, cycle_graph, grid_graph, path_graph,
)
from gibbs_lattice.models import ModelSpec


def test_codes_roundtrip():
    codes = np.arange(16)
    assert np.array_equal(bits_to_codes(codes_to_bits(codes, 4)), codes)


@pytest.mark.parametrize("n", [3, 4, 5])
@pytest.mark.parametrize("beta", [0.2, 0.9])
def test_ising_cycle_partition_function(n, beta):
    # transfer matrix eigenvalues 2 cosh(beta), 2 sinh(beta)
    Z = (2 * math.cosh(beta)) ** n + (2 * math.sinh(beta)) ** n
    assert partition_function(cycle_graph(n), ModelSpec.ising(beta)) == pytest.approx(Z, rel=1e-12)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_ising_cycle_two_point(k):
    n, beta = 6, 0.7
    t = math.tanh(beta)
    expected = (t ** k + t ** (n - k)) / (1 + t ** n)
    assert two_point_exact(cycle_graph(n), ModelSpec.ising(beta), 0, k) == pytest.approx(expected, abs=1e-12)


def test_ising_conventions_differ_by_half_beta():
    g = complete_graph(4)
    beta = 0.8
    a = enumerate_measure(g, ModelSpec.ising(beta, 0.0, "disagreement_count"))
    b = enumerate_measure(g, ModelSpec.ising(beta / 2, 0.0, "pair_product"))
    assert total_variation(a, b) < 1e-14


def test_ising_with_ghost_magnetisation_one_site():
    # one vertex plus ghost: weight exp(beta h s), so <s> = tanh(beta h)
    g = attach_ghost(path_graph(1))
    law = enumerate_measure(g, ModelSpec.ising(0.5, 0.3))
    m = 2 * law.probs[1] - 1
    assert m == pytest.approx(math.tanh(0.15), abs=1e-14)


@pytest.mark.parametrize("q", [1.0, 2.0, 3.5])
def test_random_cluster_cycle_partition_function(q):
    n, p = 5, 0.35
    Z = sum(math.comb(n, o) * p ** o * (1 - p) ** (n - o) * q ** (n - o) for o in range(n)) + p ** n * q
    assert partition_function(cycle_graph(n), ModelSpec.random_cluster(p, q)) == pytest.approx(Z, rel=1e-12)


def test_random_cluster_q1_is_bernoulli():
    g = grid_graph(3, 2)
    assert total_variation(enumerate_measure(g, ModelSpec.random_cluster(0.3, 1.0)),
                           enumerate_measure(g, ModelSpec.bernoulli(0.3))) < 1e-14


def test_random_cluster_field_single_vertex():
    # open: p_h q, closed: (1 - p_h) q^2; at q = 2 this is tanh(h)
    m = ModelSpec.random_cluster(0.5, 2.0, 0.4)
    law = enumerate_measure(attach_ghost(path_graph(1)), m)
    expected = m.p_h / (m.p_h + 2.0 * (1 - m.p_h))
    assert law.probs[1] == pytest.approx(expected, abs=1e-14)
    assert law.probs[1] == pytest.approx(math.tanh(0.4), abs=1e-14)


def test_loop_o1_cycle():
    law = enumerate_measure(cycle_graph(4), ModelSpec.loop_o1(0.5))
    assert law.Z == pytest.approx(1 + 0.5 ** 4)
    assert set(law.support.tolist()) == {0, 15}


def test_loop_o1_x1_is_uniform_on_even_subgraphs():
    g = complete_graph(4)
    law = enumerate_measure(g, ModelSpec.loop_o1(1.0))
    assert len(law.support) == 8
    assert np.allclose(law.probs[law.support], 1 / 8)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_bernoulli_cycle_connectivity(k):
    n, p = 6, 0.4
    expected = p ** k + p ** (n - k) - p ** n
    law = enumerate_measure(cycle_graph(n), ModelSpec.bernoulli(p))
    assert two_point_from(law, 0, k) == pytest.approx(expected, abs=1e-14)
    assert bernoulli_connectivity(cycle_graph(n), p, 0, k) == pytest.approx(expected, abs=1e-14)


def test_frontier_dp_matches_enumeration():
    g = grid_graph(3, 3)
    law = enumerate_measure(g, ModelSpec.bernoulli(0.45))
    for b in range(1, 9):
        assert bernoulli_connectivity(g, 0.45, 0, b) == pytest.approx(two_point_from(law, 0, b), abs=1e-13)


def test_frontier_dp_edge_subset():
    g = build_box(1, 2)
    # only the two middle edges: path -1 .. 1
    inner = [1, 2]
    assert bernoulli_connectivity(g, 0.3, 1, 3, inner) == pytest.approx(0.09)
    assert bernoulli_connectivity(g, 0.3, 0, 3, inner) == 0.0


def test_union_law_of_bernoullis():
    g = path_graph(4)
    u = exact_union_law(enumerate_measure(g, ModelSpec.bernoulli(0.2)),
                        enumerate_measure(g, ModelSpec.bernoulli(0.5)))
    assert total_variation(u, enumerate_measure(g, ModelSpec.bernoulli(1 - 0.8 * 0.5))) < 1e-14


def test_ueg_of_point_mass_is_uniform_on_cycle_space():
    g = complete_graph(4)
    full = point_mass(6, 63, graph=g)
    ueg = exact_ueg_of(full)
    assert np.allclose(ueg.probs[ueg.support], 1 / 8) and len(ueg.support) == 8
    # a tree has only the empty even subgraph
    tree = point_mass(6, 0b000111, graph=g)
    assert exact_ueg_of(tree).probs[0] == pytest.approx(1.0)


def test_event_probability_both_forms():
    law = enumerate_measure(cycle_graph(4), ModelSpec.bernoulli(0.3))
    a = event_probability(law, lambda w: w.n_open >= 3)
    b = event_probability(law, lambda bits: bits.sum(axis=1) >= 3, vectorized=True)
    assert a == pytest.approx(b) == pytest.approx(4 * 0.3 ** 3 * 0.7 + 0.3 ** 4)


def test_probabilities_sum_to_one_and_prob_lookup():
    law = enumerate_measure(grid_graph(3, 2), ModelSpec.random_cluster(0.4, 2.5))
    assert law.probs.sum() == pytest.approx(1.0, abs=1e-13)
    assert law.prob(EdgeConfig.empty(7)) == pytest.approx(law.probs[0])


def test_brute_force_ising_against_direct_sum():
    g = grid_graph(3, 2)
    beta, h = 0.45, 0.2
    law = enumerate_measure(attach_ghost(g), ModelSpec.ising(beta, h))
    # direct sum with explicit field term
    Z = 0.0
    for s in product((-1, 1), repeat=6):
        Z += math.exp(beta * (sum(s[u] * s[v] for u, v in g.edges) + h * sum(s)))
    assert law.Z == pytest.approx(Z, rel=1e-12)


def test_state_space_guard():
    with pytest.raises(StateSpaceTooLarge):
        enumerate_measure(build_box(2, 3), ModelSpec.bernoulli(0.5))
    assert max_states() >= 1 << 20
