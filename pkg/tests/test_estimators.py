from __future__ import annotations

import math

import numpy as np
import pytest

from gibbs_lattice import estimators as est
from gibbs_lattice.exact import enumerate_measure
from gibbs_lattice.graph import (
    GraphError, attach_ghost, build_box, build_torus, cycle_graph, grid_graph, path_graph,
)
from gibbs_lattice.models import ModelError, ModelSpec
from gibbs_lattice.samplers import ChainConfig, SampleBatch, sample_bernoulli, sample_fk_es, sample_ising


def test_estimate_result_and_pool():
    r = est.EstimateResult(0.5, 0.01, 100)
    assert r.within(0.52, 3.0) and not r.within(0.6, 3.0)
    assert est.EstimateResult(0.3, 0.0, 0).exact
    with pytest.raises(ValueError):
        est.EstimateResult(0.1, -1.0, 3)
    values = np.random.default_rng(0).random(1000)
    shards = [est.EstimateResult(v.mean(), v.std(ddof=1) / math.sqrt(len(v)), len(v))
              for v in np.split(values, 4)]
    pooled = est.pool(shards)
    assert pooled.mean == pytest.approx(values.mean())
    assert pooled.stderr == pytest.approx(values.std(ddof=1) / math.sqrt(1000), rel=1e-6)


def test_connectivity_exact_and_sampled():
    g = path_graph(5)
    law = enumerate_measure(g, ModelSpec.bernoulli(0.6))
    assert est.connectivity(law, 0, 4).mean == pytest.approx(0.6 ** 4)
    assert est.connectivity(law, 2, 2).mean == 1.0
    batch = sample_bernoulli(g, 0.6, ChainConfig(seed=1, n_samples=20_000))
    assert est.connectivity(batch, 0, 4).within(0.6 ** 4, 4.0)
    with pytest.raises(GraphError):
        est.connectivity(enumerate_measure(g, ModelSpec.ising(0.2)), 0, 1)


def test_ghost_free_connectivity():
    # two isolated vertices joined only through the ghost
    g = attach_ghost(path_graph(2))
    m = ModelSpec.random_cluster(0.0, 2.0, 0.5)
    law = enumerate_measure(g, m)
    assert est.connectivity(law, 0, 1, ghost_free=True).mean == 0.0
    assert est.connectivity(law, 0, 1).mean > 0.0
    with pytest.raises(GraphError):
        est.connectivity(law, 0, g.ghost)


def test_spin_estimators_exact():
    beta = 0.4
    law = enumerate_measure(cycle_graph(4), ModelSpec.ising(beta))
    t = math.tanh(beta)
    assert est.spin_two_point(law, 0, 2).mean == pytest.approx(2 * t ** 2 / (1 + t ** 4))
    assert est.magnetization(law, 0).mean == pytest.approx(0.0, abs=1e-14)
    assert est.truncated(law, 0, 2).mean == pytest.approx(2 * t ** 2 / (1 + t ** 4))


def test_spin_estimators_with_field_and_samples():
    g = attach_ghost(path_graph(1))
    law = enumerate_measure(g, ModelSpec.ising(1.0, 0.5))
    assert est.magnetization(law, 0).mean == pytest.approx(math.tanh(0.5))
    g2 = attach_ghost(path_graph(3))
    exact = enumerate_measure(g2, ModelSpec.ising(0.5, 0.2))
    batch = sample_ising(g2, 0.5, 0.2, ChainConfig(seed=2, burn_in=500, n_samples=30_000))
    tr = est.truncated(batch, 0, 2)
    assert tr.within(est.truncated(exact, 0, 2).mean, 4.0)
    es = sample_fk_es(g2, 1 - math.exp(-1.0), 0.1, ChainConfig(seed=2, burn_in=500, n_samples=2000))
    assert est.spin_two_point(es, 0, 1).n == 2000


def test_correlation_length_fit():
    r = np.arange(1, 8)
    fit = est.fit_correlation_length(r, 0.7 * np.exp(-r / 2.5))
    assert fit.xi == pytest.approx(2.5) and fit.C == pytest.approx(0.7) and fit.r2 == pytest.approx(1.0)
    windowed = est.fit_correlation_length(r, 0.7 * np.exp(-r / 2.5), window=(2, 5))
    assert windowed.window == (2.0, 5.0)
    with pytest.raises(est.NoDecayError):
        est.fit_correlation_length(r, np.exp(r / 3.0))
    with pytest.raises(ValueError):
        est.fit_correlation_length([1, 2], [0.5, 0.25])
    with pytest.raises(ValueError):
        est.fit_correlation_length([1, 2, 3], [0.5, 0.0, 0.1])


@pytest.mark.parametrize("k", [1, 2, 3])
def test_boundary_reach_one_dimensional(k):
    p = 0.55
    law = enumerate_measure(build_box(1, 3), ModelSpec.bernoulli(p))
    # reach left or right, independently
    assert est.boundary_reach(law, k).mean == pytest.approx(1 - (1 - p ** k) ** 2)


def test_boundary_reach_bounds():
    law = enumerate_measure(build_box(1, 2), ModelSpec.bernoulli(0.5))
    assert est.boundary_reach(law, 0).mean == 1.0
    with pytest.raises(GraphError):
        est.boundary_reach(law, 3)


def test_crossing_small_rectangles():
    p = 0.3
    # 2x2 square: a left-right crossing needs a horizontal edge
    law = enumerate_measure(grid_graph(2, 2), ModelSpec.bernoulli(p))
    assert est.crossing_probability(law).mean == pytest.approx(1 - (1 - p) ** 2)
    assert est.crossing_probability(law, "vertical").mean == pytest.approx(1 - (1 - p) ** 2)
    # 3 x 1 strip: both edges needed
    law = enumerate_measure(grid_graph(3, 1), ModelSpec.bernoulli(p))
    assert est.crossing_probability(law).mean == pytest.approx(p ** 2)
    with pytest.raises(ValueError):
        est.crossing_probability(law, "diagonal")


def test_wrap_events():
    g = build_torus(2, 2)
    E = g.n_edges
    rows = np.zeros((4, E), dtype=np.uint8)
    rows[1] = 1
    # a horizontal loop along the first row of the torus: edges with shift (1, 0) from vertices (i, 0)
    for e, ((u, _), s) in enumerate(zip(g.edges, g.shifts)):
        if s == (1, 0) and g.embedding[u][1] == 0:
            rows[2, e] = 1
        if s == (0, 1) and g.embedding[u][0] == 0 and g.embedding[u][1] < 3:
            rows[3, e] = 1  # open path that does not close up
    batch = SampleBatch("edge", rows, g)
    assert est.wrap_events(batch).tolist() == [False, True, True, False]
    assert est.wrap_events(batch, axis=0).tolist() == [False, True, True, False]
    assert est.wrap_events(batch, axis=1).tolist() == [False, True, False, False]
    with pytest.raises(GraphError):
        est.wrap_events(SampleBatch("edge", rows[:, :4], cycle_graph(4)))


def test_finite_size_criterion():
    p = 0.3
    rep = est.finite_size_criterion(build_box(1, 1), ModelSpec.bernoulli(p), 1)
    # two boundary sites each at distance one: b = 2 d K * 2p with K = p, d = 1
    assert rep.b_value == pytest.approx(4 * p * p)
    assert rep.satisfied
    assert rep.to_json()["K"] == p
    rc = est.finite_size_criterion(build_box(1, 1), ModelSpec.random_cluster(0.3, 2.0), 1, K=1.0)
    assert 0 < rc.b_value < 4
    batch = sample_bernoulli(build_box(1, 1), p, ChainConfig(seed=1, n_samples=20_000))
    mc = est.finite_size_criterion(build_box(1, 1), ModelSpec.bernoulli(p), 1, mode="mc", batch=batch)
    assert mc.b_value == pytest.approx(4 * p * p, abs=0.02)
    with pytest.raises(ModelError):
        est.finite_size_criterion(build_box(1, 1), ModelSpec.random_cluster(0.3, 2.0), 1)
    with pytest.raises(GraphError):
        est.finite_size_criterion(path_graph(3), ModelSpec.bernoulli(p), 1)


def test_kertesz_bounds():
    assert est.kertesz_mu(2) == 3125 / 256
    assert est.kertesz_lower(2, 1) == pytest.approx(4.1977157e-20, rel=1e-6)
    p = 0.55
    expected = math.atanh(math.sqrt(2 * (1 - p) ** 2 / p ** 2 - 1))
    assert est.kertesz_bounds(p) == pytest.approx(expected)
    root = 2 - math.sqrt(2)
    assert math.isfinite(est.kertesz_upper(root - 1e-9))
    assert est.kertesz_upper(root + 1e-9) == math.inf
    assert est.kertesz_upper(0.4) == math.inf  # arctanh argument above one
    assert est.kertesz_bounds(0.7, mode="lower") == est.kertesz_lower(2, 1)
    assert est.kertesz_lower_field(2, 1) == pytest.approx(est.kertesz_lower(2, 1) / 2, rel=1e-9)
    with pytest.raises(ValueError):
        est.kertesz_bounds(0.6, d=3)
    with pytest.raises(ValueError):
        est.kertesz_lower(2, 0)
