"""Compiled and pure-Python kernels must agree bit for bit."""

from __future__ import annotations

import numpy as np
import pytest

from gibbs_lattice import _kernels_py, kernels
from gibbs_lattice.graph import attach_ghost, build_torus, complete_graph, grid_graph
from gibbs_lattice.samplers import ChainConfig, sample_fk_es, sample_ising, sample_loop_o1, sample_rc_general

compiled = pytest.importorskip("gibbs_lattice._kernels")

CHAIN = ChainConfig(seed=5, burn_in=50, n_samples=200, thinning=2)


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")


def test_components_agree():
    g = grid_graph(4, 3)
    rng = np.random.default_rng(0)
    bits = (rng.random((300, g.n_edges)) < 0.5).astype(np.uint8)
    eu, ev = g.endpoints
    a = kernels.batch_components(bits, eu, ev, g.n_vertices, impl=compiled)
    b = kernels.batch_components(bits, eu, ev, g.n_vertices, impl=_kernels_py)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_windings_agree():
    g = build_torus(2, 2)
    rng = np.random.default_rng(1)
    bits = (rng.random((300, g.n_edges)) < 0.6).astype(np.uint8)
    eu, ev = g.endpoints
    shifts = np.asarray(g.shifts)
    a = kernels.batch_windings(bits, eu, ev, shifts, g.n_vertices, impl=compiled)
    b = kernels.batch_windings(bits, eu, ev, shifts, g.n_vertices, impl=_kernels_py)
    assert np.array_equal(np.asarray(a), np.asarray(b))


def test_glauber_agrees():
    g = attach_ghost(grid_graph(3, 3))
    a = sample_ising(g, 0.4, 0.2, CHAIN, impl=compiled)
    b = sample_ising(g, 0.4, 0.2, CHAIN, impl=_kernels_py)
    assert np.array_equal(a.data, b.data)


@pytest.mark.parametrize("q", [1.5, 2.0, 3.0])
def test_random_cluster_agrees(q):
    g = complete_graph(5)
    a = sample_rc_general(g, 0.4, q, 0.0, CHAIN, impl=compiled)
    b = sample_rc_general(g, 0.4, q, 0.0, CHAIN, impl=_kernels_py)
    assert np.array_equal(a.data, b.data)


def test_loop_agrees():
    g = grid_graph(3, 3)
    a = sample_loop_o1(g, 0.6, CHAIN, impl=compiled)
    b = sample_loop_o1(g, 0.6, CHAIN, impl=_kernels_py)
    assert np.array_equal(a.data, b.data)


def test_es_sampler_uses_components():
    # the Edwards–Sokal sampler goes through the default backend only
    a = sample_fk_es(grid_graph(3, 2), 0.5, 0.0, CHAIN)
    b = sample_fk_es(grid_graph(3, 2), 0.5, 0.0, CHAIN)
    assert np.array_equal(a.data, b.data) and np.array_equal(a.spins, b.spins)
