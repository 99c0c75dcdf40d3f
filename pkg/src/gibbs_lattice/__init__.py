"""Exact and Monte Carlo tools for the Ising model and its graphical representations.

The package is organised as

* :mod:`.graph` -- finite graphs, boxes, tori, ghost vertex, boundary conditions;
* :mod:`.models` -- model parameter records and parameter conversions;
* :mod:`.exact` -- brute-force laws used as oracles for everything else;
* :mod:`.samplers` -- reproducible Markov chain and direct samplers;
* :mod:`.estimators` -- connectivity, spin correlations, geometric events;
* :mod:`.verify` -- identity, domination, Markov-property and decay checks;
* :mod:`.cli` -- the ``gibbs-lattice`` command.

Hot loops live in a compiled extension with a pure-Python fallback; see
:data:`BACKEND`.
"""

from __future__ import annotations

from .exact import (
    ExactDistribution, StateSpaceTooLarge, bernoulli_connectivity, enumerate_measure,
    event_probability, exact_union_law, exact_ueg_of, partition_function, total_variation,
    two_point_exact,
)
from .estimators import (
    CriterionReport, DecayFit, EstimateResult, boundary_reach, connectivity,
    crossing_probability, finite_size_criterion, fit_correlation_length, kertesz_bounds,
    magnetization, spin_two_point, truncated, wrap_around_probability,
)
from .graph import (
    BoundaryCondition, EdgeConfig, Graph, GraphError, SpinConfig, apply_boundary_condition,
    attach_ghost, build_box, build_torus, complete_graph, cycle_graph, fundamental_cycle_basis,
    named_graph, path_graph, spanning_forest,
)
from .kernels import BACKEND
from .models import ModelError, ModelSpec
from .samplers import (
    ChainConfig, SampleBatch, sample, sample_bernoulli, sample_double_current, sample_fk_es,
    sample_ising, sample_loop_o1, sample_rc_general, sample_single_current, sample_ueg,
    sample_ueg_of, sample_union,
)
from .verify import (
    CheckReport, check_coupling_identities, check_decay_bounds, check_dmp,
    check_double_current_identity, check_edwards_sokal, check_stochastic_domination,
    scan_monotonicity,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "__version__",
    # graph
    "BoundaryCondition", "EdgeConfig", "Graph", "GraphError", "SpinConfig",
    "apply_boundary_condition", "attach_ghost", "build_box", "build_torus", "complete_graph",
    "cycle_graph", "fundamental_cycle_basis", "named_graph", "path_graph", "spanning_forest",
    # models
    "ModelError", "ModelSpec",
    # exact
    "ExactDistribution", "StateSpaceTooLarge", "bernoulli_connectivity", "enumerate_measure",
    "event_probability", "exact_union_law", "exact_ueg_of", "partition_function",
    "total_variation", "two_point_exact",
    # samplers
    "ChainConfig", "SampleBatch", "sample", "sample_bernoulli", "sample_double_current",
    "sample_fk_es", "sample_ising", "sample_loop_o1", "sample_rc_general",
    "sample_single_current", "sample_ueg", "sample_ueg_of", "sample_union",
    # estimators
    "CriterionReport", "DecayFit", "EstimateResult", "boundary_reach", "connectivity",
    "crossing_probability", "finite_size_criterion", "fit_correlation_length", "kertesz_bounds",
    "magnetization", "spin_two_point", "truncated", "wrap_around_probability",
    # verify
    "CheckReport", "check_coupling_identities", "check_decay_bounds", "check_dmp",
    "check_double_current_identity", "check_edwards_sokal", "check_stochastic_domination",
    "scan_monotonicity",
]
