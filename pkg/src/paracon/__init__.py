"""Distributed fixed-point iteration of paracontractions over time-varying graphs."""
from .engine import Scenario, Trace, disagreement, residual, run, step, step_agentwise
from .graphs import (
    Constant, DirectedGraph, FiniteList, PeriodicList, RjscCertificate, RjscFailure,
    ScheduleExhausted, SeededRandom, certify_rjsc, compose_graphs, compose_sequence,
    graph_of_matrix, is_complete, is_strongly_connected, search_rjsc,
)
from .maps import (
    AffineLinearSolve, AffineSubspace, Averaged, Ball, Box, Composite, GradientDescent,
    Halfspace, Indicator, Intersection, LinearMap, LinearOperator, PreconditionError,
    Projector, Proximal, Quadratic, Reflection, WeightedL1, compose, is_fixed_point,
)
from .matrices import StochasticMatrix, apply_kron, phi_product, stochastic_from_graph, stochastic_from_weights
from .norms import MixedNormSpec, mixed_norm, mixed_norm_pinf, p_norm
from .report import CheckReport
from .scenario_io import ScenarioError, load_scenario

__version__ = "0.1.0"

__all__ = [
    "Scenario", "Trace", "disagreement", "residual", "run", "step", "step_agentwise",
    "Constant", "DirectedGraph", "FiniteList", "PeriodicList", "RjscCertificate", "RjscFailure",
    "ScheduleExhausted", "SeededRandom", "certify_rjsc", "compose_graphs", "compose_sequence",
    "graph_of_matrix", "is_complete", "is_strongly_connected", "search_rjsc",
    "AffineLinearSolve", "AffineSubspace", "Averaged", "Ball", "Box", "Composite",
    "GradientDescent", "Halfspace", "Indicator", "Intersection", "LinearMap", "LinearOperator",
    "PreconditionError", "Projector", "Proximal", "Quadratic", "Reflection", "WeightedL1",
    "compose", "is_fixed_point", "StochasticMatrix", "apply_kron", "phi_product",
    "stochastic_from_graph", "stochastic_from_weights", "MixedNormSpec", "mixed_norm",
    "mixed_norm_pinf", "p_norm", "CheckReport", "ScenarioError", "load_scenario",
    "__version__",
]
