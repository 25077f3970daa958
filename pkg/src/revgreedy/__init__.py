"""Reverse greedy for k-center: algorithms, adversarial instances, and
approximation-ratio verification at desk scale."""

from .consolidation import (Consolidation, GammaCapError, critical_indices,
                            gamma, is_consolidation, verify_gamma_decrement)
from .exact import (OptimalSolution, OracleCapError, ball, exact_opt,
                    exact_opt_candidate_radius, exact_opt_enumeration, opt_balls)
from .kcenter import (ScriptedStepError, TiePolicy, Trace, cost,
                      greedy_farthest_first, marginal_costs, reverse_greedy,
                      serves)
from .lowerbound import (LowerBoundInstance, PhaseSchedule,
                         build_lower_bound_instance, export_dot, known_opt,
                         scripted_schedule, size_formula, verify_schedule)
from .metric import (DisconnectedGraphError, MetricSpace, WeightedGraph,
                     metric_from_graph, random_metric, uniform_metric,
                     validate_metric)

__all__ = [
    "Consolidation", "GammaCapError", "critical_indices", "gamma",
    "is_consolidation", "verify_gamma_decrement",
    "OptimalSolution", "OracleCapError", "ball", "exact_opt",
    "exact_opt_candidate_radius", "exact_opt_enumeration", "opt_balls",
    "ScriptedStepError", "TiePolicy", "Trace", "cost",
    "greedy_farthest_first", "marginal_costs", "reverse_greedy", "serves",
    "LowerBoundInstance", "PhaseSchedule", "build_lower_bound_instance",
    "export_dot", "known_opt", "scripted_schedule", "size_formula",
    "verify_schedule",
    "DisconnectedGraphError", "MetricSpace", "WeightedGraph",
    "metric_from_graph", "random_metric", "uniform_metric", "validate_metric",
]
