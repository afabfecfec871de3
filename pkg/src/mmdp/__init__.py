"""Finite-horizon multi-model MDP solvers and benchmark tools."""

from .bandit import (EpisodeLog, Posterior, RegretReport, counterexample_mmdp,
                     mixts_run, regret_scan)
from .bench import (ComparisonTable, EvalResult, brute_force_best, compare,
                    monte_carlo_eval, random_instance, solve_oracle)
from .dp import (SolveReport, ValueTable, WeightTable, backward_values,
                 exact_return, forward_weights, optimize_policy, per_model_optimum,
                 solve_cadp, solve_mvp, solve_wsu)
from .gradient import (FirstOrderConfig, GradCheckReport, GradientTable,
                       grad_check, policy_gradient, solve_first_order)
from .io import load_domain, read_policy_csv, write_domain, write_policy_csv
from .model import (DomainBundle, Mmdp, Policy, ValidationReport, fold_discount,
                    validate)

__all__ = [
    "ComparisonTable", "DomainBundle", "EpisodeLog", "EvalResult",
    "FirstOrderConfig", "GradCheckReport", "GradientTable", "Mmdp", "Policy",
    "Posterior", "RegretReport", "SolveReport", "ValidationReport",
    "ValueTable", "WeightTable", "backward_values", "brute_force_best",
    "compare", "counterexample_mmdp", "exact_return", "fold_discount",
    "forward_weights", "grad_check", "load_domain", "mixts_run",
    "monte_carlo_eval", "optimize_policy", "per_model_optimum",
    "policy_gradient", "random_instance", "read_policy_csv", "regret_scan",
    "solve_cadp", "solve_first_order", "solve_mvp", "solve_oracle",
    "solve_wsu", "validate", "write_domain", "write_policy_csv",
]

__version__ = "0.1.0"
