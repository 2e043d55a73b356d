"""Stability exponents, equilibrium tests and pricing for SDF processes.

The stability exponent of a stochastic discount factor process is the
exponential growth rate of expected n-period discounted payoffs. A negative
exponent is equivalent to existence and uniqueness of a strictly positive
equilibrium price function, and to global convergence of the successive
approximation operator. The package computes the exponent three ways
(closed form, discretized spectral radius, Monte Carlo), prices payoff
streams on finite state spaces, and sweeps parameter regions to map
stability frontiers.
"""

from .errors import (BudgetError, ConvergenceError, DegeneracyError,
                     DomainError, IndeterminateError, InstabilityError,
                     NumericalError, ParameterError)
from .markov import (Ar1Spec, MarkovChain, is_irreducible, rouwenhorst,
                     simulate_chain, stationary_distribution)
from .models import (FAMILY_NAMES, CrraCvParams, EzByParams, EzSsyParams,
                     FiniteCrraParams, HabitParams, RiskNeutralParams,
                     crra_cv_benchmark, ez_by_benchmark, ez_ssy_benchmark,
                     habit_base, lphi_analytic, lphi_analytic_crra,
                     lphi_analytic_habit, phi_weight)
from .montecarlo import (BATCH, McConfig, McEstimate, estimate_lphi,
                         estimate_lphi_p, read_table1_csv, run_table1,
                         write_table1_csv)
from .pricing import (PricingProblem, PricingSolution, apply_T,
                      neumann_partial_sum, solve_markov_solution)
from .recursive import (WcGridSpec, WcSolution, path_sampler,
                        simulate_sdf_log_product, solve_wealth_consumption)
from .spectral import (StabilityReport, ValuationMatrix,
                       build_valuation_matrix, integrated_exponent,
                       lphi_from_matrix, lphi_p_exact, lphi_p_tail,
                       spectral_radius, verify_bond_identity)
from .sweep import (SweepAxis, SweepResult, SweepSpec, read_sweep_csv,
                    run_sweep)

__version__ = "0.1.0"

__all__ = [
    "Ar1Spec", "BATCH", "BudgetError", "ConvergenceError", "CrraCvParams",
    "DegeneracyError", "DomainError", "EzByParams", "EzSsyParams",
    "FAMILY_NAMES", "FiniteCrraParams", "HabitParams", "IndeterminateError",
    "InstabilityError", "MarkovChain", "McConfig", "McEstimate",
    "NumericalError", "ParameterError", "PricingProblem", "PricingSolution",
    "RiskNeutralParams", "StabilityReport", "SweepAxis", "SweepResult",
    "SweepSpec", "ValuationMatrix", "WcGridSpec", "WcSolution", "apply_T",
    "build_valuation_matrix", "crra_cv_benchmark", "estimate_lphi",
    "estimate_lphi_p", "ez_by_benchmark", "ez_ssy_benchmark", "habit_base",
    "integrated_exponent", "is_irreducible", "lphi_analytic",
    "lphi_analytic_crra", "lphi_analytic_habit", "lphi_from_matrix",
    "lphi_p_exact", "lphi_p_tail", "neumann_partial_sum", "path_sampler", "phi_weight",
    "read_sweep_csv", "read_table1_csv",
    "rouwenhorst", "run_sweep", "run_table1", "simulate_chain",
    "simulate_sdf_log_product", "solve_markov_solution",
    "solve_wealth_consumption", "spectral_radius", "stationary_distribution",
    "verify_bond_identity", "write_table1_csv",
]
