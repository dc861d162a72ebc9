"""Threshold equilibria, reward design and Monte Carlo validation for the
staking-pool formation game."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .closed_form import (equilibrium_cubic, security_max_uniform,
                          welfare_optimal_uniform)
from .discrete import (DiscreteConfig, SimulationReport, best_response_threshold,
                       convergence_study, empirical_threshold, simulate)
from .distributions import (CostDistribution, CustomCDF, Power, TableCDF, Uniform,
                            parse_distribution)
from .equilibrium import (Corner, DesignResult, EquilibriumResult, GameParams,
                          classify_lambda, indifference_gap, lambda_from_cstar,
                          security_max_cstar, solve_threshold_equilibrium, welfare,
                          welfare_optimal_cstar)
from .errors import (DomainError, InfeasibleError, NumericError, RegimeError,
                     ShapeDiagnosticError, StakePoolError, ValidationError)
from .extensions import (CompetitionRegime, CostlyDelegationParams, CostlyRegime,
                         EndogenousParams, classify_return_competition,
                         max_security_costly, solve_costly_delegation, solve_endogenous)
from .reward_design import (RewardShareCurve, Shape, malicious_reward_share,
                            minimize_malicious_reward, sweep_lambda)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
