"""PhaseMax phase retrieval: LP solver, replica predictions, Monte Carlo harness."""
from .estimator import PhaseMaxRegressor
from .exceptions import (
    DomainError, Infeasible, MultipleFixedPoints, NoCrossing, NoFixedPoint, NumericalFailure,
    Unbounded, Unstable,
)
from .harness import (
    ExperimentRecord, SweepConfig, empirical_transition, run_cell, run_sweep, trial_seed,
)
from .instances import ProblemInstance, cosine_similarity, generate_instance
from .oracle import oracle_solve_lp
from .replica import (
    Regime, ReplicaPrediction, alpha_critical, c_const, h_of_q, h_second_derivative_at_1,
    picard_fixed_point, q_min, rho_critical, solve_fixed_point, sufficient_alpha, theta_of_q,
    w_of_q,
)
from .solver import SolverConfig, SolverResult, Status, nmse, solve_phasemax

__version__ = "0.1.0"
