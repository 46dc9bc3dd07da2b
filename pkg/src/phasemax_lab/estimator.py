"""scikit-learn style wrapper around the PhaseMax solver.

``PhaseMaxRegressor`` treats the rows of ``X`` as sensing vectors and ``y``
as magnitudes ``|<a_i, x>|``; ``fit`` recovers ``coef_`` by PhaseMax with the
anchor passed as ``x_init``.  ``predict`` returns the modelled magnitudes, so
the estimator drops into pipelines and model-selection tools.
"""
import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, validate_data

from .exceptions import DomainError
from .instances import ProblemInstance
from .solver import SolverConfig, Status, nmse, solve_phasemax


class PhaseMaxRegressor(RegressorMixin, BaseEstimator):
    """Recover a real signal from magnitude measurements by PhaseMax.

    Parameters
    ----------
    max_iters, feas_tol, obj_tol, step_safety, power_iters
        Forwarded to :class:`~phasemax_lab.solver.SolverConfig`.

    Attributes
    ----------
    coef_ : ndarray of shape (n_features,)
        The PhaseMax estimate.
    status_ : str
        ``"Converged"`` or ``"MaxIters"``.
    n_iter_ : int
    max_violation_ : float
    """

    def __init__(self, max_iters=50000, feas_tol=1e-8, obj_tol=1e-9, step_safety=0.95,
                 power_iters=50):
        self.max_iters = max_iters
        self.feas_tol = feas_tol
        self.obj_tol = obj_tol
        self.step_safety = step_safety
        self.power_iters = power_iters

    def _config(self):
        return SolverConfig(
            max_iters=self.max_iters,
            feas_tol=self.feas_tol,
            obj_tol=self.obj_tol,
            step_safety=self.step_safety,
            power_iters=self.power_iters,
        )

    def fit(self, X, y, x_init=None):
        """Solve PhaseMax for sensing matrix ``X`` and magnitudes ``y``.

        ``x_init`` is the anchor vector; it is required.
        """
        X, y = validate_data(self, X, y, y_numeric=True)
        if np.any(y < 0):
            raise DomainError("magnitudes y must be nonnegative")
        if x_init is None:
            raise DomainError("x_init (the anchor vector) is required")
        x_init = check_array(x_init, ensure_2d=False)
        if x_init.shape != (X.shape[1],):
            raise DomainError(f"x_init must have shape ({X.shape[1]},), got {x_init.shape}")
        # the target is unknown here; zero disables the NMSE bookkeeping
        inst = ProblemInstance(X.astype(float), np.zeros(X.shape[1]), y.astype(float),
                               x_init.astype(float))
        res = solve_phasemax(inst, self._config())
        self.coef_ = res.estimate
        self.status_ = res.status.value
        self.n_iter_ = res.iterations
        self.max_violation_ = res.max_violation
        self.converged_ = res.status is Status.CONVERGED
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = validate_data(self, X, reset=False)
        return np.abs(X @ self.coef_)

    def nmse(self, target):
        """Sign-resolved normalized error of ``coef_`` against a known signal."""
        check_is_fitted(self, "coef_")
        return nmse(self.coef_, target)
