"""scikit-learn style wrapper around the sweep.

``BackflowCurve().fit(u0s)`` converges ``lambda_max`` at every cutoff;
``predict`` then answers for new cutoffs, either by re-converging (the
default) or from a cubic spline through the fitted points.
"""
from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicSpline
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .discretize import UNIFORM
from .eigensolve import ConvergenceControl, converge_lambda_max
from .exceptions import DomainError
from .sweep import sweep_lambda_max


def _as_cutoffs(X):
    arr = check_array(X, ensure_2d=False, dtype=float)
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise DomainError(f"expected a single column of u0 values, got {arr.shape[1]}")
        arr = arr[:, 0]
    return arr


class BackflowCurve(BaseEstimator):
    """Maximum backflow ``lambda_max(u0)`` as a fitted curve.

    Parameters mirror :class:`~backflow.eigensolve.ConvergenceControl`;
    ``interpolate`` switches ``predict`` to a spline through the fit.
    """

    def __init__(self, tol=1e-3, n_init=200, window=None, max_n=6400,
                 scheme=UNIFORM, interpolate=False, n_jobs=1):
        self.tol = tol
        self.n_init = n_init
        self.window = window
        self.max_n = max_n
        self.scheme = scheme
        self.interpolate = interpolate
        self.n_jobs = n_jobs

    def _ctrl(self):
        return ConvergenceControl(tol=self.tol, n_init=self.n_init, window=self.window,
                                  max_n=self.max_n, scheme=self.scheme)

    def fit(self, X, y=None):
        u0 = np.unique(_as_cutoffs(X))
        self.sweep_ = sweep_lambda_max(u0, self._ctrl(), n_jobs=self.n_jobs)
        self.u0_ = self.sweep_.u0
        self.lambda_max_ = self.sweep_.lambda_max
        self.error_estimate_ = self.sweep_.error_estimate
        self.n_features_in_ = 1
        if self.interpolate:
            ok = np.isfinite(self.lambda_max_)
            self.spline_ = CubicSpline(self.u0_[ok], self.lambda_max_[ok])
        return self

    def predict(self, X):
        check_is_fitted(self, "lambda_max_")
        u0 = _as_cutoffs(X)
        if self.interpolate:
            lo, hi = self.u0_[0], self.u0_[-1]
            if np.any(u0 < lo) or np.any(u0 > hi):
                raise DomainError(f"interpolation only covers the fitted range [{lo}, {hi}]")
            return self.spline_(u0)
        ctrl = self._ctrl()
        return np.array([converge_lambda_max(u, ctrl).lambda_max for u in u0])

    def transform(self, X):
        """Columns ``(lambda_max, error_estimate)`` for each cutoff in ``X``."""
        check_is_fitted(self, "lambda_max_")
        ctrl = self._ctrl()
        out = [converge_lambda_max(u, ctrl) for u in _as_cutoffs(X)]
        return np.array([[e.lambda_max, e.error_estimate] for e in out])
