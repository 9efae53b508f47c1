"""Curves built from converged ``lambda_max`` values.

Covers the ``lambda_max(u0)`` sweep, the family ``lambda_max(u0 / alpha)``
that approaches the classical step as ``alpha -> 0``, the half-crossing
``lambda_max(u0*) = 0.5`` and the odd-symmetry residuals about it.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .eigensolve import ConvergenceControl, converge_lambda_max
from .exceptions import BudgetExceededError, ConvergenceError, DomainError

DEFAULT_ALPHAS = (1.0, 0.75, 0.5, 0.25, 0.125)
DEFAULT_BRACKET = (-2.0, 0.0)
CROSSING_LEVEL = 0.5


@dataclass(frozen=True)
class SweepRow:
    u0: float
    lambda_max: float
    error_estimate: float
    error: str | None = None

    @property
    def ok(self):
        return self.error is None


@dataclass(frozen=True)
class SweepResult:
    rows: tuple
    ctrl: ConvergenceControl = field(default_factory=ConvergenceControl)

    @property
    def u0(self):
        return np.array([r.u0 for r in self.rows])

    @property
    def lambda_max(self):
        return np.array([r.lambda_max for r in self.rows])

    @property
    def error_estimate(self):
        return np.array([r.error_estimate for r in self.rows])


@dataclass(frozen=True)
class ClassicalFamily:
    alpha_values: tuple
    curves: dict  # alpha -> tuple of (u0, lambda_max)


@dataclass(frozen=True)
class SymmetryReport:
    u0_star: float
    center: float
    offsets: tuple
    residuals: tuple
    error_bars: tuple

    @property
    def exceeds_error_bar(self):
        return tuple(abs(r) > e for r, e in zip(self.residuals, self.error_bars))

    @property
    def center_offset(self):
        """How far ``lambda_max(u0*)`` sits from exactly one half."""
        return self.center - CROSSING_LEVEL


def _evaluate_row(u0, ctrl):
    try:
        est = converge_lambda_max(u0, ctrl)
    except BudgetExceededError as exc:
        return SweepRow(u0, exc.best_estimate, exc.error_estimate, str(exc))
    except (ConvergenceError, DomainError) as exc:
        return SweepRow(u0, math.nan, math.inf, str(exc))
    return SweepRow(u0, est.lambda_max, est.error_estimate)


def sweep_lambda_max(u0_list, ctrl=None, n_jobs=1):
    """Converge ``lambda_max`` at each cutoff in ``u0_list`` (strictly ascending).

    A failure at one cutoff is stored on its row and does not stop the sweep.
    """
    ctrl = ctrl or ConvergenceControl()
    u0s = [float(u) for u in u0_list]
    if not u0s:
        raise DomainError("u0_list must not be empty")
    if not all(math.isfinite(u) for u in u0s):
        raise DomainError("u0 values must be finite")
    if any(b <= a for a, b in zip(u0s, u0s[1:])):
        raise DomainError("u0_list must be strictly ascending")
    if n_jobs == 1:
        rows = [_evaluate_row(u, ctrl) for u in u0s]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            rows = list(pool.map(lambda u: _evaluate_row(u, ctrl), u0s))
    return SweepResult(rows=tuple(rows), ctrl=ctrl)


def classical_step(u0):
    """Classical maximum right-to-left flow: 1 below zero, 0 above.

    Returns ``None`` at ``u0 == 0``, where the step is undefined.
    """
    if u0 < 0:
        return 1.0
    if u0 > 0:
        return 0.0
    return None


def classical_family(base, alphas=DEFAULT_ALPHAS, u0_values=None, ctrl=None,
                     interpolate=False):
    """Curves ``u0 -> lambda_max(u0 / alpha)`` for each ``alpha`` in (0, 1].

    ``base`` is either a :class:`SweepResult` or a callable returning
    ``lambda_max`` for a cutoff. With a sweep, points are re-converged with
    the sweep's control record unless ``interpolate`` is set, in which case
    a cubic spline through the sweep is used (and must not be asked to
    extrapolate).
    """
    alphas = tuple(float(a) for a in alphas)
    for a in alphas:
        if not 0 < a <= 1:
            raise DomainError(f"alpha must lie in (0, 1], got {a}")

    if isinstance(base, SweepResult):
        if u0_values is None:
            u0_values = base.u0
        if interpolate:
            ok = [r for r in base.rows if r.ok]
            spline = CubicSpline([r.u0 for r in ok], [r.lambda_max for r in ok])
            lo, hi = ok[0].u0, ok[-1].u0

            def evaluate(u):
                if not lo <= u <= hi:
                    raise DomainError(f"u0={u} lies outside the interpolated sweep [{lo}, {hi}]")
                return float(spline(u))
        else:
            ctrl = ctrl or base.ctrl

            def evaluate(u):
                return converge_lambda_max(u, ctrl).lambda_max
    elif callable(base):
        if u0_values is None:
            raise DomainError("u0_values are required with a callable base")
        evaluate = base
    else:
        raise DomainError("base must be a SweepResult or a callable")

    u0_values = [float(u) for u in u0_values]
    curves = {}
    for a in alphas:
        curves[a] = tuple((u, float(evaluate(u / a))) for u in u0_values)
    return ClassicalFamily(alpha_values=alphas, curves=curves)


def find_half_crossing(ctrl=None, bracket=DEFAULT_BRACKET, value_tol=2e-3, width_tol=1e-3):
    """Bisect for the cutoff where ``lambda_max`` equals one half.

    Stops once ``|lambda_max - 0.5| <= value_tol`` or the bracket is
    narrower than ``width_tol``.
    """
    ctrl = ctrl or ConvergenceControl()
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise DomainError(f"bracket must satisfy lo < hi, got {bracket}")

    def g(u):
        return converge_lambda_max(u, ctrl).lambda_max - CROSSING_LEVEL

    g_lo, g_hi = g(lo), g(hi)
    if not (g_lo > 0 > g_hi):
        raise DomainError(
            f"no sign change of lambda_max - 0.5 on [{lo}, {hi}] "
            f"(values {g_lo + 0.5:.6g}, {g_hi + 0.5:.6g})")
    while hi - lo > width_tol:
        mid = 0.5 * (lo + hi)
        g_mid = g(mid)
        if abs(g_mid) <= value_tol:
            return mid
        if g_mid > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def symmetry_residuals(u0_star, offsets, ctrl=None):
    """Residuals of the conjectured odd symmetry of ``lambda_max - 1/2`` about ``u0_star``.

    For each offset ``s``, ``r(s) = [lam(u0* + s) - c] + [lam(u0* - s) - c]``
    with ``c = lam(u0*)`` (one half, up to the crossing tolerance). The
    report always starts with ``s = 0``, whose residual is zero. Nothing is
    asserted about whether the symmetry holds.
    """
    ctrl = ctrl or ConvergenceControl()
    offsets = tuple(float(s) for s in offsets)
    if not all(math.isfinite(s) and s > 0 for s in offsets):
        raise DomainError("offsets must be positive and finite")
    center_est = converge_lambda_max(u0_star, ctrl)
    c = center_est.lambda_max
    res, bars = [0.0], [0.0]
    for s in offsets:
        plus = converge_lambda_max(u0_star + s, ctrl)
        minus = converge_lambda_max(u0_star - s, ctrl)
        res.append((plus.lambda_max - c) + (minus.lambda_max - c))
        bars.append(plus.error_estimate + minus.error_estimate + 2 * center_est.error_estimate)
    return SymmetryReport(
        u0_star=float(u0_star),
        center=c,
        offsets=(0.0,) + offsets,
        residuals=tuple(res),
        error_bars=tuple(bars),
    )
