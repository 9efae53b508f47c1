"""Transport check: evolve the extremal packet and count what crosses x = 0.

This path never touches the kernel. It synthesizes the position-space
wave function from the momentum amplitude at both ends of the unit
dimensionless interval and integrates ``|psi(y)|**2`` over ``y < 0``.
Over the interval the free evolution multiplies the amplitude by
``exp(-2i u**2)``, so in the gauge used by the eigenproblem the packet is
``exp(+i u**2) phi(u)`` at the start and ``exp(-i u**2) phi(u)`` at the end.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .discretize import DiscretizedOperator, QuadratureGrid
from .eigensolve import SpectralResult
from .exceptions import DomainError, TruncationError

#: Default allowed probability outside the position window. The hard
#: momentum cutoff at ``u0`` gives |psi|**2 a 1/y**2 tail, so for states
#: with phi(u0) != 0 the leak over |y| > 200 is a few 1e-3.
LEAK_TOL = 5e-3
_CHUNK = 1024


@dataclass(frozen=True)
class ExtremalState:
    grid: QuadratureGrid
    amplitude: np.ndarray = field(repr=False)

    @property
    def norm(self):
        return float(np.sum(self.grid.weights * np.abs(self.amplitude) ** 2))


@dataclass(frozen=True)
class PositionGrid:
    half_width: float = 200.0
    spacing: float = 0.05

    def __post_init__(self):
        if not (self.half_width > 0 and self.spacing > 0):
            raise DomainError("position grid needs positive half_width and spacing")

    def points(self):
        m = int(round(self.half_width / self.spacing))
        return np.linspace(-self.half_width, self.half_width, 2 * m + 1)


@dataclass(frozen=True)
class TransportResult:
    p_left_initial: float
    p_left_final: float
    backflow: float
    lambda_reference: float
    discrepancy: float
    p_right_initial: float = math.nan
    p_right_final: float = math.nan
    leak: float = 0.0

    def as_dict(self):
        return dict(self.__dict__)


def extremal_state(result: SpectralResult, grid: QuadratureGrid) -> ExtremalState:
    """Momentum amplitude ``phi(u_i) = psi_i / sqrt(w_i)`` of the top eigenvector."""
    psi = np.asarray(result.top_eigenvector, dtype=float)
    if psi.shape != np.shape(grid.weights):
        raise DomainError(
            f"eigenvector length {psi.shape[0]} does not match grid size {len(grid)}")
    phi = psi / np.sqrt(grid.weights)
    return ExtremalState(grid=grid, amplitude=phi.astype(complex))


def _alias_free_width(grid):
    """Half-width beyond which a uniform grid's synthesis repeats itself."""
    w = np.asarray(grid.weights)
    if len(w) < 2:
        return math.inf
    gaps = np.diff(grid.nodes)
    if np.allclose(gaps, gaps[0], rtol=1e-9) and np.allclose(w, w[0], rtol=1e-9):
        return math.pi / gaps[0]
    return math.inf


def position_density(state: ExtremalState, y, phase_sign):
    """``|psi(y)|**2`` for the packet ``exp(phase_sign * i u**2) phi(u)``."""
    u = np.asarray(state.grid.nodes)
    coef = state.grid.weights * np.exp(phase_sign * 1j * u**2) * state.amplitude
    out = np.empty(len(y))
    for start in range(0, len(y), _CHUNK):
        yy = y[start:start + _CHUNK]
        out[start:start + _CHUNK] = np.abs(np.exp(1j * np.outer(yy, u)) @ coef) ** 2
    return out / (2.0 * math.pi)


def transport_backflow(state: ExtremalState, x_grid=None, lambda_reference=math.nan,
                       leak_tol=LEAK_TOL, end_phase=-1):
    """Probability that flows from ``y > 0`` to ``y < 0`` over the interval.

    ``end_phase=+1`` evaluates the end of the interval with the start phase,
    i.e. no evolution, which must give zero backflow.
    """
    x_grid = x_grid or PositionGrid()
    alias = _alias_free_width(state.grid)
    if x_grid.half_width > alias:
        raise DomainError(
            f"position half-width {x_grid.half_width} exceeds the alias-free range "
            f"{alias:.4g} of the momentum grid")
    y = x_grid.points()
    mid = len(y) // 2
    total = state.norm
    probs = []
    leak = 0.0
    for sign in (+1, end_phase):
        dens = position_density(state, y, sign)
        left = float(simpson(dens[: mid + 1], x=y[: mid + 1]))
        right = float(simpson(dens[mid:], x=y[mid:]))
        leak = max(leak, abs(total - left - right))
        probs.append((left, right))
    if leak > leak_tol:
        raise TruncationError(
            f"position window [-{x_grid.half_width}, {x_grid.half_width}] misses "
            f"probability {leak:.3e} > {leak_tol:.1e}", leak=leak)
    (l0, r0), (l1, r1) = probs
    backflow = l1 - l0
    return TransportResult(
        p_left_initial=l0,
        p_left_final=l1,
        backflow=backflow,
        lambda_reference=float(lambda_reference),
        discrepancy=abs(backflow - lambda_reference),
        p_right_initial=r0,
        p_right_final=r1,
        leak=leak,
    )


def rayleigh_quotient(op, state_vector) -> float:
    """Expected right-to-left flow ``v^T M v`` in the (unit) state ``v``."""
    matrix = op.matrix if isinstance(op, DiscretizedOperator) else np.asarray(op)
    v = np.asarray(state_vector, dtype=float)
    if v.ndim != 1 or v.shape[0] != matrix.shape[0]:
        raise DomainError(
            f"vector of length {v.shape[0] if v.ndim else 0} does not match "
            f"operator of size {matrix.shape[0]}")
    return float(v @ (matrix @ v))
