"""Quadrature grids on ``[u0, u_max]`` and the symmetrized Nystrom matrix."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError
from .kernel import kernel_matrix

UNIFORM = "uniform-midpoint"
GAUSS_LEGENDRE = "composite-gauss-legendre"
SCHEMES = (UNIFORM, GAUSS_LEGENDRE)

# rows per assembly block; bounds the temporaries to a few tens of MB
_BLOCK_ROWS = 512


@dataclass(frozen=True)
class OperatorSpec:
    """One truncated, discretized instance of the backflow eigenproblem.

    ``panel_order`` is only used by the composite Gauss-Legendre scheme.
    """

    u0: float
    u_max: float
    n: int
    scheme: str = UNIFORM
    panel_order: int = 8

    def __post_init__(self):
        if not (math.isfinite(self.u0) and math.isfinite(self.u_max)):
            raise DomainError("u0 and u_max must be finite")
        if self.u_max <= self.u0:
            raise DomainError(f"u_max ({self.u_max}) must exceed u0 ({self.u0})")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"node count must be a positive integer, got {self.n}")
        if self.scheme not in SCHEMES:
            raise DomainError(f"unknown quadrature scheme {self.scheme!r}")
        if self.panel_order < 1:
            raise DomainError("panel_order must be positive")

    @property
    def length(self) -> float:
        return self.u_max - self.u0


@dataclass(frozen=True)
class QuadratureGrid:
    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.nodes)

    @property
    def spacing(self) -> float:
        """Largest gap between neighbouring nodes."""
        if len(self.nodes) < 2:
            return float(self.weights[0])
        return float(np.max(np.diff(self.nodes)))


@dataclass(frozen=True)
class DiscretizedOperator:
    matrix: np.ndarray = field(repr=False)
    grid: QuadratureGrid
    spec: OperatorSpec

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def build_grid(spec: OperatorSpec) -> QuadratureGrid:
    """Nodes and weights for ``spec``.

    The midpoint rule uses exactly ``spec.n`` nodes. The composite
    Gauss-Legendre rule uses ``ceil(n / q)`` equal panels of ``q`` points,
    so its node count is rounded up to a multiple of ``q``.
    """
    if spec.scheme == UNIFORM:
        h = spec.length / spec.n
        nodes = spec.u0 + (np.arange(spec.n) + 0.5) * h
        weights = np.full(spec.n, h)
    else:
        q = spec.panel_order
        panels = -(-spec.n // q)
        x, w = np.polynomial.legendre.leggauss(q)
        edges = np.linspace(spec.u0, spec.u_max, panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        weights = (half[:, None] * w[None, :]).ravel()
    return QuadratureGrid(nodes=nodes, weights=weights)


def assemble_operator(grid: QuadratureGrid, spec: OperatorSpec) -> DiscretizedOperator:
    """Assemble ``M[i, j] = sqrt(w_i w_j) K(u_i, u_j)``.

    This is similar to the plain Nystrom matrix ``w_j K(u_i, u_j)`` (conjugate
    by ``diag(sqrt(w))``), so it has the same eigenvalues, but it is exactly
    symmetric.
    """
    u = np.asarray(grid.nodes, dtype=float)
    w = np.asarray(grid.weights, dtype=float)
    if u.shape != w.shape or u.ndim != 1:
        raise DomainError("grid nodes and weights must be 1-D arrays of equal length")
    if np.any(u < spec.u0) or np.any(u > spec.u_max):
        raise DomainError("grid nodes fall outside the operator interval")
    n = len(u)
    matrix = np.empty((n, n))
    for start in range(0, n, _BLOCK_ROWS):
        stop = min(start + _BLOCK_ROWS, n)
        sw = np.sqrt(w[start:stop, None] * w[None, :])
        matrix[start:stop] = sw * kernel_matrix(u[start:stop], u)
    matrix.setflags(write=False)
    return DiscretizedOperator(matrix=matrix, grid=grid, spec=spec)


def discretize(spec: OperatorSpec) -> DiscretizedOperator:
    """Shorthand for ``assemble_operator(build_grid(spec), spec)``."""
    return assemble_operator(build_grid(spec), spec)
