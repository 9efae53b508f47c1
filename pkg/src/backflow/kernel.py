"""Dimensionless backflow kernel and the physical-to-dimensionless map.

The kernel is

    K(u, v) = -(1/pi) * sin(u**2 - v**2) / (u - v)
            = -(1/pi) * (u + v) * sinc((u - v) * (u + v)),

and the second form is what gets evaluated, so the diagonal needs no
special casing and swapping ``u`` and ``v`` reproduces the same bits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError

#: Below this |x| the sinc is evaluated from its Taylor series.
SINC_SERIES_THRESHOLD = 1e-4


@dataclass(frozen=True)
class PhysicalParams:
    """Momentum cutoff ``p0``, interval length ``T``, mass ``m`` and ``hbar``.

    Any consistent unit system works; only ``T / (4 m hbar)`` enters.
    """

    p0: float
    T: float
    m: float
    hbar: float

    def __post_init__(self):
        for name in ("p0", "T", "m", "hbar"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        for name in ("T", "m", "hbar"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be strictly positive, got {getattr(self, name)}")


def sinc_stable(x):
    """Unnormalized sinc, ``sin(x)/x``, accurate near the origin.

    Accepts scalars or arrays. Non-finite input raises :class:`DomainError`.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("sinc_stable requires finite input")
    ax = np.abs(arr)
    small = ax < SINC_SERIES_THRESHOLD
    out = np.empty_like(ax)
    big = ~small
    out[big] = np.sin(ax[big]) / ax[big]
    x2 = ax[small] ** 2
    out[small] = 1.0 - x2 / 6.0 + x2 * x2 / 120.0
    if out.ndim == 0:
        return float(out)
    return out


def kernel_matrix(u, v):
    """Kernel values on the outer grid ``u[:, None], v[None, :]``."""
    u = np.asarray(u, dtype=float)[:, None]
    v = np.asarray(v, dtype=float)[None, :]
    s = u + v
    return -(s * sinc_stable((u - v) * s)) / np.pi


def kernel_eval(u, v):
    """Evaluate ``K(u, v)`` at a single point (or elementwise on arrays)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise DomainError("kernel arguments must be finite")
    s = u + v
    out = -(s * sinc_stable((u - v) * s)) / np.pi
    if np.ndim(out) == 0:
        return float(out)
    return out


def dimensionless_cutoff(params: PhysicalParams) -> float:
    """Return ``u0 = sqrt(T / (4 m hbar)) * p0``."""
    return math.sqrt(params.T / (4.0 * params.m * params.hbar)) * params.p0
