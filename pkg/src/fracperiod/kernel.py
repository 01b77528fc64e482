"""Fractional-sum kernel coefficients.

The weight of the history term ``j`` in the update for ``x(t+1)`` is
``k[t - j]`` with

    k_m = Gamma(m + alpha) / (Gamma(alpha) Gamma(m + 1)),

which is also the binomial family ``(-1)^m binom(-alpha, m)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


class InvalidOrderError(ValueError):
    """Raised when a fractional order lies outside ``(0, 1]``."""


@dataclass(frozen=True)
class FractionalOrder:
    """Order ``alpha`` of the Caputo-like difference, ``0 < alpha <= 1``."""

    alpha: float

    def __post_init__(self) -> None:
        a = float(self.alpha)
        if not math.isfinite(a) or not 0.0 < a <= 1.0:
            raise InvalidOrderError(f"fractional order must lie in (0, 1], got {self.alpha!r}")
        object.__setattr__(self, "alpha", a)

    def __float__(self) -> float:
        return self.alpha

    @property
    def is_classical(self) -> bool:
        return self.alpha == 1.0


def as_order(alpha: FractionalOrder | float) -> FractionalOrder:
    if isinstance(alpha, FractionalOrder):
        return alpha
    return FractionalOrder(alpha)


@dataclass(frozen=True)
class KernelTable:
    """Immutable table ``k_0..k_N`` for a given order."""

    alpha: FractionalOrder
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        self.coeffs.setflags(write=False)

    def __len__(self) -> int:
        return self.coeffs.shape[0]

    def __getitem__(self, m):
        return self.coeffs[m]

    @property
    def N(self) -> int:
        return self.coeffs.shape[0] - 1


@lru_cache(maxsize=32)
def _recurrence(alpha: float, N: int) -> np.ndarray:
    # k_m = k_{m-1} (1 - (1 - alpha)/m), with the product carried as a sum of
    # log1p terms; the plain product drifts by ~1e-12 over 1e4 steps
    if alpha == 1.0:
        k = np.ones(N + 1)
    else:
        m = np.arange(1, N + 1, dtype=float)
        logs = np.empty(N + 1)
        logs[0] = 0.0
        logs[1:] = np.log1p(-(1.0 - alpha) / m)
        k = np.exp(_compensated_cumsum(logs))
    k.setflags(write=False)
    return k


def _compensated_cumsum(x: np.ndarray) -> np.ndarray:
    """Kahan-compensated running sum."""
    out = np.empty_like(x)
    total = 0.0
    comp = 0.0
    for i, v in enumerate(x.tolist()):
        y = v - comp
        t = total + y
        comp = (t - total) - y
        total = t
        out[i] = total
    return out


def kernel_table(alpha: FractionalOrder | float, N: int) -> KernelTable:
    """Return the kernel coefficients ``k_0..k_N``.

    >>> kernel_table(0.5, 3).coeffs.tolist()
    [1.0, 0.5, 0.375, 0.3125]
    """
    order = as_order(alpha)
    if N < 0:
        raise ValueError(f"N must be non-negative, got {N}")
    return KernelTable(order, _recurrence(order.alpha, int(N)))


def kernel_coeff_lgamma(alpha: float, m: np.ndarray | int) -> np.ndarray:
    """Closed form of ``k_m`` through double-precision log-gamma.

    A quick cross-check only: the subtraction of large log-gamma values
    costs about ``1e-11`` relative accuracy by ``m = 1e4``.
    """
    from scipy.special import gammaln

    m = np.asarray(m, dtype=float)
    return np.exp(gammaln(m + alpha) - gammaln(alpha) - gammaln(m + 1.0))


def alternating_kernel_sum(alpha: FractionalOrder | float, N: int) -> float:
    """Average of the partial sums ``S_N`` and ``S_{N+1}`` of ``sum (-1)^m k_m``.

    The series is the generating function ``(1 - x)^(-alpha)`` at ``x = -1``
    and the average converges to ``2^(-alpha)``.
    """
    order = as_order(alpha)
    if N < 2:
        raise ValueError(f"N must be at least 2, got {N}")
    k = kernel_table(order, N + 1).coeffs
    signs = np.where(np.arange(N + 2) % 2 == 0, 1.0, -1.0)
    partial = np.cumsum(signs * k)
    return 0.5 * (partial[N] + partial[N + 1])
