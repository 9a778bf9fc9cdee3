"""Discrete fractional integral/derivative operators (Grunwald-Letnikov).

Operators act on uniformly sampled signals with a sliding, truncated memory
window (short-memory principle). Weights follow the generalized binomial
recurrence

    w_0 = 1,   w_j = w_{j-1} * (1 - (alpha + 1) / j),

which realizes w_j = (-1)^j * C(alpha, j). A derivative of order mu uses
alpha = +mu with the dt^(-mu) prefactor; an integral of order lam uses
alpha = -lam with dt^(+lam).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class GLWeights:
    """Precomputed Grunwald-Letnikov weights for one order and spacing."""

    order: float
    weights: np.ndarray  # length n+1, w[0] = 1
    dt: float


@dataclass
class SampleWindow:
    """Uniformly spaced samples, most recent last."""

    samples: list[float] = field(default_factory=list)
    dt: float = 1e-3

    def __len__(self) -> int:
        return len(self.samples)


def _compute_weights(alpha: float, n: int) -> np.ndarray:
    j = np.arange(1, n + 1)
    w = np.concatenate(([1.0], np.cumprod(1.0 - (alpha + 1.0) / j)))
    w.setflags(write=False)
    return w


# Per-order table grown geometrically so repeated evaluations over a growing
# window stay amortized O(1) per sample.
_tables: dict[float, np.ndarray] = {}


def _weight_array(alpha: float, n: int) -> np.ndarray:
    w = _tables.get(alpha)
    if w is None or len(w) < n + 1:
        size = max(n + 1, 256, 0 if w is None else 2 * len(w))
        w = _compute_weights(alpha, size - 1)
        _tables[alpha] = w
    return w[: n + 1]


def gl_weights(alpha: float, n: int, dt: float) -> GLWeights:
    """Weights w_0..w_n for order alpha at spacing dt."""
    if alpha == 0:
        raise ValueError("order must be nonzero")
    if n < 0:
        raise ValueError(f"weight count must be non-negative, got {n}")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return GLWeights(order=alpha, weights=_weight_array(alpha, n), dt=dt)


def _gl_sum(window: SampleWindow, alpha: float) -> float:
    if len(window) == 0:
        raise ValueError("empty sample window")
    n = len(window) - 1
    w = _weight_array(alpha, n)
    # x[last - j] pairs with w[j]
    x = np.asarray(window.samples[::-1])
    return float(np.dot(w, x))


def frac_derivative(window: SampleWindow, mu: float) -> float:
    """GL fractional derivative of order mu in (0,1), truncated to the window."""
    if not (0 < mu < 1):
        raise ValueError(f"derivative order must be in (0,1), got {mu}")
    return window.dt ** (-mu) * _gl_sum(window, mu)


def frac_integral(window: SampleWindow, lam: float) -> float:
    """GL fractional integral of order lam in (0,1), truncated to the window."""
    if not (0 < lam < 1):
        raise ValueError(f"integral order must be in (0,1), got {lam}")
    return window.dt**lam * _gl_sum(window, -lam)
