"""Gaussian weight parameters shared by the diagnostics, Appell and operator code."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class WeightParams:
    """Endpoint decay scales ``alpha, beta`` and a standalone exponent ``gamma``."""

    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 0.0

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("alpha and beta must be strictly positive")
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")


def mu(t, w: WeightParams):
    """``1 / (alpha (1-t) + beta t)``; vectorized over ``t``."""
    t = np.asarray(t, dtype=float)
    out = 1.0 / (w.alpha * (1.0 - t) + w.beta * t)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ParabolicWeight:
    """Time-shrinking Gaussian weight ``q(t)|x|^2`` for dissipative flows.

    ``q(t) = gamma a / (a + 4 gamma (a^2+b^2) t)`` solves
    ``q' = -4 (a + b^2/a) q^2`` with ``q(0) = gamma``.
    """

    gamma: float
    a: float
    b: float = 0.0

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("the parabolic weight needs a > 0")
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")

    def q(self, t):
        t = np.asarray(t, dtype=float)
        return self.gamma * self.a / (self.a + 4.0 * self.gamma * (self.a ** 2 + self.b ** 2) * t)

    def q_derivs(self, t: float) -> tuple:
        q = float(self.q(t))
        c = 4.0 * (self.a ** 2 + self.b ** 2) / self.a
        dq = -c * q * q
        return q, dq, -2.0 * c * q * dq
