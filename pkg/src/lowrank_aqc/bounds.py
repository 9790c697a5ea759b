"""Closed-form running-time bounds."""

from __future__ import annotations

import math

DEFAULT_ROBUST_CONSTANT = 1e-2


class BoundError(ValueError):
    """The bound's hypotheses fail, so it says nothing."""


def tau_minus(delta1: float, delta2: float) -> float:
    """Lower bound (1 - 5 delta2) / (5 delta1) on the time to reach ||Q_F psi|| >= 1/5."""
    if delta2 >= 0.2:
        raise BoundError(f"bound is vacuous for delta2 >= 1/5 (got {delta2})")
    if delta1 <= 0:
        raise BoundError("delta1 must be positive")
    return (1.0 - 5.0 * delta2) / (5.0 * delta1)


def tau_plus(E_F: float, delta2: float, C: float) -> float:
    """Dwell time C (1 - E_F) / (|E_F| delta2) of the jump schedule."""
    if not 1.0 / 3.0 - 1e-12 <= C <= 2.0 / 3.0 + 1e-12:
        raise BoundError(f"C must lie in [1/3, 2/3], got {C}")
    if E_F >= 0:
        raise BoundError(f"needs E_F < 0, got {E_F}")
    if delta2 <= 0:
        raise BoundError("delta2 must be positive")
    return C * (1.0 - E_F) / (abs(E_F) * delta2)


def robust_epsilon(m: int, delta: float) -> float:
    return 1e-3 * m * delta


def tau_robust(m: int, delta: float, kappa: float, C_r: float = DEFAULT_ROBUST_CONSTANT) -> tuple[float, float]:
    """Robust-class threshold tau_r = -C_r kappa / (eps^2 ln eps), eps = 1e-3 m delta.

    C_r is not fixed by the theory; it is a free parameter here.
    """
    if not 0 < delta < 1 or kappa <= 0 or C_r <= 0 or m < 1:
        raise BoundError("need m >= 1, 0 < delta < 1, kappa > 0, C_r > 0")
    eps = robust_epsilon(m, delta)
    return tau_robust_from_eps(eps, kappa, C_r), eps


def tau_robust_from_eps(eps: float, kappa: float, C_r: float) -> float:
    if not 0 < eps < 1:
        raise BoundError(f"epsilon must lie in (0, 1), got {eps}")
    return -C_r * kappa / (eps ** 2 * math.log(eps))
