"""Full-space reference evolution on dense N x N matrices (oracle scale only)."""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .instances import Instance
from .schedules import Schedule


def dense_evolve(H_I: np.ndarray, H_F: np.ndarray, psi: np.ndarray, f: Schedule, tau: float,
                 samples: np.ndarray, rtol: float = 1e-12, atol: float = 1e-13) -> np.ndarray:
    """States at ``samples`` (sorted, in [0, 1], starting at 0) for i psi' = tau H(s) psi.

    Piecewise-constant schedules use matrix exponentials per segment; smooth
    ones use DOP853 at tight tolerances.
    """
    samples = np.asarray(samples, dtype=float)
    psi = np.asarray(psi, dtype=complex)
    if f.piecewise_constant:
        out = np.empty((samples.size, psi.size), dtype=complex)
        y = psi
        for a, b, v in f.segments():
            H = (1.0 - v) * H_I + v * H_F
            last = b == 1.0
            for i in np.flatnonzero((samples >= a) & ((samples <= b) if last else (samples < b))):
                out[i] = expm(-1j * tau * (samples[i] - a) * H) @ y
            y = expm(-1j * tau * (b - a) * H) @ y
        return out

    def rhs(s, y):
        x = float(f.value(s))
        return -1j * tau * ((1.0 - x) * (H_I @ y) + x * (H_F @ y))

    sol = solve_ivp(rhs, (0.0, 1.0), psi, method="DOP853", rtol=rtol, atol=atol, t_eval=samples)
    if not sol.success:
        raise RuntimeError(sol.message)
    return sol.y.T


def dense_instance_evolve(inst: Instance, f: Schedule, tau: float, samples) -> np.ndarray:
    return dense_evolve(inst.H_I.to_dense(), inst.H_F.to_dense(), inst.psi_I.to_dense(), f, tau, samples)
