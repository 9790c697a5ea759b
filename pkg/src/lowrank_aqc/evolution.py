"""Scaled Schroedinger evolution i psi' = tau H(s) psi in reduced coordinates."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from ._kernels import UNDERFLOW, rk4_step_doubling
from .reduction import ReducedSystem
from .schedules import Linear, Schedule, SmoothSchedule

DEFAULT_SAMPLES = 2048
H_MIN = 1e-14


class IntegrationError(RuntimeError):
    def __init__(self, message: str, s: float | None = None):
        super().__init__(message if s is None else f"{message} at s={s:.17g}")
        self.s = s


@dataclass(frozen=True, eq=False)
class EvolutionResult:
    """Sampled trajectory plus overlap diagnostics.

    ``states`` has shape (len(s), k); ``gauge`` is "psi" for the Schroedinger
    solution and "phi" after :func:`gauge_transform`.
    """

    tau: float
    s: np.ndarray
    states: np.ndarray
    pf_norm: np.ndarray
    qf_norm: np.ndarray
    overlap: np.ndarray
    norm_drift: float
    steps: int = 0
    gauge: str = "psi"

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def write_csv(self, path: str | Path) -> None:
        k = self.states.shape[1]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["s"] + [f"{p}{j}" for j in range(k) for p in ("re", "im")]
                       + ["pf_norm", "qf_norm", "overlap"])
            for i, s in enumerate(self.s):
                row = [repr(float(s))]
                for z in self.states[i]:
                    row += [repr(float(z.real)), repr(float(z.imag))]
                row += [repr(float(self.pf_norm[i])), repr(float(self.qf_norm[i])), repr(float(self.overlap[i]))]
                w.writerow(row)


def _sample_grid(samples) -> np.ndarray:
    if samples is None:
        samples = DEFAULT_SAMPLES
    if np.isscalar(samples):
        grid = np.linspace(0.0, 1.0, max(int(samples), 2))
    else:
        grid = np.unique(np.concatenate([np.asarray(samples, dtype=float), [0.0, 1.0]]))
        if grid[0] < 0.0 or grid[-1] > 1.0:
            raise ValueError("sample points must lie in [0, 1]")
    return grid


def _result(rs: ReducedSystem, tau, s, states, drift, steps) -> EvolutionResult:
    pf = np.linalg.norm(states @ rs.P_F.T, axis=1)
    qf = np.linalg.norm(states @ rs.Q_F.T, axis=1)
    ov = np.abs(states @ rs.psi.conj())
    return EvolutionResult(float(tau), s, states, pf, qf, ov, float(drift), int(steps))


def evolve_piecewise(rs: ReducedSystem, f: Schedule, tau: float, samples=None) -> EvolutionResult:
    """Exact propagation through constant segments; boundary jumps are instantaneous."""
    if not f.piecewise_constant:
        raise TypeError(f"evolve_piecewise needs a piecewise-constant schedule, got {f.kind}")
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    grid = _sample_grid(samples)
    states = np.empty((grid.size, rs.k), dtype=complex)
    y = rs.psi.astype(complex)
    for a, b, v in f.segments():
        lam, U = np.linalg.eigh(rs.hamiltonian(v))
        c = U.conj().T @ y
        last = b == 1.0
        mask = (grid >= a) & ((grid <= b) if last else (grid < b))
        dt = grid[mask] - a
        states[mask] = (U @ (c[:, None] * np.exp(-1j * tau * np.outer(lam, dt)))).T
        y = U @ (c * np.exp(-1j * tau * (b - a) * lam))
    drift = float(np.abs(np.linalg.norm(states, axis=1) - 1.0).max())
    return _result(rs, tau, grid, states, drift, len(f.segments()))


def _integrate(A0, D, f: SmoothSchedule, tau, y0, grid, tol):
    if not 1e-12 <= tol <= 1e-6:
        raise ValueError("tol must lie in [1e-12, 1e-6]")
    if tau == 0:
        return np.tile(y0, (grid.size, 1)), 0.0, 0
    hnorm = max(np.linalg.norm(A0, 2), np.linalg.norm(A0 + D, 2), np.linalg.norm(D, 2), 1e-300)
    h_max = min(1.0 / 64.0, 1.0 / (tau * hnorm))
    # tolerance per unit of accumulated phase keeps the norm drift near tol
    tol_step = tol / max(1.0, tau * hnorm)
    states, steps, drift, status, s_fail = rk4_step_doubling(
        np.ascontiguousarray(A0, dtype=complex), np.ascontiguousarray(D, dtype=complex), float(tau),
        f.breaks, f.coeffs, np.ascontiguousarray(y0, dtype=complex), grid, tol_step, h_max, H_MIN)
    if status == UNDERFLOW:
        raise IntegrationError("step-size underflow", s_fail)
    return states, drift, steps


def evolve_smooth(rs: ReducedSystem, f: Schedule, tau: float, tol: float = 1e-10,
                  samples=None) -> EvolutionResult:
    """Adaptive RK4 (step doubling) without renormalization."""
    if not isinstance(f, SmoothSchedule):
        raise TypeError(f"evolve_smooth needs a continuous schedule, got {f.kind}")
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    grid = _sample_grid(samples)
    states, drift, steps = _integrate(rs.A_I, rs.A_F - rs.A_I, f, tau, rs.psi, grid, tol)
    return _result(rs, tau, grid, states, drift, steps)


def evolve(rs: ReducedSystem, f: Schedule, tau: float, tol: float = 1e-10, samples=None) -> EvolutionResult:
    if f.piecewise_constant:
        return evolve_piecewise(rs, f, tau, samples)
    return evolve_smooth(rs, f, tau, tol, samples)


def gauge_transform(result: EvolutionResult, f: Schedule, E_I: float, tau: float) -> EvolutionResult:
    """phi(s) = exp(i h(s) tau E_I) psi(s), h(s) = int_0^s (1 - f)."""
    if result.gauge != "psi":
        raise ValueError("result is already gauge transformed")
    phase = np.exp(1j * np.asarray(f.h(result.s)) * tau * E_I)
    states = result.states * phase[:, None]
    overlap = np.abs(states @ (result.states[0] / np.linalg.norm(result.states[0])).conj())
    return replace(result, states=states, overlap=overlap, gauge="phi")


class TwoLevelModel:
    """K(s) = [[1 - f, delta f], [delta f, f]]."""

    def __init__(self, delta: float, schedule: SmoothSchedule | None = None):
        if not 0.0 < delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {delta}")
        self.delta = float(delta)
        self.schedule = Linear() if schedule is None else schedule
        self.A0 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
        self.D = np.array([[-1.0, delta], [delta, 1.0]], dtype=complex)

    def K(self, s: float) -> np.ndarray:
        f = float(self.schedule.value(s))
        return np.array([[1.0 - f, self.delta * f], [self.delta * f, f]])

    def gap_at(self, f: float) -> float:
        return math.sqrt((1.0 - 2.0 * f) ** 2 + 4.0 * self.delta ** 2 * f ** 2)

    def min_gap(self) -> tuple[float, float]:
        """Minimum over the path of the level splitting; returns (gap, f at minimum).

        Every schedule sweeps f over all of [0, 1], so the minimum is over f.
        """
        res = minimize_scalar(self.gap_at, bounds=(0.0, 1.0), method="bounded",
                              options={"xatol": 1e-12})
        return float(res.fun), float(res.x)

    @staticmethod
    def ground(K: np.ndarray) -> np.ndarray:
        return np.linalg.eigh(K)[1][:, 0].astype(complex)


class LZResult(NamedTuple):
    population: float
    min_gap: float


def lz_evolve(model: TwoLevelModel, tau: float, tol: float = 1e-10) -> LZResult:
    """Final ground-state population after sweeping K(s) in time tau."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    y0 = model.ground(model.K(0.0))
    g1 = model.ground(model.K(1.0))
    if tau == 0:
        y1 = y0
    else:
        states, _, _ = _integrate(model.A0, model.D, model.schedule, tau, y0, np.array([0.0, 1.0]), tol)
        y1 = states[-1]
    return LZResult(float(abs(np.vdot(g1, y1)) ** 2), model.min_gap()[0])


def lz_gap_closed_form(delta: float) -> float:
    return delta / math.sqrt(1.0 + delta ** 2)
