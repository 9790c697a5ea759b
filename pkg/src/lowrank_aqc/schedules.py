"""Control functions f: [0, 1] -> [0, 1] for H(s) = (1 - f(s)) H_I + f(s) H_F.

Boundary values f(0) = 0 and f(1) = 1 are part of every schedule. Piecewise
constant schedules reach them as instantaneous jumps that take no evolution
time. Smooth schedules are exposed as piecewise cubics so the compiled
integrator can evaluate them without calling back into Python.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator, PPoly

SLOPE_TOL = 1e-9


class ScheduleError(ValueError):
    pass


class Schedule:
    kind: str = "abstract"
    piecewise_constant: bool = False

    def __init__(self, kappa: float | None = None):
        if kappa is not None and kappa <= 0:
            raise ScheduleError("kappa must be positive")
        self.kappa = kappa

    def __call__(self, s):
        return self.value(s)

    def value(self, s):
        raise NotImplementedError

    def derivative(self, s):
        raise NotImplementedError

    def h(self, s):
        """Integral of 1 - f over [0, s]."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


class SmoothSchedule(Schedule):
    """Continuous schedule given by a C^1 piecewise cubic."""

    def __init__(self, ppoly: PPoly, kappa: float | None = None):
        super().__init__(kappa)
        if ppoly.c.shape[0] > 4:
            raise ScheduleError("smooth schedules are at most cubic per piece")
        c = np.zeros((4, ppoly.c.shape[1]))
        c[4 - ppoly.c.shape[0]:] = ppoly.c
        self._pp = PPoly(c, ppoly.x)
        self._dpp = self._pp.derivative()
        self._ipp = self._pp.antiderivative()
        ends = self._pp(np.array([0.0, 1.0]))
        if abs(ends[0]) > 1e-12 or abs(ends[1] - 1.0) > 1e-12:
            raise ScheduleError(f"boundary conditions violated: f(0)={ends[0]}, f(1)={ends[1]}")
        grid = np.linspace(0.0, 1.0, 4097)
        if np.any(np.diff(self._pp(grid)) < -1e-12):
            raise ScheduleError("schedule is not monotone nondecreasing")

    @property
    def breaks(self) -> np.ndarray:
        return np.ascontiguousarray(self._pp.x, dtype=float)

    @property
    def coeffs(self) -> np.ndarray:
        return np.ascontiguousarray(self._pp.c, dtype=float)

    def value(self, s):
        return self._pp(np.clip(s, 0.0, 1.0))

    def derivative(self, s):
        return self._dpp(np.clip(s, 0.0, 1.0))

    def h(self, s):
        s = np.clip(s, 0.0, 1.0)
        return s - self._ipp(s)


class Linear(SmoothSchedule):
    kind = "linear"

    def __init__(self, kappa: float | None = 1.0):
        super().__init__(PPoly(np.array([[1.0], [0.0]]), np.array([0.0, 1.0])), kappa)

    def to_dict(self):
        return {"kind": self.kind}


class SmoothTable(SmoothSchedule):
    """Monotone samples (s_i, f_i) joined by a shape-preserving cubic."""

    kind = "smooth-table"

    def __init__(self, s: Sequence[float], f: Sequence[float], kappa: float | None = None):
        s = np.asarray(s, dtype=float)
        f = np.asarray(f, dtype=float)
        if s.shape != f.shape or s.size < 2:
            raise ScheduleError("need matching sample arrays of length >= 2")
        if s[0] != 0.0 or s[-1] != 1.0 or np.any(np.diff(s) <= 0):
            raise ScheduleError("sample abscissae must increase strictly from 0 to 1")
        if f[0] != 0.0 or f[-1] != 1.0:
            raise ScheduleError("boundary conditions f(0)=0, f(1)=1 violated")
        if np.any(np.diff(f) < 0):
            raise ScheduleError("schedule is not monotone nondecreasing")
        self.samples = (s, f)
        super().__init__(PchipInterpolator(s, f), kappa)

    @classmethod
    def from_function(cls, func, n: int = 65, kappa: float | None = None) -> "SmoothTable":
        s = np.linspace(0.0, 1.0, n)
        f = np.asarray(func(s), dtype=float)
        f[0], f[-1] = 0.0, 1.0
        return cls(s, f, kappa)

    @classmethod
    def random(cls, rng: np.random.Generator, n_knots: int = 6) -> "SmoothTable":
        """Random monotone table with strictly increasing interior values."""
        s = np.concatenate([[0.0], np.sort(rng.uniform(0.05, 0.95, n_knots)), [1.0]])
        f = np.concatenate([[0.0], np.sort(rng.uniform(0.0, 1.0, n_knots)), [1.0]])
        return cls(s, f)

    @classmethod
    def load(cls, path: str | Path, kappa: float | None = None) -> "SmoothTable":
        data = np.loadtxt(path, ndmin=2)
        return cls(data[:, 0], data[:, 1], kappa)

    def to_dict(self):
        return {"kind": self.kind, "s": self.samples[0].tolist(), "f": self.samples[1].tolist(),
                "kappa": self.kappa}


class PiecewiseConstant(Schedule):
    """f = values[i] on the open interval (edges[i], edges[i+1])."""

    kind = "piecewise-constant"
    piecewise_constant = True

    def __init__(self, edges: Sequence[float], values: Sequence[float]):
        super().__init__(None)
        edges = np.asarray(edges, dtype=float)
        values = np.asarray(values, dtype=float)
        if edges.size != values.size + 1 or values.size == 0:
            raise ScheduleError("need len(edges) == len(values) + 1 >= 2")
        if edges[0] != 0.0 or edges[-1] != 1.0 or np.any(np.diff(edges) <= 0):
            raise ScheduleError("edges must increase strictly from 0 to 1")
        if np.any(values < 0) or np.any(values > 1) or np.any(np.diff(values) < 0):
            raise ScheduleError("values must be nondecreasing inside [0, 1]")
        self.edges = edges
        self.values = values

    def segments(self) -> list[tuple[float, float, float]]:
        return [(float(a), float(b), float(v)) for a, b, v in zip(self.edges[:-1], self.edges[1:], self.values)]

    def value(self, s):
        s = np.asarray(s, dtype=float)
        i = np.clip(np.searchsorted(self.edges, s, side="right") - 1, 0, self.values.size - 1)
        out = self.values[i]
        out = np.where(s <= 0.0, 0.0, out)
        out = np.where(s >= 1.0, 1.0, out)
        return out if out.ndim else float(out)

    def derivative(self, s):
        return np.zeros_like(np.asarray(s, dtype=float))

    def h(self, s):
        s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
        cum = np.concatenate([[0.0], np.cumsum((1.0 - self.values) * np.diff(self.edges))])
        i = np.clip(np.searchsorted(self.edges, s, side="right") - 1, 0, self.values.size - 1)
        return cum[i] + (1.0 - self.values[i]) * (s - self.edges[i])

    def to_dict(self):
        return {"kind": self.kind, "edges": self.edges.tolist(), "values": self.values.tolist()}


class DiabaticJump(PiecewiseConstant):
    """Jump instantly to alpha, dwell for the whole run, jump to 1."""

    kind = "diabatic-jump"

    def __init__(self, alpha: float):
        if not 0.0 < alpha < 1.0:
            raise ScheduleError(f"alpha must lie in (0, 1), got {alpha}")
        super().__init__([0.0, 1.0], [alpha])
        self.alpha = float(alpha)

    def to_dict(self):
        return {"kind": self.kind, "alpha": self.alpha}


def linear() -> Linear:
    return Linear()


def diabatic_jump(E_F: float) -> DiabaticJump:
    """Jump schedule at alpha = 1 / (1 - E_F); needs E_F < 0."""
    if not E_F < 0:
        raise ScheduleError(f"diabatic jump needs E_F < 0, got {E_F}")
    return DiabaticJump(1.0 / (1.0 - E_F))


def kappa_floor_check(f: Schedule, kappa: float, grid: int = 10_000) -> bool:
    if kappa <= 0:
        raise ScheduleError("kappa must be positive")
    s = np.linspace(0.0, 1.0, grid + 1)
    slopes = np.diff(np.asarray(f.value(s), dtype=float)) / np.diff(s)
    if np.any(slopes < -1e-12):
        raise ScheduleError("schedule is not monotone")
    return bool(np.all(slopes >= kappa - SLOPE_TOL))


def min_slope(f: Schedule, grid: int = 10_000) -> float:
    s = np.linspace(0.0, 1.0, grid + 1)
    return float(np.min(np.diff(np.asarray(f.value(s), dtype=float)) / np.diff(s)))


def schedule_from_dict(d: dict) -> Schedule:
    kind = d.get("kind")
    if kind == "linear":
        return Linear()
    if kind == "diabatic-jump":
        if "alpha" in d:
            return DiabaticJump(float(d["alpha"]))
        if "E_F" in d:
            return diabatic_jump(float(d["E_F"]))
        raise ScheduleError("schedule: diabatic-jump needs 'alpha' or 'E_F'")
    if kind == "piecewise-constant":
        return PiecewiseConstant(d["edges"], d["values"])
    if kind == "smooth-table":
        if "path" in d:
            return SmoothTable.load(d["path"], d.get("kappa"))
        return SmoothTable(d["s"], d["f"], d.get("kappa"))
    raise ScheduleError(f"schedule: unknown kind {kind!r}")
