"""Eigenvalue curves along affine Hamiltonian paths and avoided-crossing gaps.

The block spectrum of a(t) A_I + b(t) A_F is merged with the symbolic zero
eigenvalue of multiplicity N - k coming from the orthogonal complement of K.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .instances import AffinePath
from .reduction import ReducedSystem

CLOSED_TOL = 1e-14


@dataclass(frozen=True)
class Crossing:
    """An avoided crossing between merged levels ``pair`` and ``pair + 1``."""

    pair: int
    t: float
    gap: float
    width: float
    true_crossing: bool = False


@dataclass(frozen=True, eq=False)
class EigencurveSet:
    rs: ReducedSystem
    path: AffinePath
    t: np.ndarray
    block: np.ndarray  # (grid, k) sorted eigenvalues of the reduced block
    zero_mult: int

    def levels(self, n: int = 3) -> np.ndarray:
        """Lowest n levels of the full N x N spectrum at every grid point."""
        return np.array([_merged_low(b, self.zero_mult, n) for b in self.block])

    @property
    def gap(self) -> np.ndarray:
        L = self.levels(2)
        return L[:, 1] - L[:, 0]

    @property
    def Delta(self) -> np.ndarray:
        L = self.levels(3)
        return L[:, 2] - L[:, 1]

    def counts(self) -> np.ndarray:
        return np.full(self.t.size, self.block.shape[1] + self.zero_mult)

    def crossings(self, n_levels: int = 3, depth: float = 0.1) -> list[Crossing]:
        return find_crossings(self, n_levels, depth)

    def write_csv(self, path: str | Path) -> None:
        k = self.block.shape[1]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + [f"lambda{j + 1}" for j in range(k)] + ["zero_multiplicity", "g", "Delta"])
            g, D = self.gap, self.Delta
            for i, t in enumerate(self.t):
                w.writerow([repr(float(t))] + [repr(float(x)) for x in self.block[i]]
                           + [self.zero_mult, repr(float(g[i])), repr(float(D[i]))])


def _merged_low(block: np.ndarray, zero_mult: int, n: int) -> np.ndarray:
    vals = np.sort(np.concatenate([block, np.zeros(min(zero_mult, n))]))
    return vals[:n]


def _block_eigs(rs: ReducedSystem, path: AffinePath, t: float) -> np.ndarray:
    return np.linalg.eigvalsh(path.a(t) * rs.A_I + path.b(t) * rs.A_F)


def level_gap(rs: ReducedSystem, path: AffinePath, t: float, pair: int = 0) -> float:
    L = _merged_low(_block_eigs(rs, path, t), rs.N - rs.k, pair + 2)
    return float(L[pair + 1] - L[pair])


def eigencurves(rs: ReducedSystem, path: AffinePath, grid: int) -> EigencurveSet:
    if grid < 2:
        raise ValueError("grid must be >= 2")
    t = np.linspace(path.t0, path.t1, int(grid))
    H = path.a(t)[:, None, None] * rs.A_I + path.b(t)[:, None, None] * rs.A_F
    return EigencurveSet(rs, path, t, np.linalg.eigvalsh(H), rs.N - rs.k)


def _refine(rs: ReducedSystem, path: AffinePath, t: np.ndarray, i: int, pair: int) -> tuple[float, float]:
    """Golden-section search on the bracket (t[i-1], t[i], t[i+1])."""
    fun = lambda x: level_gap(rs, path, x, pair)
    res = minimize_scalar(fun, bracket=(t[i - 1], t[i], t[i + 1]), method="golden",
                          options={"xtol": 1e-10})
    x = float(np.clip(res.x, t[i - 1], t[i + 1]))
    return x, fun(x)


def _width(rs, path, t: np.ndarray, gaps: np.ndarray, i: int, t0: float, g: float, pair: int) -> float:
    """Parameter length of the region around t0 where the pair is within 2g.

    Walks the grid outward from index i to bracket each edge, then solves for
    it; an edge that never leaves the band is clipped at the path end.
    """
    fun = lambda x: level_gap(rs, path, x, pair) - 2.0 * g
    j = i
    while j > 0 and gaps[j] <= 2.0 * g:
        j -= 1
    left = brentq(fun, t[j], t0) if gaps[j] > 2.0 * g else float(t[0])
    j = i
    while j < t.size - 1 and gaps[j] <= 2.0 * g:
        j += 1
    right = brentq(fun, t0, t[j]) if gaps[j] > 2.0 * g else float(t[-1])
    return right - left


def find_crossings(curves: EigencurveSet, n_levels: int = 3, depth: float = 0.1) -> list[Crossing]:
    """Interior local minima of adjacent-level gaps that dip below ``depth``
    times the largest gap of that level pair along the path."""
    rs, path, t = curves.rs, curves.path, curves.t
    L = curves.levels(n_levels)
    out = []
    for pair in range(n_levels - 1):
        gaps = L[:, pair + 1] - L[:, pair]
        scale = gaps.max()
        for i in range(1, t.size - 1):
            if not (gaps[i] <= gaps[i - 1] and gaps[i] < gaps[i + 1]):
                continue
            if gaps[i] > depth * scale:
                continue
            if gaps[i] < CLOSED_TOL:
                out.append(Crossing(pair, float(t[i]), float(gaps[i]), 0.0, True))
                continue
            x, g = _refine(rs, path, t, i, pair)
            w = _width(rs, path, t, gaps, i, x, g, pair)
            out.append(Crossing(pair, x, g, w, g < CLOSED_TOL))
    return sorted(out, key=lambda c: c.t)


@dataclass(frozen=True)
class MinGap:
    g: float
    s0: float
    Delta: float
    true_crossing: bool = False

    @property
    def tau1(self) -> float:
        return 1.0 / self.Delta

    def tau2(self, fdot: float) -> float:
        """Crossing-traversal scale fdot / g^2, the minimal gap standing in for
        the two-level coupling."""
        return fdot / self.g ** 2


def min_gap(curves: EigencurveSet) -> MinGap:
    """Smallest ground-state gap along the path, refined by golden section."""
    rs, path, t = curves.rs, curves.path, curves.t
    gaps = curves.gap
    i = int(np.argmin(gaps))
    if gaps[i] < CLOSED_TOL:
        return MinGap(float(gaps[i]), float(t[i]), float(curves.Delta[i]), True)
    if 0 < i < t.size - 1:
        x, g = _refine(rs, path, t, i, 0)
    else:
        x, g = float(t[i]), float(gaps[i])
    L = _merged_low(_block_eigs(rs, path, x), rs.N - rs.k, 3)
    return MinGap(g, x, float(L[2] - L[1]), g < CLOSED_TOL)


def gap_scaling_slope(Ns, gaps) -> float:
    """Least-squares slope of log(gap) against log(N)."""
    return float(np.polyfit(np.log(np.asarray(Ns, float)), np.log(np.asarray(gaps, float)), 1)[0])
