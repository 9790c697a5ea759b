"""Problem instances: generalized unstructured search, the two-crossing
rank-2 example, and user-supplied sparse factors read from a JSON file."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .linalg import Combination, Dense, Indicator, Interval, LowRankHermitian, StructuredVector, Uniform


@dataclass(frozen=True)
class AffinePath:
    """H(t) = a(t) H_I + b(t) H_F with a, b affine in t, for t in [t0, t1]."""

    a0: float
    a1: float
    b0: float
    b1: float
    t0: float = 0.0
    t1: float = 1.0

    def a(self, t):
        return self.a0 + self.a1 * np.asarray(t, dtype=float)

    def b(self, t):
        return self.b0 + self.b1 * np.asarray(t, dtype=float)

    @classmethod
    def convex(cls) -> "AffinePath":
        return cls(1.0, -1.0, 0.0, 1.0)


class Instance(NamedTuple):
    H_I: LowRankHermitian
    H_F: LowRankHermitian
    psi_I: StructuredVector
    path: AffinePath


def gus_instance(N: int, marked: Sequence[int] | int) -> Instance:
    """Unstructured search: H_I = -|psi><psi| with psi uniform, H_F = -P_marked.

    ``marked`` is an index collection or a count m (marks indices 0..m-1).
    """
    N = int(N)
    if isinstance(marked, (int, np.integer)):
        marked = range(int(marked))
    marked = sorted(set(int(w) for w in marked))
    if not marked:
        raise ValueError("at least one marked item is required")
    if len(marked) > N or marked[0] < 0 or marked[-1] >= N:
        raise ValueError(f"marked indices must be a subset of [0, {N})")
    psi = Uniform(N)
    H_I = LowRankHermitian([-1.0], [psi])
    H_F = LowRankHermitian([-1.0] * len(marked), [Indicator(N, [w]) for w in marked], N)
    return Instance(H_I, H_F, psi, AffinePath.convex())


def figure1_instance(N: int) -> Instance:
    """Rank-2 pair with two avoided crossings along H(t) = H_I + 2t H_F.

    H_F = -|e1><e1| - |e2><e2|/2 and H_I = |phi1><phi1| - |phi2><phi2| where phi1
    is uniform and phi2 flips the sign of the second half of phi1.
    """
    N = int(N)
    if N % 2 or N < 4:
        raise ValueError(f"N must be even and >= 4, got {N}")
    a = 1.0 / math.sqrt(N)
    phi1 = Uniform(N)
    phi2 = Combination([(1.0, Interval(N, 0, N // 2, a)), (1.0, Interval(N, N // 2, N, -a))], N)
    e1, e2 = Indicator(N, [0]), Indicator(N, [1])
    H_I = LowRankHermitian([1.0, -1.0], [phi1, phi2])
    H_F = LowRankHermitian([-1.0, -0.5], [e1, e2])
    return Instance(H_I, H_F, phi2, AffinePath(1.0, 0.0, 0.0, 2.0))


def _random_factors(rng: np.random.Generator, N: int, rank: int) -> LowRankHermitian:
    X = rng.normal(size=(N, rank)) + 1j * rng.normal(size=(N, rank))
    Q = np.linalg.qr(X)[0]
    # calibrated, with a nondegenerate lowest level at -1
    lam = np.concatenate([[-1.0], rng.uniform(-0.9, 0.9, rank - 1)])
    return LowRankHermitian(lam, [Dense(Q[:, j]) for j in range(rank)])


def random_instance(rng: np.random.Generator, N: int, rank_I: int, rank_F: int) -> Instance:
    """Dense random factors; psi_I is the eigenvector of H_I at -1."""
    if not 1 <= rank_I <= N or not 1 <= rank_F <= N:
        raise ValueError("ranks must lie in [1, N]")
    H_I = _random_factors(rng, N, rank_I)
    H_F = _random_factors(rng, N, rank_F)
    return Instance(H_I, H_F, H_I.vectors[0], AffinePath.convex())


def _sparse_vector(N: int, entries) -> StructuredVector:
    if entries == "uniform":
        return Uniform(N)
    entries = sorted((int(i), float(re), float(im)) for i, re, im in entries)
    return Indicator(N, [e[0] for e in entries], [complex(e[1], e[2]) for e in entries])


def _factors(N: int, spec) -> LowRankHermitian:
    lam = [float(f["eigenvalue"]) for f in spec]
    vecs = [_sparse_vector(N, f["entries"]) for f in spec]
    return LowRankHermitian(lam, vecs, N)


def instance_from_dict(d: dict) -> Instance:
    kind = d.get("kind")
    if "N" not in d:
        raise ValueError("instance: missing field 'N'")
    N = int(d["N"])
    if kind == "gus":
        if "marked" in d:
            return gus_instance(N, d["marked"])
        if "m" in d:
            return gus_instance(N, int(d["m"]))
        raise ValueError("instance: gus needs 'marked' (list) or 'm' (count)")
    if kind == "figure1":
        return figure1_instance(N)
    if kind == "custom-factors":
        for key in ("H_I", "H_F", "psi_I"):
            if key not in d:
                raise ValueError(f"instance: custom-factors needs field '{key}'")
        path = d.get("path", {"a0": 1.0, "a1": -1.0, "b0": 0.0, "b1": 1.0})
        return Instance(_factors(N, d["H_I"]), _factors(N, d["H_F"]),
                        _sparse_vector(N, d["psi_I"]), AffinePath(**path))
    raise ValueError(f"instance: unknown kind {kind!r} (expected gus, figure1, custom-factors)")


def load_instance(path: str | Path) -> Instance:
    return instance_from_dict(json.loads(Path(path).read_text()))
