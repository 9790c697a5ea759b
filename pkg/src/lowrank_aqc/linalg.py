"""Implicit N-dimensional vectors and low-rank Hermitian operators.

Vectors are never materialized for structured forms: inner products between
intervals (uniform blocks) and sparse indicators are closed-form in N, so the
dimension is a parameter rather than an allocation.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

DENSE_LIMIT = 2**16
ORTHONORMAL_TOL = 1e-12


class DimensionError(ValueError):
    pass


class StructuredVector:
    """Base class; subclasses are immutable after construction."""

    __slots__ = ("N",)

    def __init__(self, N: int):
        N = int(N)
        if N <= 0:
            raise ValueError(f"dimension must be positive, got {N}")
        object.__setattr__(self, "N", N)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def atoms(self) -> list[tuple[complex, "StructuredVector"]]:
        return [(1.0 + 0j, self)]

    def to_dense(self) -> np.ndarray:
        raise NotImplementedError

    def norm(self) -> float:
        return math.sqrt(max(inner_product(self, self).real, 0.0))

    def __mul__(self, c) -> "Combination":
        return Combination([(complex(c), self)], self.N)

    __rmul__ = __mul__

    def __truediv__(self, c) -> "Combination":
        return self * (1.0 / complex(c))

    def __neg__(self) -> "Combination":
        return self * -1.0

    def __add__(self, other: "StructuredVector") -> "Combination":
        _check_dims(self, other)
        return Combination(self.atoms() + other.atoms(), self.N)

    def __sub__(self, other: "StructuredVector") -> "Combination":
        return self + (-other)


class Interval(StructuredVector):
    """Constant amplitude on the index range [start, stop), zero elsewhere."""

    __slots__ = ("start", "stop", "amplitude")

    def __init__(self, N: int, start: int, stop: int, amplitude: complex):
        super().__init__(N)
        start, stop = int(start), int(stop)
        if not 0 <= start <= stop <= self.N:
            raise ValueError(f"interval [{start}, {stop}) outside [0, {self.N})")
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "stop", stop)
        object.__setattr__(self, "amplitude", complex(amplitude))

    def to_dense(self) -> np.ndarray:
        _check_dense_size(self.N)
        out = np.zeros(self.N, dtype=complex)
        out[self.start:self.stop] = self.amplitude
        return out

    def __repr__(self):
        return f"Interval(N={self.N}, [{self.start}, {self.stop}), {self.amplitude})"


class Uniform(Interval):
    """Constant amplitude on every coordinate, e.g. N^{-1/2}(1, ..., 1)."""

    __slots__ = ()

    def __init__(self, N: int, amplitude: complex | None = None):
        if amplitude is None:
            amplitude = 1.0 / math.sqrt(int(N))
        super().__init__(N, 0, N, amplitude)

    def __repr__(self):
        return f"Uniform(N={self.N}, {self.amplitude})"


class Indicator(StructuredVector):
    """Sparse vector: amplitudes on a strictly sorted index set."""

    __slots__ = ("indices", "amplitudes")

    def __init__(self, N: int, indices: Iterable[int], amplitudes=1.0):
        super().__init__(N)
        idx = np.asarray(list(indices) if not isinstance(indices, np.ndarray) else indices, dtype=np.int64)
        if idx.ndim != 1:
            raise ValueError("indices must be one-dimensional")
        if idx.size and (np.any(np.diff(idx) <= 0) or idx[0] < 0 or idx[-1] >= self.N):
            raise ValueError("indices must be strictly increasing and inside [0, N)")
        amps = np.broadcast_to(np.asarray(amplitudes, dtype=complex), idx.shape).copy()
        idx.setflags(write=False)
        amps.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "amplitudes", amps)

    def to_dense(self) -> np.ndarray:
        _check_dense_size(self.N)
        out = np.zeros(self.N, dtype=complex)
        out[self.indices] = self.amplitudes
        return out

    def __repr__(self):
        return f"Indicator(N={self.N}, nnz={self.indices.size})"


class Dense(StructuredVector):
    __slots__ = ("coefficients",)

    def __init__(self, coefficients):
        c = np.array(coefficients, dtype=complex).ravel()
        super().__init__(c.size)
        _check_dense_size(self.N)
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    def to_dense(self) -> np.ndarray:
        return self.coefficients.copy()

    def __repr__(self):
        return f"Dense(N={self.N})"


class Combination(StructuredVector):
    """Flat weighted sum of non-combination atoms.

    Duplicate atoms are merged by object identity, never by value.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Sequence[tuple[complex, StructuredVector]], N: int | None = None):
        flat: dict[int, list] = {}
        for w, v in terms:
            for w2, atom in v.atoms():
                key = id(atom)
                if key in flat:
                    flat[key][0] += complex(w) * w2
                else:
                    flat[key] = [complex(w) * w2, atom]
        if N is None:
            if not flat:
                raise ValueError("empty combination needs an explicit dimension")
            N = next(iter(flat.values()))[1].N
        super().__init__(N)
        for _, atom in flat.values():
            if atom.N != self.N:
                raise DimensionError(f"dimension mismatch: {atom.N} != {self.N}")
        object.__setattr__(self, "terms", tuple((w, a) for w, a in flat.values()))

    def atoms(self):
        return list(self.terms)

    def to_dense(self) -> np.ndarray:
        _check_dense_size(self.N)
        out = np.zeros(self.N, dtype=complex)
        for w, a in self.terms:
            out += w * a.to_dense()
        return out

    def __repr__(self):
        return f"Combination(N={self.N}, atoms={len(self.terms)})"


def zero_vector(N: int) -> Combination:
    return Combination([], N)


def _check_dims(u: StructuredVector, v: StructuredVector):
    if u.N != v.N:
        raise DimensionError(f"dimension mismatch: {u.N} != {v.N}")


def _check_dense_size(N: int):
    if N > DENSE_LIMIT:
        raise MemoryError(f"dense expansion refused for N={N} > {DENSE_LIMIT}")


def _interval_bounds(a: Interval, idx: np.ndarray) -> tuple[int, int]:
    lo, hi = np.searchsorted(idx, [a.start, a.stop])
    return int(lo), int(hi)


def _atom_inner(a: StructuredVector, b: StructuredVector) -> complex:
    # <a|b>, conjugate-linear in a
    if isinstance(a, Dense) or isinstance(b, Dense):
        return complex(np.vdot(a.to_dense(), b.to_dense()))
    if isinstance(a, Interval):
        if isinstance(b, Interval):
            overlap = max(0, min(a.stop, b.stop) - max(a.start, b.start))
            return a.amplitude.conjugate() * b.amplitude * overlap
        lo, hi = _interval_bounds(a, b.indices)
        return a.amplitude.conjugate() * complex(b.amplitudes[lo:hi].sum())
    if isinstance(b, Interval):
        lo, hi = _interval_bounds(b, a.indices)
        return complex(np.conj(a.amplitudes[lo:hi]).sum()) * b.amplitude
    _, ia, ib = np.intersect1d(a.indices, b.indices, assume_unique=True, return_indices=True)
    return complex(np.vdot(a.amplitudes[ia], b.amplitudes[ib]))


def inner_product(u: StructuredVector, v: StructuredVector) -> complex:
    """<u|v> with conjugation on u."""
    _check_dims(u, v)
    total = 0j
    for wu, au in u.atoms():
        for wv, av in v.atoms():
            total += wu.conjugate() * wv * _atom_inner(au, av)
    return total


def atom_gram(atoms: Sequence[StructuredVector]) -> np.ndarray:
    n = len(atoms)
    G = np.empty((n, n), dtype=complex)
    for i in range(n):
        G[i, i] = _atom_inner(atoms[i], atoms[i])
        for j in range(i + 1, n):
            G[i, j] = _atom_inner(atoms[i], atoms[j])
            G[j, i] = G[i, j].conjugate()
    return G


def gram_matrix(vectors: Sequence[StructuredVector]) -> np.ndarray:
    n = len(vectors)
    G = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(i, n):
            G[i, j] = inner_product(vectors[i], vectors[j])
            G[j, i] = G[i, j].conjugate()
    return G


def cell_embedding(atoms: Sequence[StructuredVector]) -> np.ndarray:
    """Explicit coordinates X with X^H X = Gram(atoms).

    Interval and Indicator atoms are constant on the cells of the partition of
    [0, N) cut at every interval end and around every index; weighting each
    cell by sqrt(length) makes the map isometric with O(#breakpoints) rows
    regardless of N. A Dense atom forces unit cells, i.e. the dense expansion.
    """
    if not atoms:
        raise ValueError("need at least one atom")
    N = atoms[0].N
    if any(isinstance(a, Dense) for a in atoms):
        return np.column_stack([a.to_dense() for a in atoms])
    cuts = [np.array([0, N], dtype=np.int64)]
    for a in atoms:
        if isinstance(a, Interval):
            cuts.append(np.array([a.start, a.stop], dtype=np.int64))
        else:
            cuts += [a.indices, a.indices + 1]
    b = np.unique(np.concatenate(cuts))
    left, right = b[:-1], b[1:]
    w = np.sqrt((right - left).astype(float))
    X = np.zeros((left.size, len(atoms)), dtype=complex)
    for j, a in enumerate(atoms):
        if isinstance(a, Interval):
            mask = (left >= a.start) & (right <= a.stop)
            X[mask, j] = a.amplitude * w[mask]
        else:
            X[np.searchsorted(left, a.indices), j] = a.amplitudes
    return X


class AtomExpansion:
    """Coefficients of several vectors over a shared list of distinct atoms,
    plus explicit isometric coordinates for the atoms.

    Norms of small residuals computed from a Gram matrix lose half the digits
    (a quadratic form near zero); the explicit coordinates keep them exact.
    """

    def __init__(self, vectors: Sequence[StructuredVector]):
        if not vectors:
            raise ValueError("need at least one vector")
        N = vectors[0].N
        index: dict[int, int] = {}
        atoms: list[StructuredVector] = []
        cols = []
        for v in vectors:
            _check_dims(vectors[0], v)
            col = {}
            for w, a in v.atoms():
                j = index.setdefault(id(a), len(atoms))
                if j == len(atoms):
                    atoms.append(a)
                col[j] = col.get(j, 0j) + w
            cols.append(col)
        C = np.zeros((len(atoms), len(vectors)), dtype=complex)
        for i, col in enumerate(cols):
            for j, w in col.items():
                C[j, i] = w
        self.N = N
        self.atoms = atoms
        self.coefficients = C
        self.embedding = cell_embedding(atoms) if atoms else np.zeros((0, 0), dtype=complex)
        self.coords = self.embedding @ C

    @property
    def gram(self) -> np.ndarray:
        return atom_gram(self.atoms)

    def vector(self, coeffs: np.ndarray) -> Combination:
        return Combination([(complex(c), a) for c, a in zip(coeffs, self.atoms) if c != 0], self.N)


class LowRankHermitian:
    """H = sum_j lambda_j |v_j><v_j| with orthonormal v_j and real lambda_j."""

    def __init__(self, eigenvalues: Sequence[float], vectors: Sequence[StructuredVector], N: int | None = None):
        lam = np.asarray(eigenvalues, dtype=float).ravel()
        if lam.size != len(vectors):
            raise ValueError("one eigenvalue per factor vector")
        if N is None:
            if not vectors:
                raise ValueError("zero-rank operator needs an explicit dimension")
            N = vectors[0].N
        for v in vectors:
            if v.N != N:
                raise DimensionError(f"dimension mismatch: {v.N} != {N}")
        if vectors:
            G = gram_matrix(vectors)
            err = np.abs(G - np.eye(len(vectors))).max()
            if err > ORTHONORMAL_TOL:
                raise ValueError(f"factor vectors not orthonormal (max |Gram - I| = {err:.3g}); "
                                 "use orthonormalize() first")
        lam.setflags(write=False)
        self.N = int(N)
        self.eigenvalues = lam
        self.vectors = tuple(vectors)

    @property
    def rank(self) -> int:
        return len(self.vectors)

    def norm(self) -> float:
        return float(np.abs(self.eigenvalues).max()) if self.rank else 0.0

    def is_calibrated(self, tol: float = 1e-12) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def apply(self, v: StructuredVector) -> Combination:
        if v.N != self.N:
            raise DimensionError(f"dimension mismatch: {v.N} != {self.N}")
        return Combination(
            [(lam * inner_product(u, v), u) for lam, u in zip(self.eigenvalues, self.vectors)], self.N)

    def to_dense(self) -> np.ndarray:
        _check_dense_size(self.N)
        H = np.zeros((self.N, self.N), dtype=complex)
        for lam, u in zip(self.eigenvalues, self.vectors):
            x = u.to_dense()
            H += lam * np.outer(x, x.conj())
        return H

    def __repr__(self):
        return f"LowRankHermitian(N={self.N}, rank={self.rank}, eigenvalues={list(self.eigenvalues)})"


def apply(H: LowRankHermitian, v: StructuredVector) -> Combination:
    return H.apply(v)


def orthonormalize(vectors: Sequence[StructuredVector], drop_tol: float = 1e-10) -> list[Combination]:
    """Modified Gram-Schmidt (two passes); near-dependent vectors are dropped."""
    exp = AtomExpansion(vectors)
    basis, _ = _gram_schmidt(exp, drop_tol)
    return [exp.vector(b) for b in basis.T]


def _gram_schmidt(exp: AtomExpansion, drop_tol: float) -> tuple[np.ndarray, list[int]]:
    """Two-pass modified Gram-Schmidt in the explicit coordinates; returns the
    basis as atom coefficients and the indices of the kept candidates."""
    Y = exp.coords
    kept: list[np.ndarray] = []
    kept_y: list[np.ndarray] = []
    kept_idx: list[int] = []
    for i in range(Y.shape[1]):
        x = exp.coefficients[:, i].copy()
        y = Y[:, i].copy()
        n0 = np.linalg.norm(y)
        if n0 == 0.0:
            continue
        for _ in range(2):
            for b, by in zip(kept, kept_y):
                c = np.vdot(by, y)
                x -= c * b
                y -= c * by
        n = np.linalg.norm(y)
        if n <= drop_tol * n0:
            continue
        kept.append(x / n)
        kept_y.append(y / n)
        kept_idx.append(i)
    if not kept:
        return np.zeros((len(exp.atoms), 0), dtype=complex), kept_idx
    return np.column_stack(kept), kept_idx
