"""Exact reduction of the interpolated dynamics to K = span(Ran H_I, Ran H_F, psi_I).

Every H(s) = (1 - f) H_I + f H_F annihilates the orthogonal complement of K
and maps K into itself, so evolving the k coordinates of the state in an
orthonormal basis of K is exact. The complement contributes the eigenvalue 0
with multiplicity N - k, which is tracked symbolically.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import AtomExpansion, Combination, LowRankHermitian, StructuredVector, _gram_schmidt

DROP_TOL = 1e-10
TIE_TOL = 1e-9
EIGVEC_TOL = 1e-10


class ReductionError(ValueError):
    pass


def _projector(vecs: np.ndarray) -> np.ndarray:
    return vecs @ vecs.conj().T


def _ground(eigs: np.ndarray, vecs: np.ndarray, N: int, rank: int):
    """Ground energy, projector within K and gap of the full N x N spectrum."""
    nonzero = eigs[np.abs(eigs) > TIE_TOL]
    spectrum = list(nonzero)
    if N > len(nonzero):
        spectrum.append(0.0)
    E = min(spectrum)
    mask = np.abs(eigs - E) <= TIE_TOL
    above = [x for x in spectrum if x > E + TIE_TOL]
    gap = min(above) - E if above else math.inf
    return float(E), _projector(vecs[:, mask]), float(gap), int(mask.sum())


@dataclass(frozen=True, eq=False)
class ReducedSystem:
    """Reduced Hamiltonians, projectors and overlap parameters on K.

    Attributes use the following conventions: ``A_I``/``A_F`` are the k x k
    restrictions of H_I/H_F, ``psi`` the reduced initial state, ``P_*`` ground
    projectors and ``Q_*`` range projectors (all restricted to K).
    """

    N: int
    k: int
    A_I: np.ndarray
    A_F: np.ndarray
    psi: np.ndarray
    E_I: float
    E_F: float
    g_F: float
    P_I: np.ndarray
    P_F: np.ndarray
    Q_I: np.ndarray
    Q_F: np.ndarray
    rank_I: int
    rank_F: int
    m_prime: int
    delta1: float
    delta2: float
    delta3: float
    delta: float
    kept: tuple[str, ...] = ()
    dropped: tuple[str, ...] = ()
    _expansion: AtomExpansion | None = field(default=None, repr=False)
    _basis_coeffs: np.ndarray | None = field(default=None, repr=False)

    @property
    def eig_I(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.A_I)

    @property
    def eig_F(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.A_F)

    @property
    def basis(self) -> list[Combination]:
        return [self._expansion.vector(c) for c in self._basis_coeffs.T]

    def hamiltonian(self, f: float) -> np.ndarray:
        return (1.0 - f) * self.A_I + f * self.A_F

    def basis_dense(self) -> np.ndarray:
        """N x k matrix of basis columns (oracle scale only)."""
        atoms = np.column_stack([a.to_dense() for a in self._expansion.atoms])
        return atoms @ self._basis_coeffs

    def embed(self, state: np.ndarray) -> np.ndarray:
        return self.basis_dense() @ state

    def to_dict(self) -> dict:
        def cm(A):
            return [[[float(z.real), float(z.imag)] for z in row] for row in np.atleast_2d(A)]

        return {
            "N": self.N,
            "k": self.k,
            "basis_provenance": {"kept": list(self.kept), "dropped": list(self.dropped)},
            "A_I": cm(self.A_I),
            "A_F": cm(self.A_F),
            "psi_I": cm(self.psi[None, :])[0],
            "scalars": {
                "E_I": self.E_I, "E_F": self.E_F, "g_F": self.g_F,
                "delta1": self.delta1, "delta2": self.delta2, "delta3": self.delta3,
                "delta": self.delta, "rank_I": self.rank_I, "rank_F": self.rank_F,
                "m_prime": self.m_prime,
            },
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def build(H_I: LowRankHermitian, H_F: LowRankHermitian, psi_I: StructuredVector,
          drop_tol: float = DROP_TOL) -> ReducedSystem:
    if not (H_I.N == H_F.N == psi_I.N):
        raise ReductionError("dimension mismatch between H_I, H_F and psi_I")
    N = H_I.N
    candidates = list(H_I.vectors) + list(H_F.vectors) + [psi_I]
    labels = ([f"H_I[{j}]" for j in range(H_I.rank)] + [f"H_F[{j}]" for j in range(H_F.rank)]
              + ["psi_I"])
    exp = AtomExpansion(candidates)
    B, kept_idx = _gram_schmidt(exp, drop_tol)
    if B.shape[1] == 0:
        raise ReductionError("degenerate basis: every candidate vector was dropped")
    k = B.shape[1]

    # overlaps <b_i | candidate_j>, in the explicit cell coordinates
    W = (exp.embedding @ B).conj().T @ exp.coords
    nI, nF = H_I.rank, H_F.rank
    W_I, W_F, psi = W[:, :nI], W[:, nI:nI + nF], W[:, -1]
    A_I = (W_I * H_I.eigenvalues) @ W_I.conj().T
    A_F = (W_F * H_F.eigenvalues) @ W_F.conj().T
    A_I = 0.5 * (A_I + A_I.conj().T)
    A_F = 0.5 * (A_F + A_F.conj().T)

    pn = np.linalg.norm(psi)
    if abs(pn - 1.0) > 1e-10:
        raise ReductionError(f"psi_I must be normalized (norm {pn:.12g})")

    lam_I, U_I = np.linalg.eigh(A_I)
    lam_F, U_F = np.linalg.eigh(A_F)
    E_I, P_I, _, _ = _ground(lam_I, U_I, N, nI)
    resid = np.linalg.norm(A_I @ psi - E_I * psi)
    if resid > EIGVEC_TOL:
        raise ReductionError(f"psi_I is not a ground state of H_I (residual {resid:.3g} at E_I={E_I})")
    E_F, P_F, g_F, m_prime = _ground(lam_F, U_F, N, nF)
    if abs(E_F) <= TIE_TOL:
        raise ReductionError("E_F = 0: H_F is positive semidefinite and its ground space is the kernel")

    Q_I = _projector(U_I[:, np.abs(lam_I) > TIE_TOL])
    Q_F = _projector(U_F[:, np.abs(lam_F) > TIE_TOL])
    delta = float(np.linalg.norm(Q_I @ Q_F, 2)) if k else 0.0

    return ReducedSystem(
        N=N, k=k, A_I=A_I, A_F=A_F, psi=psi,
        E_I=E_I, E_F=E_F, g_F=g_F, P_I=P_I, P_F=P_F, Q_I=Q_I, Q_F=Q_F,
        rank_I=int((np.abs(lam_I) > TIE_TOL).sum()), rank_F=int((np.abs(lam_F) > TIE_TOL).sum()),
        m_prime=m_prime,
        delta1=float(np.linalg.norm(A_F @ psi)),
        delta2=float(np.linalg.norm(P_F @ psi)),
        delta3=float(np.linalg.norm(Q_F @ psi)),
        delta=delta,
        kept=tuple(labels[i] for i in kept_idx),
        dropped=tuple(l for i, l in enumerate(labels) if i not in kept_idx),
        _expansion=exp, _basis_coeffs=B,
    )


def overlap_params(rs: ReducedSystem) -> tuple[float, float, float, float]:
    return rs.delta1, rs.delta2, rs.delta3, rs.delta


def ground_data(rs: ReducedSystem) -> tuple[float, float, np.ndarray]:
    return rs.E_F, rs.g_F, rs.P_F
