"""Resolvent witness for the robust (kappa-floor) lower bound on running time.

With B(s) = (f H_F - ((1 - f) E_I + i eps))^{-1} the trial state
phi(s) = psi_I - f H_F B psi_I is nearly annihilated by the gauge-fixed
generator (1 - f)(H_I - E_I) + f H_F away from resonances, so the overlap
<phi(s)|phi_tau(s)> can only drift slowly. Everything is evaluated in the
eigenbasis of the reduced A_F.

Distances Delta_eps are taken to the nonzero spectrum of H_F: the kernel of
H_F never enters H_F B, and including it would add a spurious resonance at
f = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .evolution import EvolutionResult, evolve_smooth, gauge_transform
from .reduction import TIE_TOL, ReducedSystem
from .schedules import Schedule, SmoothSchedule, min_slope

THRESHOLD = 2.0 * math.sqrt(6.0) / 5.0


@dataclass(frozen=True, eq=False)
class WitnessReport:
    eps: float
    tau: float
    kappa: float
    s: np.ndarray
    integrand: np.ndarray  # d/ds <phi | phi_tau>
    pointwise_bound: np.ndarray
    phi_dot_norm: np.ndarray
    phi_dot_bound: np.ndarray
    hhat_phi_norm: np.ndarray
    hhat_phi_bound: np.ndarray
    Delta_eps: np.ndarray
    generator_residual: float
    I: float
    endpoint_difference: complex  # <phi(1)|phi_tau(1)> - <phi(0)|phi_tau(0)>
    derivative_integral: complex
    analytic_bound: float
    target: float
    verdict: bool
    overlap: float
    threshold: float
    qf_final: float

    @property
    def conclusion(self) -> bool:
        return self.overlap > self.threshold

    def to_text(self) -> str:
        lines = [
            f"eps = {self.eps!r}",
            f"tau = {self.tau!r}",
            f"kappa = {self.kappa!r}",
            f"witness integral I = {self.I!r}",
            f"analytic bound = {self.analytic_bound!r}",
            f"target 1 - 2*sqrt(6)/5 - 2*delta = {self.target!r}",
            f"verdict (I < target) = {self.verdict}",
            f"|<psi_I|psi_tau(1)>| = {self.overlap!r}",
            f"threshold 2*sqrt(6)/5 + delta = {self.threshold!r}",
            f"||Q_F psi_tau(1)|| = {self.qf_final!r}",
            f"endpoint difference = {self.endpoint_difference!r}",
            f"integral of derivative = {self.derivative_integral!r}",
            f"min Delta_eps = {float(self.Delta_eps.min())!r}",
            f"max integrand / pointwise bound = {float(np.max(np.abs(self.integrand) / self.pointwise_bound))!r}",
        ]
        return "\n".join(lines) + "\n"


def _nonzero_F(rs: ReducedSystem):
    lam, U = np.linalg.eigh(rs.A_F)
    return lam, U, np.abs(lam) > TIE_TOL


def resonances(rs: ReducedSystem, f: Schedule) -> list[tuple[float, float]]:
    """(s*, width in s) where f(s*) lam - (1 - f(s*)) E_I = 0 for some nonzero lam."""
    lam, _, nz = _nonzero_F(rs)
    out = []
    for x in lam[nz]:
        slope = x + rs.E_I
        if abs(slope) < 1e-15:
            continue
        fstar = rs.E_I / slope
        if not 0.0 < fstar < 1.0:
            continue
        sstar = brentq(lambda s: float(f.value(s)) - fstar, 0.0, 1.0, xtol=1e-15)
        out.append((sstar, abs(slope) * max(float(f.derivative(sstar)), 1e-12)))
    return out


def witness_grid(rs: ReducedSystem, f: Schedule, eps: float, tau: float, base: int = 4096) -> np.ndarray:
    """Uniform grid fine enough for the phase rotation, plus clusters of
    points resolving each resonance of width ~eps."""
    hnorm = max(np.abs(np.linalg.eigvalsh(rs.A_I)).max(), np.abs(np.linalg.eigvalsh(rs.A_F)).max())
    pts = [np.linspace(0.0, 1.0, max(base, int(40 * tau * hnorm) + 1))]
    x = np.concatenate([np.linspace(-50.0, 50.0, 2001), np.geomspace(50.0, 1e6, 200), -np.geomspace(50.0, 1e6, 200)])
    for sstar, rate in resonances(rs, f):
        pts.append(sstar + x * eps / rate)
    s = np.concatenate(pts)
    return np.unique(s[(s >= 0.0) & (s <= 1.0)])


def _hhat_apply(rs: ReducedSystem, fv: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    AI = vecs @ rs.A_I.T - rs.E_I * vecs
    AF = vecs @ rs.A_F.T
    return (1.0 - fv)[:, None] * AI + fv[:, None] * AF


def witness_check(rs: ReducedSystem, f: Schedule, tau: float, eps: float,
                  result: EvolutionResult) -> WitnessReport:
    if result.gauge != "phi":
        raise ValueError("witness_check needs the phi-gauge trajectory (see gauge_transform)")
    if not isinstance(f, SmoothSchedule):
        raise TypeError("witness needs a differentiable schedule")
    if eps <= 0:
        raise ValueError("eps must be positive")
    s = result.s
    phi_tau = result.states
    fv = np.asarray(f.value(s), dtype=float)
    fd = np.asarray(f.derivative(s), dtype=float)
    kappa = f.kappa if f.kappa is not None else min_slope(f)
    delta = rs.delta
    E_I = rs.E_I

    lam, U, nz = _nonzero_F(rs)
    c = U.conj().T @ rs.psi
    z = (1.0 - fv) * E_I + 1j * eps
    den = fv[:, None] * lam[None, :] - z[:, None]
    HFB = np.where(nz, lam / den, 0.0) * c  # H_F B psi_I, eigenbasis coords
    phi = (c[None, :] - fv[:, None] * HFB) @ U.T
    phi_dot = (-fd[:, None] * np.where(nz, lam * (-E_I - 1j * eps) / den ** 2, 0.0) * c) @ U.T
    hphi = _hhat_apply(rs, fv, phi)

    # cross-check against -f(1-f) H_I H_F B psi - i eps f H_F B psi
    HFB_std = HFB @ U.T
    closed = (-(fv * (1.0 - fv))[:, None] * (HFB_std @ rs.A_I.T)
              - 1j * eps * fv[:, None] * HFB_std)
    generator_residual = float(np.abs(hphi - closed).max())

    integrand = (np.einsum("ij,ij->i", phi_dot.conj(), phi_tau)
                 - 1j * tau * np.einsum("ij,ij->i", hphi.conj(), phi_tau))
    Delta = np.min(np.where(nz, np.abs(den), np.inf), axis=1)
    pointwise = (fd + tau * delta + tau * eps) * delta / Delta + 2.0 * fd * delta / Delta ** 2

    I = float(np.trapezoid(np.abs(integrand), s))
    J = complex(np.trapezoid(integrand, s))
    endpoints = complex(np.vdot(phi[-1], phi_tau[-1]) - np.vdot(phi[0], phi_tau[0]))
    m = rs.rank_F
    analytic = 2.0 * m * delta * (-math.log(eps) * (1.0 + tau * delta / kappa + tau * eps / kappa) + 2.0 / eps)
    rhs = 1.0 - THRESHOLD - 2.0 * delta
    final = phi_tau[-1]
    return WitnessReport(
        eps=float(eps), tau=float(tau), kappa=float(kappa), s=s, integrand=integrand,
        pointwise_bound=pointwise,
        phi_dot_norm=np.linalg.norm(phi_dot, axis=1),
        phi_dot_bound=fd * delta / Delta + 2.0 * fd * delta / Delta ** 2,
        hhat_phi_norm=np.linalg.norm(hphi, axis=1),
        hhat_phi_bound=(delta ** 2 + eps * delta) / Delta,
        Delta_eps=Delta, generator_residual=generator_residual, I=I, endpoint_difference=endpoints, derivative_integral=J,
        analytic_bound=analytic, target=rhs, verdict=I < rhs,
        overlap=float(abs(np.vdot(rs.psi, final))), threshold=THRESHOLD + delta,
        qf_final=float(np.linalg.norm(rs.Q_F @ final)),
    )


def run_witness(rs: ReducedSystem, f: SmoothSchedule, tau: float, eps: float,
                tol: float = 1e-10) -> WitnessReport:
    grid = witness_grid(rs, f, eps, tau)
    res = evolve_smooth(rs, f, tau, tol, samples=grid)
    return witness_check(rs, f, tau, eps, gauge_transform(res, f, rs.E_I, tau))


@dataclass(frozen=True)
class IntegralBound:
    name: str
    quadrature: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.quadrature <= self.bound


def integral_bounds(rs: ReducedSystem, f: SmoothSchedule, eps: float,
                    kappa: float | None = None) -> list[IntegralBound]:
    """Quadrature of fdot/Delta, fdot/Delta^2 and 1/Delta against
    -2m ln eps, 2m/eps and -2m ln eps / kappa."""
    lam, _, nz = _nonzero_F(rs)
    lam = lam[nz]
    E_I = rs.E_I
    if kappa is None:
        kappa = f.kappa if f.kappa is not None else min_slope(f)
    m = rs.rank_F

    def Delta(s):
        fv = float(f.value(s))
        return float(np.min(np.abs(fv * lam - (1.0 - fv) * E_I - 1j * eps)))

    # geometric subintervals around each resonance keep quad on peaks of width eps
    cuts = [0.0, 1.0]
    for sstar, rate in resonances(rs, f):
        w = eps / rate
        cuts += [sstar] + [sstar + sign * w * 10.0 ** j for j in range(-2, 16) for sign in (-1, 1)]
    cuts = np.unique(np.clip(cuts, 0.0, 1.0))
    fd = lambda s: float(f.derivative(s))

    def integrate(fun):
        return math.fsum(quad(fun, a, b, limit=200, epsabs=0.0, epsrel=1e-11)[0]
                         for a, b in zip(cuts[:-1], cuts[1:]))

    return [
        IntegralBound("int fdot/Delta_eps", integrate(lambda s: fd(s) / Delta(s)), -2.0 * m * math.log(eps)),
        IntegralBound("int fdot/Delta_eps^2", integrate(lambda s: fd(s) / Delta(s) ** 2), 2.0 * m / eps),
        IntegralBound("int 1/Delta_eps", integrate(lambda s: 1.0 / Delta(s)), -2.0 * m * math.log(eps) / kappa),
    ]
