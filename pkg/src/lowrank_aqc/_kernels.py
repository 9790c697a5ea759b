"""Compiled inner loop of the adaptive RK4 integrator.

Solves y' = -i tau (A0 + f(s) D) y with f a piecewise cubic (breaks, coeffs)
in scipy.interpolate.PPoly layout.
"""

import numpy as np
from numba import njit

OK = 0
UNDERFLOW = 1


@njit(cache=True)
def _ppoly(breaks, coeffs, s):
    n = breaks.size - 1
    i = np.searchsorted(breaks, s, side="right") - 1
    if i < 0:
        i = 0
    elif i > n - 1:
        i = n - 1
    x = s - breaks[i]
    return ((coeffs[0, i] * x + coeffs[1, i]) * x + coeffs[2, i]) * x + coeffs[3, i]


@njit(cache=True)
def _rhs(A0, D, tau, breaks, coeffs, s, y, out):
    k = y.size
    f = _ppoly(breaks, coeffs, s)
    for r in range(k):
        acc = 0j
        for c in range(k):
            acc += (A0[r, c] + f * D[r, c]) * y[c]
        out[r] = -1j * tau * acc


@njit(cache=True)
def _rk4(A0, D, tau, breaks, coeffs, s, y, h, k1, k2, k3, k4, tmp, out):
    _rhs(A0, D, tau, breaks, coeffs, s, y, k1)
    for r in range(y.size):
        tmp[r] = y[r] + 0.5 * h * k1[r]
    _rhs(A0, D, tau, breaks, coeffs, s + 0.5 * h, tmp, k2)
    for r in range(y.size):
        tmp[r] = y[r] + 0.5 * h * k2[r]
    _rhs(A0, D, tau, breaks, coeffs, s + 0.5 * h, tmp, k3)
    for r in range(y.size):
        tmp[r] = y[r] + h * k3[r]
    _rhs(A0, D, tau, breaks, coeffs, s + h, tmp, k4)
    for r in range(y.size):
        out[r] = y[r] + h / 6.0 * (k1[r] + 2.0 * k2[r] + 2.0 * k3[r] + k4[r])


@njit(cache=True)
def rk4_step_doubling(A0, D, tau, breaks, coeffs, y0, samples, tol, h_max, h_min):
    """Returns (states at samples, accepted steps, norm drift, status, s at failure)."""
    k = y0.size
    n = samples.size
    states = np.empty((n, k), dtype=np.complex128)
    y = y0.copy()
    y_full = np.empty(k, dtype=np.complex128)
    y_half = np.empty(k, dtype=np.complex128)
    y_two = np.empty(k, dtype=np.complex128)
    k1 = np.empty(k, dtype=np.complex128)
    k2 = np.empty(k, dtype=np.complex128)
    k3 = np.empty(k, dtype=np.complex128)
    k4 = np.empty(k, dtype=np.complex128)
    tmp = np.empty(k, dtype=np.complex128)
    s = 0.0
    h = h_max
    steps = 0
    drift = 0.0
    idx = 0
    while idx < n:
        target = samples[idx]
        if target - s <= 1e-15:
            states[idx] = y
            idx += 1
            continue
        h_try = h if h < target - s else target - s
        truncated = h_try < h
        _rk4(A0, D, tau, breaks, coeffs, s, y, h_try, k1, k2, k3, k4, tmp, y_full)
        _rk4(A0, D, tau, breaks, coeffs, s, y, 0.5 * h_try, k1, k2, k3, k4, tmp, y_half)
        _rk4(A0, D, tau, breaks, coeffs, s + 0.5 * h_try, y_half, 0.5 * h_try, k1, k2, k3, k4, tmp, y_two)
        err = 0.0
        for r in range(k):
            e = abs(y_two[r] - y_full[r])
            if e > err:
                err = e
        err /= 15.0
        if err <= tol:
            s = target if truncated or s + h_try >= target else s + h_try
            for r in range(k):
                y[r] = y_two[r]
            steps += 1
            nrm = 0.0
            for r in range(k):
                nrm += y[r].real ** 2 + y[r].imag ** 2
            d = abs(np.sqrt(nrm) - 1.0)
            if d > drift:
                drift = d
            fac = 4.0 if err == 0.0 else min(4.0, 0.9 * (tol / err) ** 0.2)
            h_new = min(h_max, h_try * fac)
            h = max(h, h_new) if truncated else h_new
        else:
            h = h_try * max(0.1, 0.9 * (tol / err) ** 0.2)
            if h < h_min:
                return states, steps, drift, UNDERFLOW, s
    return states, steps, drift, OK, s
