"""Compiled right-hand sides and an adaptive Dormand-Prince 5(4) stepper.

State vectors are complex: ``(a_1, ..., a_N, b)``.  Parameters travel as one
complex array ``cp`` and one real array ``rp`` whose layout is documented per
right-hand side.
"""

import numpy as np
from numba import njit

# Dormand-Prince 5(4) tableau.
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1 = 71 / 57600
E3 = -71 / 16695
E4 = 71 / 1920
E5 = -17253 / 339200
E6 = 22 / 525
E7 = -1 / 40

OK = 0
MAX_STEPS = 1
NOT_FINITE = 2
STEP_UNDERFLOW = 3


@njit(cache=True)
def rhs_rwa(t, y, out, cp, rp, n):
    """Rotating-wave fluctuations.

    cp = (G_1..G_N, d_1..d_N); rp = (kappa_1..kappa_N, gamma_m, xi).
    """
    gamma = rp[n]
    xi = rp[n + 1]
    ph = np.exp(-1j * xi * t)
    b = y[n]
    acc = 0j
    for j in range(n):
        G = cp[j]
        out[j] = -0.5 * rp[j] * y[j] - 1j * G * b + cp[n + j] * ph
        acc += np.conj(G) * y[j]
    out[n] = -0.5 * gamma * b - 1j * acc


@njit(cache=True)
def rhs_two_sideband(t, y, out, cp, rp, n):
    """Linearized fluctuations with counter-rotating terms, in the frame
    rotating at each effective detuning (cavities) and at omega_m (mechanics).

    cp = (G_1..G_N, d_1..d_N);
    rp = (kappa_1..kappa_N, D'_1..D'_N, gamma_m, omega_m, xi).
    """
    gamma = rp[2 * n]
    omega = rp[2 * n + 1]
    xi = rp[2 * n + 2]
    ph = np.exp(-1j * xi * t)
    b = y[n]
    bc = np.conj(b)
    acc = 0j
    for j in range(n):
        G = cp[j]
        d = rp[n + j]
        e_minus = np.exp(1j * (d - omega) * t)
        e_plus = np.exp(1j * (d + omega) * t)
        out[j] = -0.5 * rp[j] * y[j] - 1j * G * (b * e_minus + bc * e_plus) + cp[n + j] * ph
        acc += G * np.conj(y[j]) * e_plus + np.conj(G) * y[j] * np.conj(e_minus)
    out[n] = -0.5 * gamma * b - 1j * acc


@njit(cache=True)
def rhs_nonlinear(t, y, out, cp, rp, n):
    """Full classical equations in the frame of the control fields.

    cp = (c_1..c_N, s_1..s_N) with c_j = sqrt(kex_j) eps_c_j e^{i vartheta_j}
    and s_j = sqrt(kex_j) eps_s_j e^{i phi_j};
    rp = (kappa_1..kappa_N, Delta_1..Delta_N, g_1..g_N, Ds_1..Ds_N, gamma_m, omega_m)
    where Ds_j is the signal detuning from control field j.
    """
    gamma = rp[4 * n]
    omega = rp[4 * n + 1]
    b = y[n]
    q = b + np.conj(b)
    acc = 0.0
    for j in range(n):
        a = y[j]
        g = rp[2 * n + j]
        sig = cp[n + j] * np.exp(-1j * rp[3 * n + j] * t)
        out[j] = -(1j * rp[n + j] + 0.5 * rp[j]) * a - 1j * g * q * a + cp[j] + sig
        acc += g * (a.real * a.real + a.imag * a.imag)
    out[n] = -(1j * omega + 0.5 * gamma) * b - 1j * acc


@njit(cache=True)
def _err_norm(y, ynew, err, rtol, atol):
    s = 0.0
    for i in range(y.shape[0]):
        sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
        e = abs(err[i]) / sc
        s += e * e
    return np.sqrt(s / y.shape[0])


@njit(cache=True)
def integrate(rhs, y0, t0, samples, rtol, atol, cp, rp, n, max_steps, h0):
    """Integrate from ``t0`` through every time in ``samples`` (ascending).

    Steps are clipped to land on each sample time.  Returns
    ``(values, status, steps)`` where ``values[k]`` is the state at
    ``samples[k]``.
    """
    dim = y0.shape[0]
    out = np.zeros((samples.shape[0], dim), dtype=np.complex128)
    y = y0.copy()
    k1 = np.empty(dim, dtype=np.complex128)
    k2 = np.empty_like(k1)
    k3 = np.empty_like(k1)
    k4 = np.empty_like(k1)
    k5 = np.empty_like(k1)
    k6 = np.empty_like(k1)
    k7 = np.empty_like(k1)
    tmp = np.empty_like(k1)
    ynew = np.empty_like(k1)
    err = np.empty_like(k1)

    t = t0
    h = h0
    steps = 0
    rhs(t, y, k1, cp, rp, n)
    for s in range(samples.shape[0]):
        target = samples[s]
        while t < target:
            if steps >= max_steps:
                return out, MAX_STEPS, steps
            last = False
            hs = h
            if t + h >= target:
                h = target - t
                last = True
            if h <= 1e-15 * max(1.0, abs(t)):
                return out, STEP_UNDERFLOW, steps
            for i in range(dim):
                tmp[i] = y[i] + h * A21 * k1[i]
            rhs(t + C2 * h, tmp, k2, cp, rp, n)
            for i in range(dim):
                tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
            rhs(t + C3 * h, tmp, k3, cp, rp, n)
            for i in range(dim):
                tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
            rhs(t + C4 * h, tmp, k4, cp, rp, n)
            for i in range(dim):
                tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
            rhs(t + C5 * h, tmp, k5, cp, rp, n)
            for i in range(dim):
                tmp[i] = y[i] + h * (
                    A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]
                )
            rhs(t + h, tmp, k6, cp, rp, n)
            for i in range(dim):
                ynew[i] = y[i] + h * (
                    B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]
                )
            rhs(t + h, ynew, k7, cp, rp, n)
            for i in range(dim):
                err[i] = h * (
                    E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]
                )
            en = _err_norm(y, ynew, err, rtol, atol)
            steps += 1
            if not np.isfinite(en):
                return out, NOT_FINITE, steps
            if en <= 1.0:
                t = target if last else t + h
                for i in range(dim):
                    y[i] = ynew[i]
                    k1[i] = k7[i]
                fac = 5.0 if en == 0.0 else min(5.0, 0.9 * en ** -0.2)
                # a step clipped to a sample time says little about the next one
                h = hs if last else h * fac
            else:
                h = h * max(0.2, 0.9 * en ** -0.2)
        for i in range(dim):
            out[s, i] = y[i]
    return out, OK, steps
