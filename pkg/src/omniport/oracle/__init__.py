"""Time-domain checks of the steady-state response.

Each integrator starts from rest (or from a supplied state), runs the
noise-free equations of motion long enough for transients to die out, and
then least-squares fits the trailing window to a sum of pure tones.  The
fitted tone amplitudes are the sideband estimates.

Frames used for the fit:

* rotating-wave system: tones ``exp(-i xi t)`` (anti-Stokes) and
  ``exp(+i xi t)`` (must vanish);
* two-sideband and full nonlinear systems, after moving cavities to their
  effective detuning and the mechanics to ``omega_m``: tones ``exp(-i xi t)``
  and ``exp(+i (xi + 2 omega_m) t)``.  The second is the Stokes sideband at
  ``2 omega_c - omega_s`` seen from the control frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..meanfield import MeanFieldBranch, fluctuation_drift, solve_mean_fields
from ..model import PHYSICAL, ConfigError, NetworkConfig, SignalSet
from ..response import ResponseState, solve_response
from . import _kernels as K


class OracleError(RuntimeError):
    """Integration failed or the trailing window did not settle."""


@dataclass(frozen=True)
class TrajectorySpec:
    """Integration and demodulation settings.

    ``duration=None`` picks ``decay_multiple / slowest_decay`` from the
    eigenvalues of the relevant drift matrix.  ``window`` is the trailing
    fraction of the trajectory used for demodulation; ``drift_tol`` bounds the
    relative change of the fitted amplitudes between its two halves.
    """

    duration: Optional[float] = None
    decay_multiple: float = 40.0
    rtol: float = 1e-11
    atol: float = 1e-13
    window: float = 0.25
    samples: int = 4096
    drift_tol: float = 1e-8
    max_steps: int = 200_000_000

    def __post_init__(self):
        if not 0 < self.window < 1:
            raise ConfigError("window must lie in (0, 1)")

    def resolve(self, slowest_decay: float) -> float:
        if slowest_decay <= 0:
            raise OracleError("dynamics are not damped; no steady state to demodulate")
        minimum = 20.0 / slowest_decay
        if self.duration is None:
            return self.decay_multiple / slowest_decay
        if self.duration < minimum:
            raise ConfigError(
                f"duration {self.duration:g} shorter than 20 decay times ({minimum:g})"
            )
        return self.duration


@dataclass(frozen=True)
class Demodulated:
    amplitudes: np.ndarray  # shape (n_tones, dim)
    drift: float


def _tone_matrix(t: np.ndarray, freqs: Sequence[float]) -> np.ndarray:
    return np.exp(1j * np.outer(t, freqs))


def _fit(t, y, freqs):
    A = _tone_matrix(t, freqs)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return coef


def demodulate(t: np.ndarray, y: np.ndarray, freqs: Sequence[float]) -> Demodulated:
    """Fit ``y(t) ~ sum_k c_k exp(i freqs_k t)`` per column of ``y``.

    The drift is the largest change of any coefficient between fits over the
    first and second halves of the samples, relative to the largest
    coefficient overall.
    """
    freqs = list(freqs)
    coef = _fit(t, y, freqs)
    half = len(t) // 2
    c1 = _fit(t[:half], y[:half], freqs)
    c2 = _fit(t[half:], y[half:], freqs)
    scale = np.max(np.abs(coef))
    drift = 0.0 if scale == 0 else float(np.max(np.abs(c1 - c2)) / scale)
    return Demodulated(coef, drift)


def _sample_times(t_end: float, spec: TrajectorySpec, freqs: Sequence[float]) -> np.ndarray:
    """Uniform samples over the trailing window, nudged away from aliasing.

    Two tones whose frequency difference is a multiple of the sampling rate
    are indistinguishable; the sample count is bumped until every pair of
    tones is well separated on the sampled unit circle.
    """
    start = t_end * (1.0 - spec.window)
    count = spec.samples
    for _ in range(64):
        t = np.linspace(start, t_end, count)
        dt = t[1] - t[0]
        ok = True
        for i in range(len(freqs)):
            for j in range(i + 1, len(freqs)):
                w = ((freqs[i] - freqs[j]) * dt) % (2 * np.pi)
                if min(w, 2 * np.pi - w) < 0.05:
                    ok = False
        if ok:
            return t
        count += 7
    return t


_STATUS = {
    K.MAX_STEPS: "step budget exhausted",
    K.NOT_FINITE: "trajectory diverged (non-finite state)",
    K.STEP_UNDERFLOW: "step size underflow",
}


def _run(rhs, y0, samples, spec, cp, rp, n, h0):
    values, status, steps = K.integrate(
        rhs,
        np.asarray(y0, dtype=np.complex128),
        0.0,
        np.ascontiguousarray(samples, dtype=np.float64),
        spec.rtol,
        spec.atol,
        np.ascontiguousarray(cp, dtype=np.complex128),
        np.ascontiguousarray(rp, dtype=np.float64),
        n,
        spec.max_steps,
        h0,
    )
    if status != K.OK:
        raise OracleError(f"{_STATUS[status]} after {steps} steps")
    return values


def _inputs(signals) -> np.ndarray:
    if isinstance(signals, SignalSet):
        return signals.inputs
    return np.asarray(signals, dtype=complex)


def rwa_drift(config: NetworkConfig) -> np.ndarray:
    """Complex drift matrix of the rotating-wave system."""
    G = config.couplings
    n = config.n
    A = np.zeros((n + 1, n + 1), dtype=complex)
    A[np.arange(n), np.arange(n)] = -0.5 * config.kappa
    A[:n, n] = -1j * G
    A[n, :n] = -1j * np.conj(G)
    A[n, n] = -0.5 * config.mech.gamma_m
    return A


def _slowest(eigs: np.ndarray) -> float:
    return float(np.min(-eigs.real))


@dataclass(frozen=True)
class RwaEstimate:
    state: ResponseState
    stokes: np.ndarray
    drift: float
    duration: float


def integrate_rwa(
    config: NetworkConfig, signals, xi: float, spec: TrajectorySpec = TrajectorySpec()
) -> RwaEstimate:
    """Integrate the rotating-wave equations from rest and demodulate.

    The returned ``state`` holds the fitted ``exp(-i xi t)`` amplitudes;
    ``stokes`` holds the ``exp(+i xi t)`` amplitudes, which must vanish (they
    are reported as zero when the window is too short to tell the two tones
    apart).
    """
    inputs = _inputs(signals)
    n = config.n
    duration = spec.resolve(_slowest(np.linalg.eigvals(rwa_drift(config))))
    xi = float(xi)
    window = spec.window * duration
    separable = 2 * abs(xi) * window / 2 > 2 * np.pi
    freqs = [-xi, xi] if separable else [-xi]

    samples = _sample_times(duration, spec, freqs)
    cp = np.concatenate([config.couplings, np.sqrt(config.kappa_ex) * inputs])
    rp = np.concatenate([config.kappa, [config.mech.gamma_m, xi]])
    h0 = 0.1 / max(1.0, abs(xi), float(np.max(config.kappa)))
    values = _run(K.rhs_rwa, np.zeros(n + 1), samples, spec, cp, rp, n, h0)
    fit = demodulate(samples, values, freqs)
    if fit.drift > spec.drift_tol:
        raise OracleError(f"rotating-wave trajectory did not settle (drift {fit.drift:.3g})")
    main = fit.amplitudes[0]
    stokes = fit.amplitudes[1] if separable else np.zeros(n + 1, dtype=complex)
    return RwaEstimate(ResponseState(main[:n].copy(), complex(main[n]), xi), stokes, fit.drift, duration)


@dataclass(frozen=True)
class SidebandEstimate:
    anti_stokes: ResponseState
    stokes: ResponseState
    rwa: ResponseState
    rwa_error: float
    stokes_ratio: float
    drift: float
    duration: float


def _relative_gap(a: np.ndarray, ref: np.ndarray) -> float:
    mask = np.abs(ref) > 1e-12 * max(np.max(np.abs(ref)), 1e-300)
    if not np.any(mask):
        return 0.0
    return float(np.max(np.abs(a[mask] - ref[mask]) / np.abs(ref[mask])))


def integrate_two_sideband(
    config: NetworkConfig,
    signals,
    xi: float,
    spec: TrajectorySpec = TrajectorySpec(),
    delta_eff: Optional[Sequence[float]] = None,
) -> SidebandEstimate:
    """Integrate the linearized equations keeping counter-rotating terms.

    ``delta_eff`` defaults to ``omega_m`` for every port (exact red sideband).
    ``rwa_error`` is ``max_j |a_j - a_j^rwa| / |a_j^rwa|`` over ports with a
    nonzero rotating-wave amplitude; ``stokes_ratio`` is the largest Stokes
    amplitude over the largest anti-Stokes cavity amplitude.
    """
    inputs = _inputs(signals)
    n = config.n
    omega = config.mech.omega_m
    gamma = config.mech.gamma_m
    d_eff = np.full(n, omega) if delta_eff is None else np.asarray(delta_eff, dtype=float)
    G = config.couplings
    eig = np.linalg.eigvals(fluctuation_drift(G, d_eff, config.kappa, omega, gamma))
    if np.any(eig.real >= 0):
        raise OracleError("linearized dynamics are unstable")
    duration = spec.resolve(_slowest(eig))
    xi = float(xi)
    freqs = [-xi, xi + 2 * omega]
    samples = _sample_times(duration, spec, freqs)
    cp = np.concatenate([G, np.sqrt(config.kappa_ex) * inputs])
    rp = np.concatenate([config.kappa, d_eff, [gamma, omega, xi]])
    h0 = 0.05 / (2 * omega + abs(xi))
    values = _run(K.rhs_two_sideband, np.zeros(n + 1), samples, spec, cp, rp, n, h0)
    fit = demodulate(samples, values, freqs)
    if fit.drift > spec.drift_tol:
        raise OracleError(f"two-sideband trajectory did not settle (drift {fit.drift:.3g})")
    minus, plus = fit.amplitudes
    am = ResponseState(minus[:n].copy(), complex(minus[n]), xi)
    ap = ResponseState(plus[:n].copy(), complex(plus[n]), xi)
    rwa = solve_response(config, inputs, xi)
    err = _relative_gap(am.a_minus, rwa.a_minus)
    scale = np.max(np.abs(minus[:n]))
    ratio = float(np.max(np.abs(plus)) / scale) if scale > 0 else 0.0
    return SidebandEstimate(am, ap, rwa, err, ratio, fit.drift, duration)


@dataclass(frozen=True)
class NonlinearRun:
    """Outcome of a full nonlinear integration.

    ``settle_residual`` is the largest relative distance between the
    trajectory over the trailing window and the reference branch
    (meaningful for ``eps_s = 0``).  ``escaped`` flags a trajectory that ended
    away from the reference branch.
    """

    branch: MeanFieldBranch
    times: np.ndarray
    trajectory: np.ndarray
    settle_residual: float
    escaped: bool
    final_branch: Optional[int]
    sidebands: Optional[tuple[ResponseState, ResponseState]]
    drift: float
    duration: float


def integrate_nonlinear(
    config: NetworkConfig,
    signals=None,
    xi: float = 0.0,
    spec: TrajectorySpec = TrajectorySpec(),
    branch: Optional[int] = None,
    initial=None,
    kick: float = 0.0,
    settle_tol: float = 1e-6,
) -> NonlinearRun:
    """Integrate the full classical equations with control and signal drives.

    ``branch`` picks the reference mean-field branch (default: the only
    stable one, or the stable branch of smallest ``|x|``).  ``initial`` is
    ``"rest"`` (default), ``"branch"`` to start on the reference branch, or
    an explicit state; ``kick`` adds a relative perturbation to it.  Signal
    detunings are ``xi`` above each port's effective detuning.

    When signals are present the fluctuations (trajectory minus mean field)
    are demodulated in the rotated frame, returning the ``(anti-Stokes,
    Stokes)`` estimates.
    """
    if config.level != PHYSICAL:
        raise ConfigError("nonlinear integration needs a physical config")
    n = config.n
    branches = solve_mean_fields(config)
    if branch is None:
        stable = [i for i, b in enumerate(branches) if b.stable]
        if not stable:
            raise OracleError("no stable mean-field branch")
        branch = min(stable, key=lambda i: abs(branches[i].x))
    ref = branches[branch]
    inputs = np.zeros(n, dtype=complex) if signals is None else _inputs(signals)
    xi = float(xi)

    eig = np.linalg.eigvals(
        fluctuation_drift(ref.G_eff, ref.delta_eff, config.kappa, config.mech.omega_m, config.mech.gamma_m)
    )
    decay = _slowest(eig)
    if spec.duration is None:
        if decay <= 0:
            raise OracleError("reference branch is unstable; give an explicit duration")
        duration = spec.resolve(decay)
    else:
        duration = spec.duration

    ports = config.ports
    kex = config.kappa_ex
    cp = np.concatenate(
        [
            np.sqrt(kex) * np.array([p.drive_amplitude * np.exp(1j * p.drive_phase) for p in ports]),
            np.sqrt(kex) * inputs,
        ]
    )
    rp = np.concatenate(
        [
            config.kappa,
            [p.detuning for p in ports],
            [p.g for p in ports],
            ref.delta_eff + xi,
            [config.mech.gamma_m, config.mech.omega_m],
        ]
    )
    fixed = np.concatenate([ref.alpha, [ref.beta]])
    if initial is None or (isinstance(initial, str) and initial == "rest"):
        y0 = np.zeros(n + 1, dtype=complex)
    elif isinstance(initial, str) and initial == "branch":
        y0 = fixed.copy()
    else:
        y0 = np.asarray(initial, dtype=complex).copy()
    if kick:
        y0 = y0 + kick * np.max(np.abs(fixed)) * (1 + 1j) / np.sqrt(2)

    freqs = [-xi, xi + 2 * config.mech.omega_m]
    samples = _sample_times(duration, spec, freqs)
    fast = config.mech.omega_m + float(np.max(np.abs(ref.delta_eff))) + abs(xi)
    values = _run(K.rhs_nonlinear, y0, samples, spec, cp, rp, n, 0.05 / fast)

    scale = np.maximum(np.abs(fixed), 1e-300)
    dev = np.abs(values - fixed) / np.max(scale)
    settle = float(np.max(dev))
    final = values[-1]
    distances = [
        np.max(np.abs(final - np.concatenate([b.alpha, [b.beta]]))) / max(np.max(np.abs(fixed)), 1e-300)
        for b in branches
    ]
    nearest = int(np.argmin(distances))
    final_branch = nearest if distances[nearest] < settle_tol else None
    escaped = final_branch != branch

    sidebands = None
    drift = 0.0
    if np.any(inputs != 0):
        rot = np.exp(1j * np.outer(samples, np.concatenate([ref.delta_eff, [config.mech.omega_m]])))
        fluct = (values - fixed) * rot
        fit = demodulate(samples, fluct, freqs)
        drift = fit.drift
        minus, plus = fit.amplitudes
        sidebands = (
            ResponseState(minus[:n].copy(), complex(minus[n]), xi),
            ResponseState(plus[:n].copy(), complex(plus[n]), xi),
        )
    return NonlinearRun(ref, samples, values, settle, escaped, final_branch, sidebands, drift, duration)
