"""Classical steady state of the driven network and its linearization.

Setting the time derivatives of the noise-free Langevin equations to zero
gives

    alpha_j = 2 sqrt(kappa_ex_j) eps_j exp(i vartheta_j) / (kappa_j + 2i D'_j)
    beta    = -2i sum_j g_j |alpha_j|^2 / (gamma_m + 2i omega_m)

with ``D'_j = Delta_j + g_j x`` and ``x = beta + conj(beta)``.  Everything
depends on the single real unknown ``x``, which satisfies

    x (gamma_m^2 + 4 omega_m^2)
        = -8 omega_m sum_j g_j 4 kappa_ex_j eps_j^2 / (kappa_j^2 + 4 (Delta_j + g_j x)^2).

Roots are located by a sign-change scan with refinement around near-tangent
extrema, then polished with Brent's method.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .model import (
    LINEARIZED,
    PHYSICAL,
    ConfigError,
    LinearPort,
    MechanicalMode,
    NetworkConfig,
    PhysicalPort,
    cis,
)


class BracketError(RuntimeError):
    """Root scan could not isolate every root of the self-consistency."""

    def __init__(self, message: str, interval: tuple[float, float]):
        super().__init__(f"{message} on x in [{interval[0]:.6g}, {interval[1]:.6g}]")
        self.interval = interval


class SidebandError(ConfigError):
    """A branch is not on the red mechanical sideband."""


@dataclass(frozen=True)
class MeanFieldBranch:
    x: float
    alpha: np.ndarray
    beta: complex
    delta_eff: np.ndarray
    G_eff: np.ndarray
    stable: bool

    def residuals(self, config: NetworkConfig) -> tuple[float, float]:
        """Relative residuals of the cavity and mechanical fixed-point equations."""
        p = _params(config)
        d_eff = p.delta + p.g * (2.0 * self.beta.real)
        lhs = (p.kappa + 2j * d_eff) * self.alpha
        rhs = 2 * np.sqrt(p.kappa_ex) * p.eps * np.exp(1j * p.phase)
        scale = np.maximum(np.abs(rhs), 1e-300)
        r_cav = float(np.max(np.abs(lhs - rhs) / scale)) if np.any(p.eps > 0) else float(
            np.max(np.abs(self.alpha))
        )
        src = -2j * np.sum(p.g * np.abs(self.alpha) ** 2)
        lhs_b = (p.gamma + 2j * p.omega) * self.beta
        r_mech = abs(lhs_b - src) / max(abs(src), abs(lhs_b), 1e-300)
        if abs(src) == 0 and abs(lhs_b) == 0:
            r_mech = 0.0
        return r_cav, float(r_mech)


@dataclass(frozen=True)
class _Params:
    kappa: np.ndarray
    kappa_ex: np.ndarray
    g: np.ndarray
    eps: np.ndarray
    phase: np.ndarray
    delta: np.ndarray
    omega: float
    gamma: float


def _params(config: NetworkConfig) -> _Params:
    if config.level != PHYSICAL:
        raise ConfigError("mean-field solve needs a physical config")
    ports = config.ports
    arr = lambda name: np.array([getattr(p, name) for p in ports], dtype=float)  # noqa: E731
    return _Params(
        kappa=config.kappa,
        kappa_ex=config.kappa_ex,
        g=arr("g"),
        eps=arr("drive_amplitude"),
        phase=arr("drive_phase"),
        delta=arr("detuning"),
        omega=config.mech.omega_m,
        gamma=config.mech.gamma_m,
    )


def self_consistency(config: NetworkConfig):
    """Return ``F(x)`` whose real roots are the allowed values of ``beta + conj(beta)``."""
    p = _params(config)
    lin = p.gamma**2 + 4 * p.omega**2
    weight = 8 * p.omega * p.g * 4 * p.kappa_ex * p.eps**2

    def F(x):
        x = np.asarray(x, dtype=float)
        d = p.delta + p.g * x[..., None]
        return x * lin + np.sum(weight / (p.kappa**2 + 4 * d**2), axis=-1)

    return F


def search_bound(config: NetworkConfig) -> float:
    """Half-width ``X`` of the interval guaranteed to contain every root.

    ``|x| <= 8 sum_j |g_j| kappa_ex_j eps_j^2 / (omega_m kappa_j^2)``; the
    returned bound is ``16 N max_j(...)``, which dominates it.
    """
    p = _params(config)
    per_port = np.abs(p.g) * p.eps**2 * p.kappa_ex / (p.omega * p.kappa**2)
    return float(16.0 * len(p.g) * np.max(per_port))


def _find_roots(config: NetworkConfig, points: int) -> list[float]:
    X = search_bound(config)
    if X == 0.0:
        return [0.0]
    F = self_consistency(config)
    xs = np.linspace(-X, X, points)
    fs = F(xs)
    interval = (-X, X)
    if not (fs[0] < 0 < fs[-1]):
        raise BracketError("self-consistency does not change sign across the bound", interval)

    brackets: list[tuple[float, float]] = []
    for i in range(points - 1):
        if fs[i] == 0.0:
            brackets.append((xs[i], xs[i]))
        elif fs[i] * fs[i + 1] < 0:
            brackets.append((xs[i], xs[i + 1]))

    # A pair of roots closer than the scan spacing hides inside a discrete
    # extremum that never changes sign; resolve it by locating the extremum.
    for i in range(1, points - 1):
        left, mid, right = fs[i - 1], fs[i], fs[i + 1]
        is_min = mid < left and mid < right and mid > 0
        is_max = mid > left and mid > right and mid < 0
        if not (is_min or is_max):
            continue
        sign = 1.0 if is_min else -1.0
        opt = minimize_scalar(
            lambda x: sign * F(x), bounds=(xs[i - 1], xs[i + 1]), method="bounded",
            options={"xatol": 1e-14 * X},
        )
        xe = float(opt.x)
        fe = float(F(xe))
        if fe * mid < 0:
            brackets.append((xs[i - 1], xe))
            brackets.append((xe, xs[i + 1]))

    roots = []
    for lo, hi in sorted(brackets):
        if lo == hi:
            roots.append(float(lo))
            continue
        r = brentq(lambda x: float(F(x)), lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
        roots.append(float(r))
    roots.sort()
    return roots


def expand_branch(config: NetworkConfig, x: float) -> MeanFieldBranch:
    """Turn a root ``x`` into the full set of mean fields."""
    p = _params(config)
    d_eff = p.delta + p.g * x
    drive = np.array([e * cis(t) for e, t in zip(p.eps, p.phase)], dtype=complex)
    alpha = 2 * np.sqrt(p.kappa_ex) * drive / (p.kappa + 2j * d_eff)
    beta = complex(-2j * np.sum(p.g * np.abs(alpha) ** 2) / (p.gamma + 2j * p.omega))
    branch = MeanFieldBranch(
        x=float(x),
        alpha=alpha,
        beta=beta,
        delta_eff=d_eff,
        G_eff=p.g * alpha,
        stable=False,
    )
    return MeanFieldBranch(**{**branch.__dict__, "stable": assess_stability(branch, config)})


def solve_mean_fields(config: NetworkConfig, points: int = 10_000) -> list[MeanFieldBranch]:
    """Every mean-field branch of a physical network, sorted by ``x``.

    ``points`` is the resolution of the sign-change scan over ``[-X, X]``
    (see :func:`search_bound`).
    """
    return [expand_branch(config, x) for x in _find_roots(config, points)]


def fluctuation_drift(G, delta_eff, kappa, omega_m: float, gamma_m: float) -> np.ndarray:
    """Real drift matrix of the linearized fluctuations, counter-rotating terms kept.

    State ordering is ``(Re a_1, Im a_1, ..., Re a_N, Im a_N, Re b, Im b)``.
    """
    G = np.asarray(G, dtype=complex)
    n = len(G)
    A = np.zeros((2 * n + 2, 2 * n + 2))
    q, p = 2 * n, 2 * n + 1
    for j in range(n):
        u, v = 2 * j, 2 * j + 1
        Gr, Gi = G[j].real, G[j].imag
        A[u, u] = A[v, v] = -0.5 * kappa[j]
        A[u, v] = delta_eff[j]
        A[v, u] = -delta_eff[j]
        A[u, q] = 2 * Gi
        A[v, q] = -2 * Gr
        A[p, u] = -2 * Gr
        A[p, v] = -2 * Gi
    A[q, q] = A[p, p] = -0.5 * gamma_m
    A[q, p] = omega_m
    A[p, q] = -omega_m
    return A


def drift_matrix(branch: MeanFieldBranch, config: NetworkConfig) -> np.ndarray:
    return fluctuation_drift(
        branch.G_eff, branch.delta_eff, config.kappa, config.mech.omega_m, config.mech.gamma_m
    )


def assess_stability(branch: MeanFieldBranch, config: NetworkConfig) -> bool:
    """True when every eigenvalue of :func:`drift_matrix` has negative real part."""
    eig = np.linalg.eigvals(drift_matrix(branch, config))
    return bool(np.all(eig.real < 0))


def to_linearized(
    branch: MeanFieldBranch,
    config: NetworkConfig,
    tol: float = 1e-6,
    allow_uncoupled: bool = False,
) -> NetworkConfig:
    """Linearized network around ``branch``.

    Every port must sit on the red sideband, ``|D'_j - omega_m| <= tol *
    omega_m``.  With ``allow_uncoupled`` a port carrying no coupling
    (``G_j = 0``) is exempt, since its detuning never enters the response.
    """
    if not branch.stable:
        raise ConfigError("cannot linearize around an unstable branch")
    omega = config.mech.omega_m
    miss = np.abs(branch.delta_eff - omega) / omega
    if allow_uncoupled:
        miss = np.where(np.abs(branch.G_eff) == 0, 0.0, miss)
    worst = int(np.argmax(miss))
    if miss[worst] > tol:
        raise SidebandError(
            f"port {worst + 1} is off the red sideband: "
            f"D' = {branch.delta_eff[worst]:.6g}, omega_m = {omega:.6g}"
        )
    ports = tuple(
        LinearPort(
            kappa_0=p.kappa_0,
            kappa_ex=p.kappa_ex,
            G_mod=float(abs(G)),
            G_phase=float(np.angle(G)) if G != 0 else 0.0,
        )
        for p, G in zip(config.ports, branch.G_eff)
    )
    return NetworkConfig(config.mech, ports, LINEARIZED)


def calibrate_drives(
    mech: MechanicalMode,
    kappa_0,
    kappa_ex,
    g,
    G_target,
) -> NetworkConfig:
    """Physical network whose self-consistent branch has couplings ``G_target``.

    Each control drive is tuned so that ``D'_j = omega_m`` exactly and
    ``g_j alpha_j = G_target_j``; the bare detunings absorb the mechanical
    shift.  Ports with ``g_j = 0`` must ask for zero coupling.
    """
    kappa_0 = np.asarray(kappa_0, dtype=float)
    kappa_ex = np.asarray(kappa_ex, dtype=float)
    g = np.asarray(g, dtype=float)
    G_target = np.asarray(G_target, dtype=complex)
    kappa = kappa_0 + kappa_ex
    omega, gamma = mech.omega_m, mech.gamma_m
    if np.any((g == 0) & (G_target != 0)):
        raise ConfigError("a port with g = 0 cannot carry a nonzero coupling")
    safe_g = np.where(g == 0, 1.0, g)
    alpha = np.where(g == 0, 0.0, G_target / safe_g)
    # alpha = 2 sqrt(kex) eps e^{i vt} / (kappa + 2i omega)
    drive = alpha * (kappa + 2j * omega) / (2 * np.sqrt(kappa_ex))
    x = -8 * omega * np.sum(g * np.abs(alpha) ** 2) / (gamma**2 + 4 * omega**2)
    ports = tuple(
        PhysicalPort(
            kappa_0=float(kappa_0[j]),
            kappa_ex=float(kappa_ex[j]),
            g=float(g[j]),
            drive_amplitude=float(abs(drive[j])),
            drive_phase=float(np.angle(drive[j])),
            detuning=float(omega - g[j] * x),
        )
        for j in range(len(g))
    )
    return NetworkConfig(mech, ports, PHYSICAL)

