"""Linear anti-Stokes response of the red-sideband (rotating-wave) network.

At signal detuning ``xi`` the steady state obeys

    f_j a_j = -i G_j b + sqrt(kappa_ex_j) in_j
    h b     = -i sum_j conj(G_j) a_j

with ``f_j = kappa_j/2 - i xi`` and ``h = gamma_m/2 - i xi``.  Eliminating the
cavity amplitudes leaves a scalar equation for ``b``, so the general N-port
solve costs O(N).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import LINEARIZED, ConfigError, NetworkConfig, SignalSet, cis


@dataclass(frozen=True)
class Susceptibilities:
    f: np.ndarray
    h: complex

    @classmethod
    def at(cls, config: NetworkConfig, xi: float) -> "Susceptibilities":
        return cls(0.5 * config.kappa - 1j * xi, 0.5 * config.mech.gamma_m - 1j * xi)


@dataclass(frozen=True)
class ResponseState:
    a_minus: np.ndarray
    b_minus: complex
    xi: float

    def residual(self, config: NetworkConfig, inputs: np.ndarray) -> float:
        """Relative residual of the defining linear equations."""
        chi = Susceptibilities.at(config, self.xi)
        G = config.couplings
        drive = np.sqrt(config.kappa_ex) * inputs
        r_cav = chi.f * self.a_minus + 1j * G * self.b_minus - drive
        r_mech = chi.h * self.b_minus + 1j * np.sum(np.conj(G) * self.a_minus)
        scale = max(
            np.max(np.abs(drive)),
            np.max(np.abs(chi.f * self.a_minus)),
            abs(chi.h * self.b_minus),
            1e-300,
        )
        return float(max(np.max(np.abs(r_cav)), abs(r_mech)) / scale)


def _inputs(signals) -> np.ndarray:
    if isinstance(signals, SignalSet):
        return signals.inputs
    return np.asarray(signals, dtype=complex)


def _require_linearized(config: NetworkConfig) -> None:
    if config.level != LINEARIZED:
        raise ConfigError("response needs a linearized config; see meanfield.to_linearized")


def solve_response(config: NetworkConfig, signals, xi: float) -> ResponseState:
    """Anti-Stokes amplitudes at detuning ``xi`` by exact elimination.

    ``signals`` is a :class:`SignalSet` or an array of complex inputs
    ``eps_j exp(i phi_j)``.
    """
    _require_linearized(config)
    inputs = _inputs(signals)
    xi = float(xi)
    chi = Susceptibilities.at(config, xi)
    G = config.couplings
    drive = np.sqrt(config.kappa_ex) * inputs
    num = np.sum(np.conj(G) * drive / chi.f)
    den = chi.h + np.sum((G.real**2 + G.imag**2) / chi.f)
    b = complex(-1j * num / den)
    a = (-1j * G * b + drive) / chi.f
    return ResponseState(a, b, xi)


def closed_form_three_port(config: NetworkConfig, signals, xi: float) -> ResponseState:
    """Three-port amplitudes from the explicit rational expressions.

    Uses the cofactor form with ``D = f1 f2 f3 h + f2 f3|G1|^2 + f1 f3|G2|^2
    + f1 f2|G3|^2`` and ``M_j`` the minor belonging to port ``j``.  Inputs may
    have arbitrary amplitudes and phases; the single-target formulas follow by
    zeroing entries.
    """
    _require_linearized(config)
    if config.n != 3:
        raise ConfigError(f"closed form is for 3 ports, got {config.n}")
    inputs = _inputs(signals)
    xi = float(xi)
    chi = Susceptibilities.at(config, xi)
    f1, f2, f3 = chi.f
    h = chi.h
    G1, G2, G3 = config.couplings
    s1, s2, s3 = np.sqrt(config.kappa_ex) * inputs
    g1, g2, g3 = abs(G1) ** 2, abs(G2) ** 2, abs(G3) ** 2

    D = f1 * f2 * f3 * h + f2 * f3 * g1 + f1 * f3 * g2 + f1 * f2 * g3
    M1 = f2 * f3 * h + f3 * g2 + f2 * g3
    M2 = f1 * f3 * h + f3 * g1 + f1 * g3
    M3 = f1 * f2 * h + f2 * g1 + f1 * g2
    c = np.conj

    a1 = (s1 * M1 - s2 * f3 * G1 * c(G2) - s3 * f2 * G1 * c(G3)) / D
    a2 = (s2 * M2 - s1 * f3 * G2 * c(G1) - s3 * f1 * G2 * c(G3)) / D
    a3 = (s3 * M3 - s1 * f2 * G3 * c(G1) - s2 * f1 * G3 * c(G2)) / D
    b = -1j * (s1 * c(G1) * f2 * f3 + s2 * c(G2) * f1 * f3 + s3 * c(G3) * f1 * f2) / D
    return ResponseState(np.array([a1, a2, a3], dtype=complex), complex(b), xi)


def output_amplitudes(config: NetworkConfig, state: ResponseState, signals) -> np.ndarray:
    """Output fields ``sqrt(kappa_ex_j) a_j - in_j`` for every port."""
    return np.sqrt(config.kappa_ex) * state.a_minus - _inputs(signals)


def output_amplitude(config: NetworkConfig, state: ResponseState, port: int, signals) -> complex:
    return complex(output_amplitudes(config, state, signals)[port])


def normalized_output_energy(config: NetworkConfig, state: ResponseState, signals) -> np.ndarray:
    """``S_j = |out_j / eps_j|^2``; NaN where port ``j`` is undriven."""
    inputs = _inputs(signals)
    out = output_amplitudes(config, state, inputs)
    amp = np.abs(inputs)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(amp > 0, np.abs(out) ** 2 / np.where(amp > 0, amp, 1.0) ** 2, np.nan)
    return s


@dataclass(frozen=True)
class Control:
    """A coherent control signal on ``port`` with relative amplitude ``eta``."""

    port: int
    eta: float = 1.0
    phi: float = 0.0


def transmission_inputs(n: int, source: int, control: Optional[Control] = None) -> np.ndarray:
    inputs = np.zeros(n, dtype=complex)
    inputs[source] = 1.0
    if control is not None:
        if control.port == source:
            raise ConfigError("control port must differ from the source port")
        inputs[control.port] = control.eta * cis(control.phi)
    return inputs


def transmission_coefficient(
    config: NetworkConfig,
    source: int,
    dest: int,
    xi: float,
    control: Optional[Control] = None,
) -> complex:
    """``t_{source->dest} = out_dest / eps_source`` with a unit target signal.

    Ports are 0-based.  The optional control signal is referenced to the
    target signal's phase.
    """
    if source == dest:
        raise ConfigError("source and destination ports must differ")
    if control is not None and control.port == dest:
        raise ConfigError("control port must differ from the destination port")
    inputs = transmission_inputs(config.n, source, control)
    state = solve_response(config, inputs, xi)
    return output_amplitude(config, state, dest, inputs)


def symmetric_transmission(
    G: float,
    G_control: float,
    theta: float,
    eta: float,
    phi: float,
    xi: float,
    gamma_m: float,
    kappa: float = 1.0,
) -> tuple[complex, complex]:
    """Closed forms for ``(t_{1->2}, t_{2->1})`` in the symmetric three-port case.

    Overcoupled ports of equal loss ``kappa``, couplings ``G``,
    ``G exp(i theta)`` and ``G_control`` on ports 1, 2, 3, and a control signal
    of relative amplitude ``eta`` and phase ``phi`` on port 3.
    """
    f = kappa / 2 - 1j * xi
    h = gamma_m / 2 - 1j * xi
    Dp = f * (f * h + 2 * G**2 + G_control**2)
    cross = G * G_control * eta * cis(phi)
    t12 = -kappa * (G**2 + cross) * cis(theta) / Dp
    t21 = -kappa * (G**2 * cis(-theta) + cross) / Dp
    return complex(t12), complex(t21)


def response_grid(config: NetworkConfig, signals, xi: Sequence[float]) -> list[ResponseState]:
    return [solve_response(config, signals, x) for x in xi]
