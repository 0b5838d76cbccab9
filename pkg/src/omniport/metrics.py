"""Figures of merit over detuning grids.

A :class:`Scenario` bundles a linearized network, the signal set that drives
it (used for output energies and mechanical excitation) and a transmission
setup: a pair of target ports plus an optional control signal.  Forward
transmission drives the first target port, backward the second; in both
cases the control signal keeps its relative amplitude and phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .model import ConfigError, NetworkConfig, SignalSet, validate, validate_signals
from .response import (
    Control,
    ResponseState,
    output_amplitudes,
    solve_response,
    transmission_inputs,
)

#: Backward rates below this count as zero when forming the isolation ratio.
ISOLATION_FLOOR = 1e-30
#: Largest transmission rate still counted as a frequency-independent blockade.
FIPB_THRESHOLD = 1e-20
#: Output share a port needs at zero detuning to count as coherent perfect synthesis.
CPS_SHARE = 1 - 1e-3
DEGENERATE_OUTPUT = 1e-30


@dataclass(frozen=True)
class Transmission:
    forward: tuple = (0, 1)
    control: Optional[Control] = None

    def __post_init__(self):
        src, dst = self.forward
        if src == dst:
            raise ConfigError("transmission ports must differ")
        if self.control is not None and self.control.port in (src, dst):
            raise ConfigError("control port must differ from both target ports")


@dataclass(frozen=True)
class Scenario:
    network: NetworkConfig
    signals: SignalSet
    transmission: Transmission = field(default_factory=Transmission)

    def __post_init__(self):
        validate(self.network).raise_if_invalid()
        validate_signals(self.signals, self.network.n).raise_if_invalid()
        n = self.network.n
        ports = list(self.transmission.forward)
        if self.transmission.control is not None:
            ports.append(self.transmission.control.port)
        if any(not 0 <= p < n for p in ports):
            raise ConfigError(f"transmission port out of range for {n} ports")

    @classmethod
    def targeted(
        cls,
        network: NetworkConfig,
        source: int = 0,
        dest: int = 1,
        control: Optional[Control] = None,
    ) -> "Scenario":
        """Scenario whose signal set is the forward transmission drive."""
        inputs = transmission_inputs(network.n, source, control)
        signals = SignalSet(tuple(np.abs(inputs)), tuple(np.angle(inputs)))
        return cls(network, signals, Transmission((source, dest), control))


@dataclass(frozen=True)
class SpectrumRecord:
    """Metrics at one detuning.

    ``S[j]`` is ``|out_j / eps_j|^2`` for driven ports; undriven ports are
    normalized by the largest input amplitude instead.
    """

    xi: float
    T_fwd: float
    T_bwd: float
    I: float
    S: tuple
    b_abs2: float


def isolation_ratio(T_fwd: float, T_bwd: float) -> float:
    if T_bwd < ISOLATION_FLOOR:
        return math.inf
    return T_fwd / T_bwd


def transmission_states(scenario: Scenario, xi: float) -> tuple[ResponseState, ResponseState]:
    n = scenario.network.n
    src, dst = scenario.transmission.forward
    ctl = scenario.transmission.control
    fwd = solve_response(scenario.network, transmission_inputs(n, src, ctl), xi)
    bwd = solve_response(scenario.network, transmission_inputs(n, dst, ctl), xi)
    return fwd, bwd


def record_from_states(
    scenario: Scenario,
    state: ResponseState,
    fwd: ResponseState,
    bwd: ResponseState,
) -> SpectrumRecord:
    """Assemble a record from already-solved response states."""
    net = scenario.network
    n = net.n
    src, dst = scenario.transmission.forward
    ctl = scenario.transmission.control
    out_f = output_amplitudes(net, fwd, transmission_inputs(n, src, ctl))
    out_b = output_amplitudes(net, bwd, transmission_inputs(n, dst, ctl))
    T_fwd = float(abs(out_f[dst]) ** 2)
    T_bwd = float(abs(out_b[src]) ** 2)

    inputs = scenario.signals.inputs
    out = output_amplitudes(net, state, inputs)
    amp = np.abs(inputs)
    norm = np.where(amp > 0, amp, np.max(amp))
    S = tuple(float(v) for v in np.abs(out) ** 2 / norm**2)
    return SpectrumRecord(
        xi=float(state.xi),
        T_fwd=T_fwd,
        T_bwd=T_bwd,
        I=isolation_ratio(T_fwd, T_bwd),
        S=S,
        b_abs2=float(abs(state.b_minus) ** 2),
    )


def point(scenario: Scenario, xi: float) -> SpectrumRecord:
    state = solve_response(scenario.network, scenario.signals, xi)
    fwd, bwd = transmission_states(scenario, xi)
    return record_from_states(scenario, state, fwd, bwd)


def spectrum(scenario: Scenario, grid: Sequence[float]) -> list[SpectrumRecord]:
    """One record per grid point, ordered by ``xi``."""
    return [point(scenario, x) for x in sorted(float(x) for x in grid)]


def _direction_rates(scenario: Scenario, grid, direction: str) -> np.ndarray:
    records = spectrum(scenario, grid)
    if direction == "forward":
        return np.array([r.T_fwd for r in records])
    if direction == "backward":
        return np.array([r.T_bwd for r in records])
    if direction == "both":
        return np.array([max(r.T_fwd, r.T_bwd) for r in records])
    raise ValueError(f"direction must be forward, backward or both, not {direction!r}")


def fipb_check(scenario: Scenario, grid: Sequence[float], direction: str = "backward") -> tuple[bool, float]:
    """Frequency-independent blockade test: ``(max rate <= 1e-20, max rate)``.

    The grid must cover at least ``[-5, 5]`` in reference units.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.min() > -5 or grid.max() < 5:
        raise ConfigError("blockade check needs a grid spanning at least [-5, 5]")
    worst = float(np.max(_direction_rates(scenario, grid, direction)))
    return worst <= FIPB_THRESHOLD, worst


@dataclass(frozen=True)
class RoutingReport:
    xi: np.ndarray
    S: np.ndarray  # (points, ports)
    shares: np.ndarray  # (points, ports); NaN rows where degenerate
    degenerate: np.ndarray  # (points,) bool
    b_abs2: np.ndarray
    share_at_zero: np.ndarray
    cps_port: Optional[int]


def _shares(out: np.ndarray) -> tuple[np.ndarray, bool]:
    energy = np.abs(out) ** 2
    if np.all(energy < DEGENERATE_OUTPUT):
        return np.full(len(out), np.nan), True
    return energy / np.sum(energy), False


def routing_report(scenario: Scenario, grid: Sequence[float]) -> RoutingReport:
    """Output-energy shares per port and the coherent-perfect-synthesis flag.

    Requires every port driven with the same amplitude and zero phase.  The
    CPS flag names the port holding at least ``1 - 1e-3`` of the output at
    ``xi = 0`` (``None`` if no port qualifies).
    """
    sig = scenario.signals
    amps = np.asarray(sig.amplitudes)
    if np.any(amps <= 0) or np.ptp(amps) != 0 or np.any(np.asarray(sig.phases) != 0):
        raise ConfigError("routing needs every port driven with equal amplitude and zero phase")
    net = scenario.network
    inputs = sig.inputs
    xs = np.array(sorted(float(x) for x in grid))
    S, shares, degen, b2 = [], [], [], []
    for x in xs:
        state = solve_response(net, inputs, x)
        out = output_amplitudes(net, state, inputs)
        S.append(np.abs(out) ** 2 / amps**2)
        sh, d = _shares(out)
        shares.append(sh)
        degen.append(d)
        b2.append(abs(state.b_minus) ** 2)
    zero = solve_response(net, inputs, 0.0)
    share0, d0 = _shares(output_amplitudes(net, zero, inputs))
    cps = None
    if not d0:
        best = int(np.argmax(share0))
        if share0[best] >= CPS_SHARE:
            cps = best
    return RoutingReport(
        xi=xs,
        S=np.array(S),
        shares=np.array(shares),
        degenerate=np.array(degen),
        b_abs2=np.array(b2),
        share_at_zero=share0,
        cps_port=cps,
    )


def max_mech_excitation(scenario: Scenario, grid: Sequence[float]) -> float:
    """Largest ``|b_-|^2`` over the grid for the scenario's signal set."""
    return float(
        max(abs(solve_response(scenario.network, scenario.signals, x).b_minus) ** 2 for x in grid)
    )
