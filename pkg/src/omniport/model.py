"""Network descriptions for N cavities sharing one mechanical mode.

All rates and frequencies are dimensionless, measured in a reference rate
chosen by the user (conventionally the total loss of port 1).  Two levels of
description exist:

* ``physical``: single-photon couplings, control drives and bare detunings.
  The mean-field solver turns these into effective couplings.
* ``linearized``: effective couplings ``G_j = |G_j| exp(i theta_j)`` with the
  red-sideband condition assumed to hold already.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Sequence, Union

import numpy as np

PHYSICAL = "physical"
LINEARIZED = "linearized"

#: ``omega_m`` must exceed this multiple of every decay rate before the
#: rotating-wave approximation is considered safe.
SIDEBAND_RATIO = 10.0


class ConfigError(ValueError):
    """Raised when a network or signal description is unusable."""


def cis(phase: float) -> complex:
    """``exp(i*phase)``, exact at integer multiples of pi/2.

    Exact values matter for the interference zeros: ``exp(1j*pi)`` carries a
    ``1e-16`` imaginary part which would otherwise leak into blockade
    amplitudes.
    """
    q = phase / (0.5 * math.pi)
    n = round(q)
    if abs(q - n) < 1e-15 * max(1.0, abs(q)):
        return (1.0 + 0j, 1j, -1.0 + 0j, -1j)[n % 4]
    return complex(math.cos(phase), math.sin(phase))


@dataclass(frozen=True)
class MechanicalMode:
    omega_m: float
    gamma_m: float


@dataclass(frozen=True)
class PhysicalPort:
    kappa_0: float
    kappa_ex: float
    g: float
    drive_amplitude: float = 0.0
    drive_phase: float = 0.0
    detuning: float = 0.0

    @property
    def kappa(self) -> float:
        return self.kappa_0 + self.kappa_ex


@dataclass(frozen=True)
class LinearPort:
    kappa_0: float
    kappa_ex: float
    G_mod: float = 0.0
    G_phase: float = 0.0

    @property
    def kappa(self) -> float:
        return self.kappa_0 + self.kappa_ex

    @property
    def G(self) -> complex:
        return self.G_mod * cis(self.G_phase)


Port = Union[PhysicalPort, LinearPort]


@dataclass(frozen=True)
class NetworkConfig:
    mech: MechanicalMode
    ports: tuple
    level: str = LINEARIZED

    def __post_init__(self):
        object.__setattr__(self, "ports", tuple(self.ports))

    @property
    def n(self) -> int:
        return len(self.ports)

    @property
    def kappa(self) -> np.ndarray:
        return np.array([p.kappa for p in self.ports], dtype=float)

    @property
    def kappa_ex(self) -> np.ndarray:
        return np.array([p.kappa_ex for p in self.ports], dtype=float)

    @property
    def kappa_0(self) -> np.ndarray:
        return np.array([p.kappa_0 for p in self.ports], dtype=float)

    @property
    def couplings(self) -> np.ndarray:
        """Complex effective couplings; only meaningful at the linearized level."""
        if self.level != LINEARIZED:
            raise ConfigError("effective couplings need a linearized config")
        return np.array([p.G for p in self.ports], dtype=complex)

    @classmethod
    def linearized(
        cls,
        couplings: Sequence[complex],
        kappa: float | Sequence[float] = 1.0,
        kappa_0: float | Sequence[float] = 0.0,
        omega_m: float = 100.0,
        gamma_m: float = 1e-3,
    ) -> "NetworkConfig":
        """Build a linearized network from complex couplings.

        ``kappa`` is the total loss; ``kappa_0`` the intrinsic part.  Scalars
        broadcast over all ports.
        """
        couplings = list(couplings)
        n = len(couplings)
        kap = np.broadcast_to(np.asarray(kappa, dtype=float), (n,))
        k0 = np.broadcast_to(np.asarray(kappa_0, dtype=float), (n,))
        ports = tuple(
            LinearPort(
                kappa_0=float(k0[j]),
                kappa_ex=float(kap[j] - k0[j]),
                G_mod=float(abs(complex(c))),
                G_phase=float(np.angle(complex(c))),
            )
            for j, c in enumerate(couplings)
        )
        return cls(MechanicalMode(omega_m, gamma_m), ports, LINEARIZED)

    @classmethod
    def symmetric(
        cls,
        moduli: Sequence[float],
        phases: Sequence[float],
        kappa: float = 1.0,
        omega_m: float = 100.0,
        gamma_m: float = 1e-3,
    ) -> "NetworkConfig":
        """Overcoupled equal-loss ports with couplings given as modulus/phase."""
        ports = tuple(
            LinearPort(0.0, kappa, float(m), float(t)) for m, t in zip(moduli, phases)
        )
        return cls(MechanicalMode(omega_m, gamma_m), ports, LINEARIZED)


@dataclass(frozen=True)
class SignalSet:
    amplitudes: tuple
    phases: tuple
    xi: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", tuple(float(a) for a in self.amplitudes))
        object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))
        object.__setattr__(self, "xi", tuple(float(x) for x in self.xi))

    @property
    def inputs(self) -> np.ndarray:
        """Complex input amplitudes ``eps_j exp(i phi_j)``."""
        return np.array(
            [a * cis(p) for a, p in zip(self.amplitudes, self.phases)], dtype=complex
        )

    @classmethod
    def single(cls, n: int, port: int, amplitude: float = 1.0, phase: float = 0.0) -> "SignalSet":
        amps = [0.0] * n
        phs = [0.0] * n
        amps[port] = amplitude
        phs[port] = phase
        return cls(tuple(amps), tuple(phs))

    @classmethod
    def uniform(cls, n: int, amplitude: float = 1.0) -> "SignalSet":
        return cls((amplitude,) * n, (0.0,) * n)

    def with_grid(self, xi: Sequence[float]) -> "SignalSet":
        return SignalSet(self.amplitudes, self.phases, tuple(xi))


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple = ()
    warnings: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.errors

    def raise_if_invalid(self) -> None:
        if self.errors:
            raise ConfigError("; ".join(self.errors))

    def render(self) -> str:
        lines = [f"error: {e}" for e in self.errors]
        lines += [f"warning: {w}" for w in self.warnings]
        if not lines:
            lines.append("ok")
        return "\n".join(lines)


def _finite(value) -> bool:
    try:
        return math.isfinite(float(value))
    except (TypeError, ValueError):
        return False


def validate(config: NetworkConfig) -> ValidationReport:
    """Check a network description.

    Hard violations (non-finite numbers, non-positive external loss, fewer
    than two ports, mixed levels) land in ``errors``.  A physical config
    whose mechanical frequency is less than ``SIDEBAND_RATIO`` times the
    largest decay rate only earns a warning.
    """
    errors: list[str] = []
    warnings: list[str] = []
    mech = config.mech
    for f in fields(MechanicalMode):
        if not _finite(getattr(mech, f.name)):
            errors.append(f"mech.{f.name} is not finite")
    if _finite(mech.omega_m) and mech.omega_m <= 0:
        errors.append("mech.omega_m must be > 0")
    if _finite(mech.gamma_m) and mech.gamma_m <= 0:
        errors.append("mech.gamma_m must be > 0")

    if config.level not in (PHYSICAL, LINEARIZED):
        errors.append(f"unknown level {config.level!r}")
    expected = PhysicalPort if config.level == PHYSICAL else LinearPort
    if not config.ports:
        errors.append("port list is empty")
    elif len(config.ports) < 2:
        errors.append("need at least 2 ports")

    for j, port in enumerate(config.ports, start=1):
        if not isinstance(port, expected):
            errors.append(f"port {j} is not a {expected.__name__} ({config.level} level)")
            continue
        bad = [f.name for f in fields(port) if not _finite(getattr(port, f.name))]
        for name in bad:
            errors.append(f"port {j}: {name} is not finite")
        if "kappa_ex" not in bad and port.kappa_ex <= 0:
            errors.append(f"port {j}: kappa_ex must be > 0 (got {port.kappa_ex})")
        if "kappa_0" not in bad and port.kappa_0 < 0:
            errors.append(f"port {j}: kappa_0 must be >= 0 (got {port.kappa_0})")
        if isinstance(port, PhysicalPort):
            if "drive_amplitude" not in bad and port.drive_amplitude < 0:
                errors.append(f"port {j}: drive_amplitude must be >= 0")
        elif "G_mod" not in bad and port.G_mod < 0:
            errors.append(f"port {j}: G_mod must be >= 0")

    if not errors and config.level == PHYSICAL:
        fastest = max(max(config.kappa), mech.gamma_m)
        ratio = mech.omega_m / fastest
        if ratio < SIDEBAND_RATIO:
            warnings.append(
                f"resolved-sideband ratio {ratio:g} < {SIDEBAND_RATIO:g}; "
                "rotating-wave results are questionable"
            )
    return ValidationReport(tuple(errors), tuple(warnings))


def validate_signals(signals: SignalSet, n: int) -> ValidationReport:
    errors: list[str] = []
    if len(signals.amplitudes) != n or len(signals.phases) != n:
        errors.append(f"signals must give {n} amplitudes and phases")
    if not all(_finite(a) for a in signals.amplitudes + signals.phases):
        errors.append("signal amplitudes/phases must be finite")
    elif any(a < 0 for a in signals.amplitudes):
        errors.append("signal amplitudes must be >= 0")
    elif not any(a > 0 for a in signals.amplitudes):
        errors.append("at least one signal amplitude must be > 0")
    xi = signals.xi
    if xi:
        if not all(_finite(x) for x in xi):
            errors.append("detuning grid must be finite")
        elif any(b <= a for a, b in zip(xi, xi[1:])):
            errors.append("detuning grid must be strictly increasing")
    return ValidationReport(tuple(errors), ())
