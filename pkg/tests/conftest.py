import math
from pathlib import Path

import numpy as np
import pytest

from omniport import LinearPort, MechanicalMode, NetworkConfig, PhysicalPort

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def random_linear(rng, n, lossy=True, gamma=(1e-4, 0.2)):
    """Random linearized network with ``n`` ports."""
    ports = tuple(
        LinearPort(
            kappa_0=float(rng.uniform(0.0, 0.5)) if lossy else 0.0,
            kappa_ex=float(rng.uniform(0.2, 2.0)),
            G_mod=float(rng.uniform(0.0, 3.0)),
            G_phase=float(rng.uniform(-math.pi, math.pi)),
        )
        for _ in range(n)
    )
    mech = MechanicalMode(100.0, float(10 ** rng.uniform(*np.log10(gamma))))
    return NetworkConfig(mech, ports)


def random_inputs(rng, n):
    return rng.uniform(0.0, 2.0, n) * np.exp(1j * rng.uniform(-math.pi, math.pi, n))


def random_physical(rng, n=None):
    n = int(rng.integers(2, 5)) if n is None else n
    ports = [
        PhysicalPort(
            kappa_0=float(rng.uniform(0, 0.3)),
            kappa_ex=float(rng.uniform(0.5, 1.5)),
            g=float(rng.uniform(0.01, 0.1)),
            drive_amplitude=float(rng.uniform(0, 150)),
            drive_phase=float(rng.uniform(0, 2 * math.pi)),
            detuning=float(rng.uniform(-5, 30)),
        )
        for _ in range(n)
    ]
    mech = MechanicalMode(float(rng.uniform(5, 50)), float(rng.uniform(0.01, 0.5)))
    return NetworkConfig(mech, tuple(ports), "physical")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def scenarios_dir():
    return SCENARIOS


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
