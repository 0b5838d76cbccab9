import numpy as np
import pytest

from conftest import random_inputs, random_linear
from omniport import NetworkConfig, SignalSet, solve_response
from omniport.meanfield import calibrate_drives, solve_mean_fields
from omniport.model import ConfigError, MechanicalMode, PhysicalPort
from omniport.oracle import (
    OracleError,
    TrajectorySpec,
    demodulate,
    integrate_nonlinear,
    integrate_rwa,
    integrate_two_sideband,
)
from omniport.response import transmission_inputs


def _rel(est, ref):
    a = np.concatenate([est.a_minus, [est.b_minus]])
    b = np.concatenate([ref.a_minus, [ref.b_minus]])
    return np.max(np.abs(a - b)) / np.max(np.abs(b))


def test_demodulate_recovers_tones():
    t = np.linspace(0, 50, 3000)
    y = np.stack([2 * np.exp(-1.3j * t) + 0.1j * np.exp(4.0j * t), np.exp(-1.3j * t)], axis=1)
    fit = demodulate(t, y, [-1.3, 4.0])
    np.testing.assert_allclose(fit.amplitudes, [[2, 1], [0.1j, 0]], atol=1e-12)
    assert fit.drift < 1e-12


def test_demodulate_reports_drift():
    t = np.linspace(0, 10, 1000)
    fit = demodulate(t, (np.exp(-0.1 * t) * np.exp(1j * t))[:, None], [1.0])
    assert fit.drift > 1e-2


def test_rwa_oracle_matches_response(rng):
    for _ in range(5):
        net = random_linear(rng, int(rng.integers(2, 5)), gamma=(0.05, 0.5))
        inp = random_inputs(rng, net.n)
        xi = float(rng.uniform(-5, 5))
        est = integrate_rwa(net, inp, xi)
        assert _rel(est.state, solve_response(net, inp, xi)) <= 1e-6
        assert est.drift <= 1e-8
        assert np.max(np.abs(est.stokes)) <= 1e-6 * np.max(np.abs(est.state.a_minus))


def test_short_duration_rejected():
    net = NetworkConfig.symmetric([1, 1], [0, 0], gamma_m=0.1)
    with pytest.raises(ConfigError, match="20 decay times"):
        integrate_rwa(net, [1, 0], 0.0, TrajectorySpec(duration=1.0))
    with pytest.raises(ConfigError):
        TrajectorySpec(window=1.5)


def test_unsettled_window_raises():
    net = NetworkConfig.symmetric([1, 1], [0, 0], gamma_m=0.1)
    with pytest.raises(OracleError, match="did not settle"):
        integrate_rwa(net, [1, 0], 0.0, TrajectorySpec(decay_multiple=20, drift_tol=1e-14))


def test_step_budget_reported():
    net = NetworkConfig.symmetric([1, 1], [0, 0], gamma_m=0.1)
    with pytest.raises(OracleError, match="step budget"):
        integrate_rwa(net, [1, 0], 0.0, TrajectorySpec(max_steps=10))


def test_two_sideband_errors_shrink_with_frequency():
    errs = []
    for om in (100.0, 1000.0):
        net = NetworkConfig.symmetric([1, 1, 1], [0, 0, 0], omega_m=om, gamma_m=0.05)
        est = integrate_two_sideband(net, transmission_inputs(3, 0), 0.3, TrajectorySpec(rtol=1e-9, atol=1e-11))
        assert est.drift <= 1e-8
        assert est.stokes_ratio <= 3e-2
        errs.append(est.rwa_error)
    assert errs[0] <= 3e-2 and errs[1] < errs[0]


def test_nonlinear_settles_on_branch():
    cfg = calibrate_drives(MechanicalMode(20.0, 0.1), [0, 0, 0], [1, 1, 1], [0.01] * 3, [0.5, 0.5j, 0.3])
    run = integrate_nonlinear(cfg, initial="rest")
    assert run.settle_residual <= 1e-8
    assert not run.escaped


def test_nonlinear_small_signal_matches_two_sideband():
    # weak probe on top of the control drive: fluctuations follow the linear theory
    cfg = calibrate_drives(MechanicalMode(20.0, 0.1), [0, 0], [1, 1], [0.01, 0.01], [0.5, 0.5])
    (ref,) = [b for b in solve_mean_fields(cfg) if b.stable and abs(b.delta_eff[0] - 20) < 1e-9]
    eps_s = 1e-3 * cfg.ports[0].drive_amplitude
    sig = SignalSet((eps_s, 0.0), (0.0, 0.0))
    run = integrate_nonlinear(cfg, sig, 0.2, initial="branch", spec=TrajectorySpec(rtol=1e-10, atol=1e-10))
    lin = NetworkConfig.linearized(ref.G_eff, kappa=1.0, omega_m=20.0, gamma_m=0.1)
    ts = integrate_two_sideband(lin, sig, 0.2, TrajectorySpec(rtol=1e-10, atol=1e-12))
    minus, _ = run.sidebands
    assert _rel(minus, ts.anti_stokes) <= 1e-2


def test_nonlinear_needs_physical_config():
    with pytest.raises(ConfigError):
        integrate_nonlinear(NetworkConfig.symmetric([1, 1], [0, 0]))


def test_bistable_branch_choice_and_escape():
    cfg = NetworkConfig(
        MechanicalMode(10.0, 0.1),
        (PhysicalPort(0, 1, 0.05, 100.0, 0.0, 16.0), PhysicalPort(0, 1, 0.05, 0.0, 0.0, 10.0)),
        "physical",
    )
    high = integrate_nonlinear(cfg, branch=0, initial="branch", kick=1e-6)
    assert high.final_branch == 0 and not high.escaped
    middle = integrate_nonlinear(cfg, branch=1, initial="branch", kick=1e-3,
                                 spec=TrajectorySpec(duration=400.0))
    assert middle.escaped
