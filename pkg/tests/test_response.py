import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from omniport import Control, NetworkConfig, SignalSet, closed_form_three_port, solve_response
from omniport.model import ConfigError, LinearPort, MechanicalMode
from omniport.response import (
    normalized_output_energy,
    output_amplitudes,
    symmetric_transmission,
    transmission_coefficient,
)

finite = dict(allow_nan=False, allow_infinity=False)
moduli = st.floats(0.0, 3.0, **finite)
angles = st.floats(-math.pi, math.pi, **finite)
xis = st.floats(-5.0, 5.0, **finite)


@st.composite
def networks(draw, n=None, lossy=True):
    n = draw(st.integers(2, 5)) if n is None else n
    ports = tuple(
        LinearPort(
            kappa_0=draw(st.floats(0.0, 0.5, **finite)) if lossy else 0.0,
            kappa_ex=draw(st.floats(0.2, 2.0, **finite)),
            G_mod=draw(moduli),
            G_phase=draw(angles),
        )
        for _ in range(n)
    )
    gamma = draw(st.floats(1e-4, 0.5, **finite))
    return NetworkConfig(MechanicalMode(100.0, gamma), ports)


@st.composite
def inputs_for(draw, n):
    amps = np.array([draw(st.floats(0.0, 2.0, **finite)) for _ in range(n)])
    phs = np.array([draw(angles) for _ in range(n)])
    return amps * np.exp(1j * phs)


def _vec(state):
    return np.concatenate([state.a_minus, [state.b_minus]])


def _rel(a, b):
    scale = max(np.max(np.abs(b)), 1e-300)
    return np.max(np.abs(a - b)) / scale


@settings(max_examples=200, deadline=None)
@given(data=st.data())
def test_closed_form_matches_elimination(data):
    net = data.draw(networks(n=3))
    inp = data.draw(inputs_for(3))
    xi = data.draw(xis)
    if not np.any(inp):
        return
    assert _rel(_vec(solve_response(net, inp, xi)), _vec(closed_form_three_port(net, inp, xi))) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(data=st.data())
def test_solution_satisfies_equations(data):
    net = data.draw(networks())
    inp = data.draw(inputs_for(net.n))
    state = solve_response(net, inp, data.draw(xis))
    assert state.residual(net, inp) <= 1e-13


@settings(max_examples=200, deadline=None)
@given(data=st.data())
def test_energy_balance_and_passivity(data):
    net = data.draw(networks())
    inp = data.draw(inputs_for(net.n))
    state = solve_response(net, inp, data.draw(xis))
    out = output_amplitudes(net, state, inp)
    p_in = np.sum(np.abs(inp) ** 2)
    loss = np.sum(net.kappa_0 * np.abs(state.a_minus) ** 2) + net.mech.gamma_m * abs(state.b_minus) ** 2
    assert abs(p_in - np.sum(np.abs(out) ** 2) - loss) <= 1e-10 * max(p_in, 1e-300)
    assert np.sum(np.abs(out) ** 2) <= p_in * (1 + 1e-12)


@settings(max_examples=100, deadline=None)
@given(data=st.data())
def test_global_phase_gauge(data):
    # rotating every input by a common phase rotates every amplitude by it
    net = data.draw(networks())
    inp = data.draw(inputs_for(net.n))
    xi, phase = data.draw(xis), data.draw(angles)
    base = _vec(solve_response(net, inp, xi))
    turned = _vec(solve_response(net, inp * np.exp(1j * phase), xi))
    assert _rel(turned, base * np.exp(1j * phase)) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(data=st.data())
def test_common_coupling_phase_drops_out_of_transmission(data):
    net = data.draw(networks())
    shift = data.draw(angles)
    xi = data.draw(xis)
    turned = NetworkConfig(
        net.mech,
        tuple(LinearPort(p.kappa_0, p.kappa_ex, p.G_mod, p.G_phase + shift) for p in net.ports),
    )
    for s, d in ((0, 1), (1, 0)):
        t0 = transmission_coefficient(net, s, d, xi)
        t1 = transmission_coefficient(turned, s, d, xi)
        assert abs(t0 - t1) <= 1e-12 * max(abs(t0), 1e-12)


@settings(max_examples=100, deadline=None)
@given(data=st.data())
def test_real_couplings_are_reciprocal(data):
    net = data.draw(networks())
    real = NetworkConfig(
        net.mech,
        tuple(LinearPort(p.kappa_0, p.kappa_ex, p.G_mod, 0.0) for p in net.ports),
    )
    xi = data.draw(xis)
    t12 = transmission_coefficient(real, 0, 1, xi)
    t21 = transmission_coefficient(real, 1, 0, xi)
    assert abs(abs(t12) ** 2 - abs(t21) ** 2) <= 1e-12 * max(abs(t12) ** 2, 1e-300)


@settings(max_examples=100, deadline=None)
@given(G=moduli, Gc=moduli, theta=angles, eta=st.floats(0, 10, **finite), phi=angles, xi=xis)
def test_symmetric_closed_form_matches_solver(G, Gc, theta, eta, phi, xi):
    net = NetworkConfig.symmetric([G, G, Gc], [0.0, theta, 0.0])
    ctl = Control(2, eta, phi)
    t12, t21 = symmetric_transmission(G, Gc, theta, eta, phi, xi, 1e-3)
    assert abs(transmission_coefficient(net, 0, 1, xi, ctl) - t12) <= 1e-12 * max(1.0, abs(t12))
    assert abs(transmission_coefficient(net, 1, 0, xi, ctl) - t21) <= 1e-12 * max(1.0, abs(t21))


def test_blockade_backward_is_exactly_zero():
    net = NetworkConfig.symmetric([1, 1, 1], [0, math.pi, 0])
    ctl = Control(2, 1.0, 0.0)
    for xi in np.linspace(-5, 5, 41):
        assert transmission_coefficient(net, 1, 0, xi, ctl) == 0


def test_uncoupled_cavities_reflect_with_their_own_loss():
    net = NetworkConfig.linearized([0, 0], kappa=2.0, kappa_0=0.5)
    inp = np.array([1.0, 0.5j])
    state = solve_response(net, inp, 0.0)
    assert state.b_minus == 0
    out = output_amplitudes(net, state, inp)
    # over-coupled reflection (kappa_ex - kappa_0)/kappa at resonance
    np.testing.assert_allclose(out, 0.5 * inp, atol=1e-15)


def test_normalized_energy_undriven_is_nan():
    net = NetworkConfig.symmetric([1, 1], [0, 0])
    sig = SignalSet.single(2, 0)
    s = normalized_output_energy(net, solve_response(net, sig, 0.0), sig)
    assert np.isnan(s[1]) and s[0] >= 0


def test_closed_form_rejects_other_sizes():
    with pytest.raises(ConfigError):
        closed_form_three_port(NetworkConfig.symmetric([1, 1], [0, 0]), [1, 0], 0.0)


def test_transmission_argument_checks():
    net = NetworkConfig.symmetric([1, 1, 1], [0, 0, 0])
    with pytest.raises(ConfigError):
        transmission_coefficient(net, 0, 0, 0.0)
    with pytest.raises(ConfigError):
        transmission_coefficient(net, 0, 1, 0.0, Control(1))


def test_physical_config_refused():
    from omniport.model import PhysicalPort

    net = NetworkConfig(MechanicalMode(10, 0.1), (PhysicalPort(0, 1, 0.1),) * 2, "physical")
    with pytest.raises(ConfigError):
        solve_response(net, [1, 0], 0.0)
