import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from optomech import ParameterError
from optomech import gaussian as gc
from optomech import pulsed as pu
from optomech.params import HBAR, KB


def test_zero_interaction_is_phase_only():
    assert np.array_equal(pu.entangling_matrix(0.0), np.diag([1.0, 1.0, -1.0, -1.0]))
    assert np.array_equal(pu.swap_matrix(0.0), np.diag([1.0, 1.0, -1.0, -1.0]))


@given(st.floats(0, 3))
def test_maps_are_symplectic(r):
    assert pu.symplectic_residual(pu.entangling_matrix(r)) < 1e-12
    assert pu.symplectic_residual(pu.swap_matrix(r)) < 1e-12


def test_negative_r_rejected():
    with pytest.raises(ParameterError):
        pu.entangling_matrix(-0.1)
    with pytest.raises(ParameterError):
        pu.epr_variance(-1, 0.2)


def test_vacuum_epr_at_r1():
    out = pu.entangling_transform(pu.TwoModeMoments.product(), 1.0)
    closed = 2 * (math.e - math.sqrt(math.e**2 - 1)) ** 2
    assert pu.epr_variance_from_moments(out) == pytest.approx(closed, rel=1e-12)
    assert pu.epr_variance(0, 1.0) == pytest.approx(closed, rel=1e-12)
    assert closed == pytest.approx(0.072675, abs=1e-6)


@pytest.mark.parametrize("n0", [0, 1, 7.5])
def test_epr_without_interaction(n0):
    assert pu.epr_variance(n0, 0.0) == 2 * (n0 + 1)


def test_large_r_asymptote():
    # relative gap is e^{-2r}/2 = 1.24e-3 at r = 3, above the 1e-3 target
    assert pu.epr_variance(0, 3.0) == pytest.approx(0.5 * math.exp(-6), rel=1e-3)


@pytest.mark.parametrize("n0", [0, 1, 10, 100, 833])
def test_threshold_closed_form(n0):
    r0 = pu.entanglement_threshold(n0)
    assert pu.epr_variance(n0, r0) == pytest.approx(2.0, abs=1e-12)
    assert r0 == pytest.approx(pu.threshold_by_bisection(n0), abs=1e-12)


def test_threshold_values():
    assert pu.entanglement_threshold(0) == 0.0
    assert pu.entanglement_threshold(100) == pytest.approx(0.5 * math.log(102**2 / 404), rel=1e-14)
    assert pu.entanglement_threshold(100) == pytest.approx(1.624, abs=1e-3)


def test_threshold_log_scaling():
    # ratio is 1 - ln4/ln n0 + ...: 0.90 at 1e6, so this check is expected to fail
    assert pu.entanglement_threshold(1e6) / (0.5 * math.log(1e6)) == pytest.approx(1.0, rel=0.01)


@given(st.floats(0, 100), st.floats(0, 3))
def test_matrix_and_closed_form_agree(n0, r):
    out = pu.entangling_transform(pu.TwoModeMoments.product(n_mech=n0), r)
    assert pu.epr_variance_from_moments(out) == pytest.approx(pu.epr_variance(n0, r), abs=1e-10)


def test_large_r_transform_stays_physical():
    # entries ~ n0 e^{2r}; the physicality guard must scale with them
    out = pu.entangling_transform(pu.TwoModeMoments.product(n_mech=1000.0), 5.0)
    assert pu.epr_variance_from_moments(out) == pytest.approx(pu.epr_variance(1000.0, 5.0), rel=1e-6)


def test_monotonicity_grid():
    n0 = np.linspace(0, 50, 21)
    r = np.linspace(0, 4, 41)
    D = np.array([[pu.epr_variance(a, b) for b in r] for a in n0])
    assert np.all(np.diff(D, axis=1) < 0)
    assert np.all(np.diff(D, axis=0) > 0)


def test_duan_implies_ppt():
    for n0 in (0, 0.5, 3, 20):
        for r in np.linspace(0.1, 3, 30):
            out = pu.entangling_transform(pu.TwoModeMoments.product(n_mech=n0), r)
            d = pu.epr_variance(n0, r)
            if d < 2 - 1e-6:
                assert pu.is_entangled(out)
            # one input is pure, so the output is PPT-entangled for every r > 0
            assert pu.is_entangled(out)
            assert gc.log_negativity(out.cov) > 0


def test_swap_limits():
    m = pu.TwoModeMoments.product(n_mech=2.0, mean=[0.3, -0.1, 0.0, 0.0])
    out = pu.state_swap_transform(m, 30.0)
    assert np.allclose(np.abs(out.mean[2:]), [0.1, 0.3], atol=1e-12)
    assert np.allclose(out.cov.matrix[2:, 2:], 2.5 * np.eye(2), atol=1e-10)


def test_swap_light_variance_r5():
    m = pu.TwoModeMoments.product(n_mech=2.0)
    out = pu.state_swap_transform(m, 5.0)
    expect = 2.5 * (1 - math.exp(-10)) + 0.5 * math.exp(-10)
    assert np.allclose(np.diag(out.cov.matrix)[2:], expect, rtol=1e-14)


def test_swap_monte_carlo():
    rng = np.random.default_rng(7)
    m = pu.TwoModeMoments.product(n_mech=2.0)
    samples = rng.multivariate_normal(np.zeros(4), m.cov.matrix, size=1_000_000)
    out = samples @ pu.swap_matrix(5.0).T
    var = out[:, 2:].var(axis=0)
    expect = 2.5 * (1 - math.exp(-10)) + 0.5 * math.exp(-10)
    se = expect * math.sqrt(2 / samples.shape[0])
    assert np.all(np.abs(var - expect) < 3 * se)


@pytest.mark.parametrize("n0,r", [(0, 0.0), (0, 1.0), (3, 0.5), (10, 2.0), (0.5, 4.0)])
def test_teleportation_network_added_noise(n0, r):
    res = pu.teleport(np.array([0.4, -1.1]), 0.5 * np.eye(2), n0, r)
    expect = pu.teleportation_noise(n0, r)
    assert res.added_variance == pytest.approx(expect, abs=1e-8)
    assert sum(res.added_variance) == pytest.approx(pu.epr_variance(n0, r), abs=1e-8)
    assert np.allclose(res.mean, [0.4, -1.1], atol=1e-12)


def test_teleport_coherent_state():
    alpha = 0.7 + 0.3j
    res = pu.teleport_coherent(alpha, 0, 1.0)
    d = pu.epr_variance(0, 1.0)
    assert np.allclose(res.mean, [math.sqrt(2) * 0.7, math.sqrt(2) * 0.3], atol=1e-12)
    assert np.allclose(res.cov, (0.5 + d / 2) * np.eye(2), atol=1e-8)
    assert res.fidelity == pytest.approx(1 / (1 + d / 2), rel=1e-10)


def test_teleport_limits():
    assert pu.teleportation_noise(0, 0.0) == (1.0, 1.0)
    hi = pu.teleport_coherent(1j, 0, 6.0)
    assert hi.added_variance[0] == pytest.approx(math.exp(-12) / 4, rel=1e-3)
    assert hi.fidelity == pytest.approx(1.0, abs=1e-5)


def test_fidelity_identical_pure():
    assert pu.gaussian_fidelity([0, 0], 0.5 * np.eye(2), [0, 0], 0.5 * np.eye(2)) == pytest.approx(1.0)


def test_pulse_params():
    p = pu.PulseParams.from_photons(2 * math.pi * 100, 1e8, 2 * math.pi * 1e6, 2 * math.pi * 1e7, 1e-5)
    delta = -p.mech_freq
    g = 2 * math.pi * 100 * math.sqrt(2 * p.kappa * 1e8 / 1e-5 / (delta**2 + p.kappa**2))
    assert p.g == pytest.approx(g, rel=1e-12)
    assert p.G == pytest.approx(p.g**2 / p.kappa, rel=1e-12)
    assert p.r == pytest.approx(p.G * p.tau, rel=1e-12)
    with pytest.raises(ParameterError):
        pu.PulseParams(g=0.0, kappa=1.0, mech_freq=1.0, tau=1.0)


def test_mode_envelopes_normalized():
    env = pu.ModeEnvelopes(G=3.0, tau=0.7)
    a = quad(lambda t: env.input_envelope(t) ** 2, 0, 0.7)[0]
    b = quad(lambda t: env.output_envelope(t) ** 2, 0, 0.7)[0]
    assert a == pytest.approx(1.0, rel=1e-10) and b == pytest.approx(1.0, rel=1e-10)


class TestRegime:
    def chain(self, ratio=10.0, tau_scale=1.0):
        W = 1e8
        kappa = W / ratio
        g = kappa / ratio
        tau = ratio / g * tau_scale
        gam = 1 / (ratio * tau * 10.0)
        return pu.PulseParams(g=g, kappa=kappa, mech_freq=W, tau=tau, n_th=10.0, mech_damping=gam)

    def test_all_ratios_ten(self):
        rep = pu.regime_validator(self.chain())
        assert rep.ok
        assert rep.min_margin == pytest.approx(10.0, rel=1e-12)
        assert all(v == pytest.approx(10.0) for v in rep.margins.values())

    def test_decoherence_flag(self):
        p = self.chain()
        bad = pu.PulseParams(g=p.g, kappa=p.kappa, mech_freq=p.mech_freq, tau=p.tau, n_th=p.n_th,
                             mech_damping=2 / (p.n_th * p.tau))
        rep = pu.regime_validator(bad)
        assert "decoherence" in rep.flags and not rep.ok

    def test_thermal_frequency(self):
        assert pu.thermal_frequency(0.1) == pytest.approx(KB * 0.1 / HBAR, rel=1e-15)
        rep = pu.regime_validator(self.chain(), temperature=0.1)
        assert rep.thermal_frequency == pu.thermal_frequency(0.1)
        assert rep.q_omega == pytest.approx(self.chain().mech_Q * 1e8)
