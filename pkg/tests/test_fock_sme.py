import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from optomech import CutoffOverflow, ParameterError
from optomech import fock_sme as fs
from conftest import make_system


def random_state(d, rng):
    A = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = A @ A.conj().T
    return fs.TruncatedState(rho / np.trace(rho).real)


@pytest.mark.parametrize("scheme", fs.SCHEMES)
def test_identity_without_coupling(scheme, rng):
    p = fs.SMEParams(chi=0.0, kappa=10.0, gamma=0.0, n_th=0.3, dim=5, scheme=scheme, overflow_threshold=1.0)
    s = random_state(5, rng)
    for dW in (0.0, 0.3, -1.2):
        assert np.allclose(fs.sme_step(s, p, dW).rho, s.rho, atol=1e-14)


@pytest.mark.parametrize("scheme", fs.SCHEMES)
def test_fock_state_is_fixed_point(scheme, rng):
    p = fs.SMEParams.from_rates(50.0, 5e3, 0.0, 0.5, dim=6, scheme=scheme)
    s = fs.TruncatedState.fock(2, 6)
    for dW in rng.standard_normal(300) * math.sqrt(p.time_step):
        s = fs.sme_step(s, p, dW)
    assert np.allclose(s.rho, fs.TruncatedState.fock(2, 6).rho, atol=1e-12)


def test_qnd_record_stays_at_one():
    p = fs.SMEParams.from_rates(50.0, 5e3, 0.0, 0.5, dim=6, seed=3)
    rec = fs.run_trajectory(p, 0.5, fs.TruncatedState.fock(1, 6), record_every=100)
    assert np.allclose(rec.n_cond, 1.0, atol=1e-12)
    assert np.all(rec.level == 1)
    assert rec.jumps() == []


@pytest.mark.parametrize("n_th", [0.0, 0.5])
def test_unconditional_matches_lindblad(n_th):
    p = fs.SMEParams.from_rates(5.0, 5e3, 1.0, n_th, dim=6, scheme="euler", overflow_threshold=1.0)
    rho0 = fs.TruncatedState.fock(0, 6)
    every = int(round(0.1 / p.time_step))
    rec = fs.run_ensemble(p, 1.0, rho0, 1, record_every=every, measure=False, keep_populations=True)[0]
    exact = np.array([np.diag(r).real for r in fs.lindblad_propagate(p, rho0.rho, rec.t)])
    assert np.max(np.abs(rec.populations - exact)) < 1e-6


def test_lindbladian_matches_rhs(rng):
    p = fs.SMEParams.from_rates(3.0, 100.0, 1.0, 0.7, dim=5)
    rho = random_state(5, rng).rho
    lhs = (fs.lindbladian(p) @ rho.reshape(-1)).reshape(5, 5)
    assert np.allclose(lhs, fs.lindblad_rhs(p, rho), atol=1e-12)


def test_euler_trace_drift(rng):
    p = fs.SMEParams.from_rates(50.0, 5e3, 1.0, 0.5, dim=6, scheme="euler")
    c = math.sqrt(p.measurement_rate) * fs.number(6)
    rho = random_state(6, rng).rho
    for dW in rng.standard_normal(50) * math.sqrt(p.time_step):
        raw = rho + fs.lindblad_rhs(p, rho) * p.time_step + fs._measurement_super(c, rho) * dW
        assert abs(np.trace(raw).real - 1) < 1e-8
        rho = raw / np.trace(raw).real


def test_positivity_along_trajectory(rng):
    # default (Kraus-form) scheme; plain Euler-Maruyama does not keep rho positive here
    p = fs.SMEParams.from_rates(50.0, 5e3, 1.0, 0.5, dim=8, overflow_threshold=1.0)
    psi = np.zeros(8, complex)
    psi[:3] = [0.6, 0.64, 0.48]
    s = fs.TruncatedState(np.outer(psi, psi.conj()))
    worst = 0.0
    for dW in rng.standard_normal(3000) * math.sqrt(p.time_step):
        s = fs.sme_step(s, p, dW)
        worst = min(worst, np.linalg.eigvalsh(s.rho)[0])
    assert worst > -1e-8


def test_population_and_full_steppers_agree():
    p = fs.SMEParams.from_rates(5.0, 500.0, 1.0, 0.5, dim=10, seed=11)
    rec = fs.run_ensemble(p, 0.3, fs.TruncatedState.fock(0, 10), 1)[0]
    rng = fs.trajectory_seeds(p.seed, 1)[0]
    s = fs.TruncatedState.fock(0, 10)
    ns = [0.0]
    for dW in rng.standard_normal(len(rec.t) - 1) * math.sqrt(p.time_step):
        s = fs.sme_step(s, p, dW)
        ns.append(s.mean_phonon)
    assert np.allclose(rec.n_cond, ns, atol=1e-10)


def test_qnd_martingale():
    p = fs.SMEParams.from_rates(50.0, 5e3, 0.0, 0.5, dim=6, seed=5)
    init = fs.TruncatedState.from_populations([0.4, 0.3, 0.2, 0.1, 0, 0])
    recs = fs.run_ensemble(p, 0.2, init, 2000, record_every=2000, keep_populations=True)
    P = np.array([r.populations for r in recs])  # traj, time, level
    mean = P.mean(axis=0)
    se = P.std(axis=0, ddof=1) / math.sqrt(P.shape[0])
    dev = np.abs(mean - init.populations)
    assert np.all(dev[1:] <= 3 * se[1:] + 1e-12)
    # localization actually happened
    assert np.mean(np.max(P[:, -1], axis=1) > 0.9) > 0.5


def test_ensemble_mean_matches_lindblad():
    p = fs.SMEParams.from_rates(5.0, 500.0, 1.0, 0.5, dim=14, seed=2)
    recs = fs.run_ensemble(p, 1.0, fs.TruncatedState.fock(0, 14), 400, record_every=1000)
    t, mean, se = fs.ensemble_statistics(recs)
    exact = 0.5 * (1 - np.exp(-t))
    assert np.all(np.abs(mean - exact)[1:] <= 3 * se[1:])


def test_dt_halving():
    base = fs.SMEParams.from_rates(5.0, 500.0, 1.0, 0.5, dim=14, seed=4)
    dt = base.time_step
    coarse = fs.run_ensemble(base.replace(dt=dt), 1.0, fs.TruncatedState.fock(0, 14), 200,
                             record_every=1000, noise_substeps=2)
    fine = fs.run_ensemble(base.replace(dt=dt / 2), 1.0, fs.TruncatedState.fock(0, 14), 200,
                           record_every=2000)
    t1, m1, se1 = fs.ensemble_statistics(coarse)
    t2, m2, se2 = fs.ensemble_statistics(fine)
    assert np.allclose(t1, t2)
    assert np.all(np.abs(m1 - m2)[1:] < se1[1:])


def test_null_run_noise_calibration():
    p = fs.SMEParams.from_rates(5.0, 500.0, 0.0, 0.0, dim=4, seed=9)
    rec = fs.run_ensemble(p, 2.0, fs.TruncatedState.fock(0, 4), 1)[0]
    dW = rec.dW[1:]
    assert abs(dW.mean()) < 4 * math.sqrt(p.time_step / dW.size)
    assert dW.var() == pytest.approx(p.time_step, rel=0.05)
    # ground state: current is pure noise
    assert abs(rec.current[1:].mean()) < 4 / math.sqrt(p.time_step * dW.size)


def test_determinism_and_batching():
    p = fs.SMEParams.from_rates(5.0, 500.0, 1.0, 0.5, dim=14, seed=21)
    a = fs.run_ensemble(p, 0.2, fs.TruncatedState.fock(0, 14), 3)
    b = fs.run_ensemble(p, 0.2, fs.TruncatedState.fock(0, 14), 3)
    c = fs.run_ensemble(p, 0.2, fs.TruncatedState.fock(0, 14), 5)
    for x, y, z in zip(a, b, c):
        assert np.array_equal(x.n_cond, y.n_cond)
        # same noise; batch width only changes float summation order
        assert np.allclose(x.n_cond, z.n_cond, rtol=0, atol=1e-12)
    assert not np.array_equal(a[0].n_cond, a[1].n_cond)


def test_cutoff_overflow():
    p = fs.SMEParams.from_rates(1.0, 100.0, 5.0, 3.0, dim=3, seed=1)
    with pytest.raises(CutoffOverflow) as info:
        fs.run_ensemble(p, 2.0, fs.TruncatedState.fock(0, 3), 2)
    assert info.value.population > 1e-4


def test_non_diagonal_ensemble_rejected():
    p = fs.SMEParams.from_rates(1.0, 100.0, 1.0, 0.0, dim=3)
    psi = np.array([1, 1, 0]) / math.sqrt(2)
    with pytest.raises(ParameterError):
        fs.run_ensemble(p, 0.1, fs.TruncatedState(np.outer(psi, psi)), 2)


def test_params_validation_and_dt():
    with pytest.raises(ParameterError):
        fs.SMEParams(chi=1.0, kappa=0.0, gamma=1.0, n_th=0.0)
    with pytest.raises(ParameterError):
        fs.SMEParams(chi=1.0, kappa=1.0, gamma=1.0, n_th=0.0, efficiency=0.0)
    with pytest.raises(ParameterError):
        fs.SMEParams(chi=1.0, kappa=1.0, gamma=1.0, n_th=0.0, scheme="milstein")
    p = fs.SMEParams.from_rates(50.0, 5e3, 1.0, 0.5, dim=8)
    assert p.measurement_rate == pytest.approx(50.0)
    assert p.adiabatic_ratio == pytest.approx(0.1)
    assert p.time_step * p.stiffness < 0.1


def test_state_validation():
    with pytest.raises(ParameterError):
        fs.TruncatedState(np.diag([0.5, 0.6]))
    with pytest.raises(ParameterError):
        fs.TruncatedState(np.array([[0.5, 1.0], [0.0, 0.5]]))
    with pytest.raises(ParameterError):
        fs.TruncatedState(np.diag([1.2, -0.2]))


def test_fast_measurement_ratio():
    p = fs.SMEParams.from_rates(50.0, 5e3, 1.0, 0.5)
    assert fs.fast_measurement_ratio(p, 0) == pytest.approx(100.0)
    assert fs.fast_measurement_ratio(p.replace(gamma=0.0), 3) == math.inf


def test_measurement_rate_against_two_mode_model():
    chi, kappa, t = 1.0, 40.0, 2.0
    full = fs.mechanical_coherence_decay(chi, kappa, t)
    assert full == pytest.approx(math.exp(-0.5 * chi**2 / kappa * t), rel=2e-3)
    assert abs(full - math.exp(-chi**2 / kappa * t)) > 10 * abs(full - math.exp(-0.5 * chi**2 / kappa * t))


class TestJumpAnalysis:
    def test_plateau_fraction_integers(self):
        assert fs.plateau_fraction(np.repeat([0.0, 1.0, 2.0], 10)) == 1.0

    def test_plateau_fraction_unstructured(self, rng):
        assert fs.plateau_fraction(rng.uniform(0, 5, 100000)) == pytest.approx(0.5, abs=0.01)

    def test_detect_jumps(self):
        t = np.arange(6.0)
        assert fs.detect_jumps([0, 0, 1, 1, 0, 0], t) == [(2.0, 0, 1), (4.0, 1, 0)]

    @given(st.integers(1, 50), st.floats(0.01, 1.0))
    def test_median_window(self, k, dt):
        t = np.arange(200) * dt
        x = np.zeros(200)
        x[100] = 5.0
        y = fs.median_smooth(x, t, k * dt)
        if k >= 3:
            assert np.all(y == 0)


class TestReadoutGain:
    def test_resonant(self):
        p = make_system(detuning=0.0, coupling=0.2, cavity_decay=50.0)
        r = fs.displacement_readout_gain(p)
        k = 2 * p.cavity_decay
        assert r.gain == pytest.approx(2j * 0.2 / math.sqrt(k), abs=1e-15)
        assert r.noise_factor == pytest.approx(1.0)
        assert r.adiabatic

    def test_no_coupling(self):
        r = fs.displacement_readout_gain(make_system(coupling=0.0, detuning=0.4))
        assert r.gain == 0
        assert abs(r.noise_factor) == pytest.approx(1.0)

    @given(st.floats(-100, 100))
    def test_noise_is_phase(self, delta):
        r = fs.displacement_readout_gain(make_system(detuning=delta, cavity_decay=5.0))
        assert r.noise_factor == pytest.approx(np.exp(-2j * r.phase), abs=1e-12)

    def test_resonance_is_optimal(self):
        deltas = np.linspace(-5, 5, 201)
        g = [abs(fs.displacement_readout_gain(make_system(detuning=d, cavity_decay=1.0)).gain) for d in deltas]
        assert deltas[int(np.argmax(g))] == 0.0
