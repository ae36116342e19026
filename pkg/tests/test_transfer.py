import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import minimize_scalar

from optomech import InvalidSqueezing, ParameterError
from optomech import transfer as tr
from conftest import make_system


def valid_input():
    return st.tuples(st.floats(0, 50), st.floats(0, 1), st.floats(-math.pi, math.pi)).map(
        lambda a: tr.SqueezedInputParams(a[0], a[1] * math.sqrt(a[0] * (a[0] + 1)) * complex(math.cos(a[2]), math.sin(a[2])))
    )


def test_ground_state():
    sq = tr.SqueezedInputParams(0.0, 0.0)
    assert tr.transferred_variance(sq, 0.3, 0.0, 1.0, 5.0) == 0.5


def test_pure_squeezing_example():
    sq = tr.SqueezedInputParams(1.0, math.sqrt(2))
    v = tr.transferred_variance(sq, 0.0, 0.0, 1.0, 0.0)
    assert v == pytest.approx(1.5 - math.sqrt(2), abs=1e-15)
    res = minimize_scalar(lambda f: tr.transferred_variance(sq, f, 0.0, 1.0, 0.0),
                          bounds=(-1, 1), method="bounded", options={"xatol": 1e-10})
    assert abs(res.x) < 1e-6


def test_antisqueezed():
    sq = tr.SqueezedInputParams(1.0, math.sqrt(2))
    assert tr.transferred_variance(sq, math.pi / 2, 0.0, 1.0, 0.0) == pytest.approx(1.5 + math.sqrt(2))


def test_invalid_correlation():
    with pytest.raises(InvalidSqueezing):
        tr.SqueezedInputParams(1.0, 1.5)
    with pytest.raises(ParameterError):
        tr.transferred_variance(tr.SqueezedInputParams(0, 0), 0, 1.0, 0.0, 0.0)


def test_pure_bandwidth_relation():
    sq = tr.SqueezedInputParams.pure(2.0, b_x=3.0)
    assert sq.is_pure
    assert sq.b_y == pytest.approx(3.0 * math.sqrt(2 * (2 + math.sqrt(6)) + 1))


@given(valid_input(), st.floats(-4, 4), st.floats(0, 1), st.floats(0.01, 10), st.floats(0, 100))
def test_quadrature_sum_rule(sq, phi, gm, ge, n):
    a = tr.transferred_variance(sq, phi, gm, ge, n)
    b = tr.transferred_variance(sq, phi + math.pi / 2, gm, ge, n)
    assert a + b == pytest.approx(2 * (sq.N + 0.5) + 2 * gm / ge * (n + 0.5), rel=1e-12, abs=1e-12)


@given(valid_input(), st.floats(-4, 4), st.floats(0, 1), st.floats(0.01, 10), st.floats(0, 100))
def test_variance_bounds(sq, phi, gm, ge, n):
    v = tr.transferred_variance(sq, phi, gm, ge, n)
    assert v > 0
    thermal = gm / ge * (n + 0.5)
    assert v - thermal >= sq.N + 0.5 - math.sqrt(sq.N * (sq.N + 1)) - 1e-9
    assert v >= 0.5 * gm / ge * (2 * n + 1) - 1e-12


@given(valid_input())
def test_minimum_at_half_phase(sq):
    phi = tr.optimal_quadrature_phase(sq)
    grid = np.linspace(-math.pi / 2, math.pi / 2, 721)
    vals = [tr.transferred_variance(sq, f, 0.0, 1.0, 0.0) for f in grid]
    assert tr.transferred_variance(sq, phi, 0.0, 1.0, 0.0) <= min(vals) + 1e-12


def resolved(**kw):
    return make_system(coupling=0.05, detuning=1.0, cavity_decay=0.1, mech_Q=1e5, **kw)


def test_report_all_ok():
    p = resolved()
    rep = tr.squeezing_condition_report(p, tr.SqueezedInputParams.pure(1.0, center_detuning=-1.0))
    assert rep.all_ok and rep.resonance_ok and rep.resolved_sideband
    assert rep.bandwidth_regime == "white"


def test_report_center_mismatch():
    p = resolved()
    rep = tr.squeezing_condition_report(p, tr.SqueezedInputParams.pure(1.0, center_detuning=0.0))
    assert "squeezing_center_mismatch" in rep.flags
    assert rep.squeezing_center_mismatch == pytest.approx(1.0)


def test_report_bad_cavity():
    p = make_system(coupling=0.5, detuning=1.0, cavity_decay=10.0, mech_Q=1e5)
    rep = tr.squeezing_condition_report(p, tr.SqueezedInputParams.pure(1.0, b_x=0.5, center_detuning=-1.0))
    assert rep.bad_cavity and "bad_cavity" in rep.flags
    assert "finite" in rep.recommendation


def test_effective_damping_sideband_cooling():
    # weak resolved-sideband cooling: the beam-splitter rate is g/2, the cavity
    # energy linewidth 2 kappa, so Gamma_eff -> Gamma_M + g^2 / (2 kappa)
    p = make_system(coupling=0.005, detuning=1.0, cavity_decay=0.1, mech_Q=1e5)
    ge = tr.effective_damping(p)
    assert ge == pytest.approx(p.mech_damping + 0.005**2 / 0.2, rel=0.01)
    assert tr.effective_damping(resolved()) > 100 * resolved().mech_damping


def test_colored_transfer_approaches_white():
    p = resolved()
    ge = tr.effective_damping(p)
    sq = tr.SqueezedInputParams.pure(0.5, center_detuning=-1.0)
    white = tr.transferred_variance(sq, 0.0, p.mech_damping, ge, p.n_th)
    wide = tr.SqueezedInputParams.pure(0.5, b_x=200.0, center_detuning=-1.0)
    col = tr.colored_transferred_variance(p, wide, 0.0)
    assert col.variance == pytest.approx(white, rel=0.05)
    assert col.variance < 0.5
