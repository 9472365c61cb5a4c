import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from intraqkd.infotheory import (
    RateInputs,
    Scenario,
    i_ab,
    i_ae,
    i_ae_conventional,
    i_ae_from_bell,
    i_ae_side,
    key_rate,
    rate_report,
    shannon_entropy,
    solve_threshold,
)

# bisection oracles computed once with mpmath.findroot at 30 digits
E2 = 0.271865
E_HALF = 0.146071
E_06 = 0.171494


def test_entropy_basics():
    assert shannon_entropy([0.25] * 4) == pytest.approx(2)
    assert shannon_entropy([1, 0, 0, 0]) == 0
    with pytest.raises(ValueError):
        shannon_entropy([0.5, 0.6])
    with pytest.raises(ValueError):
        shannon_entropy([1.5, -0.5])


def test_i_ab_endpoints():
    assert i_ab(0) == pytest.approx(2)
    assert i_ab(0.75) == pytest.approx(0, abs=1e-12)
    with pytest.raises(ValueError):
        i_ab(0.8)


def test_conventional_range():
    assert i_ae_conventional(3 / 8) == pytest.approx(1)
    with pytest.raises(ValueError):
        i_ae_conventional(0.4)


@given(st.floats(0, 0.375), st.floats(0.5, 1))
def test_side_channel_at_half_p1(e, F):
    assert i_ae_side(e, F, 0.5) == pytest.approx((8 * e / 3) * (2 - F) / F, abs=1e-12)


@given(st.floats(0, 0.375), st.floats(0.5, 1))
def test_bell_bridge_identity(e, F):
    assert i_ae_from_bell(e, 2 * np.sqrt(2) * F) == pytest.approx(i_ae_side(e, F, 0.5), abs=1e-12)


@given(st.floats(0, 0.375), st.floats(0, 1))
def test_side_channel_reduces_to_conventional_at_F1(e, p1):
    assert i_ae_side(e, 1.0, p1) == pytest.approx(i_ae_conventional(e), abs=1e-12)


@given(st.floats(0.5, 1), st.floats(0, 0.37), st.floats(1e-4, 0.005))
def test_key_rate_decreasing_in_e(F, e, de):
    sc = Scenario.SIDE_CHANNEL
    assert key_rate(RateInputs(e + de, F, 0.5, sc)) < key_rate(RateInputs(e, F, 0.5, sc))


def test_thresholds():
    assert solve_threshold("conventional") == pytest.approx(E2, abs=1e-5)
    assert solve_threshold("side_channel", 0.5, 0.5) == pytest.approx(E_HALF, abs=1e-5)
    assert solve_threshold("side_channel", 0.6, 0.5) == pytest.approx(E_06, abs=1e-5)


def test_threshold_zero_of_rate():
    e = solve_threshold("side_channel", 0.7, 0.3, xtol=1e-12)
    assert abs(key_rate(RateInputs(e, 0.7, 0.3, "side_channel"))) < 1e-9


def test_rate_inputs_validation():
    for bad in ({"e": -0.1}, {"e": 0.1, "F": 0.4}, {"e": 0.1, "p1": 2}):
        with pytest.raises(ValueError):
            RateInputs(**bad)


def test_rate_report_consistent():
    r = rate_report(RateInputs(0.1, 0.6, 0.5, "side_channel"))
    assert r.key_rate == pytest.approx(r.i_ab - r.i_ae)
    assert r.i_ae == i_ae(RateInputs(0.1, 0.6, 0.5, "side_channel"))


def test_from_bell_rejects_nonpositive():
    with pytest.raises(ValueError):
        i_ae_from_bell(0.1, 0)
