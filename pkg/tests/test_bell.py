import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import states
from intraqkd.attacks import SideChannelConfig, particle_of, qwp_attack_prepare
from intraqkd.bell import (
    CORRECTED_SETTINGS,
    PRINTED_SETTINGS,
    SEPARABLE_BOUND,
    TSIRELSON_BOUND,
    MeasurementSettings,
    bell_b_fidelity,
    bell_b_printed,
    chsh,
    chsh_optimal,
    chsh_search,
    correlation_matrix,
    product_state,
    separable_bound_search,
    singlet,
    threshold_e_ent,
    threshold_e_LR,
    werner_s,
    werner_s_closed_form,
)
from intraqkd.optics import prepare_basis
from intraqkd.qstate import is_entangled_ppt, to_density, werner

PHI_PLUS = prepare_basis("G2")[0]
SQ2 = np.sqrt(2)


def test_singlet_at_corrected_and_printed_settings():
    assert chsh(to_density(singlet()), CORRECTED_SETTINGS) == pytest.approx(-2 * SQ2, abs=1e-12)
    assert chsh(to_density(singlet()), PRINTED_SETTINGS) == pytest.approx(0, abs=1e-12)


def test_phi_plus_correlation_matrix_frozen():
    t = correlation_matrix(PHI_PLUS)
    expected = np.zeros((3, 3))
    expected[0, 2], expected[1, 0], expected[2, 1] = -1, 1, 1
    assert np.allclose(t, expected, atol=1e-12)


def test_phi_plus_optimal_and_printed():
    assert chsh_optimal(PHI_PLUS)[0] == pytest.approx(TSIRELSON_BOUND, abs=1e-12)
    # at the printed settings the intra-particle state only reaches sqrt2
    assert abs(chsh(to_density(PHI_PLUS), PRINTED_SETTINGS)) == pytest.approx(SQ2, abs=1e-12)


@given(states())
@settings(max_examples=25, deadline=None)
def test_optimal_settings_achieve_optimal_value(v):
    value, s = chsh_optimal(to_density(v))
    assert chsh(to_density(v), s) == pytest.approx(value, abs=1e-9)
    assert value <= TSIRELSON_BOUND + 1e-12


@pytest.mark.parametrize("seed", range(4))
def test_optimal_agrees_with_search(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = a @ a.conj().T
    from intraqkd.qstate import DensityOperator

    rho = DensityOperator(rho / np.trace(rho))
    assert chsh_search(rho, restarts=20, seed=seed) == pytest.approx(chsh_optimal(rho)[0], abs=1e-6)


@pytest.mark.parametrize("e", np.arange(0, 0.7001, 0.05))
def test_werner_linearity(e):
    assert werner_s(e) == pytest.approx(werner_s_closed_form(e), abs=1e-6)


def test_werner_thresholds():
    assert threshold_e_LR() == pytest.approx(0.75 * (1 - 1 / SQ2), abs=1e-15)
    assert werner_s(threshold_e_LR()) == pytest.approx(2.0, abs=1e-9)
    assert threshold_e_ent() == 0.5
    assert is_entangled_ppt(werner(0.5 - 1e-6, PHI_PLUS))
    assert not is_entangled_ppt(werner(0.5 + 1e-6, PHI_PLUS))


@given(*[st.floats(0, 2 * np.pi) for _ in range(4)])
@settings(max_examples=80, deadline=None)
def test_product_state_integrands(ta, pa, tb, pb):
    rho = product_state(ta, pa, tb, pb)
    sa, sb = np.sin(ta), np.sin(tb)
    assert chsh(rho, PRINTED_SETTINGS) == pytest.approx(SQ2 * sa * sb * np.sin(pa + pb), abs=1e-12)
    assert chsh(rho, CORRECTED_SETTINGS) == pytest.approx(SQ2 * sa * sb * np.cos(pa - pb), abs=1e-12)


def test_product_state_extremizer_both_settings():
    rho = product_state(np.pi / 2, np.pi / 4, np.pi / 2, np.pi / 4)
    assert chsh(rho, PRINTED_SETTINGS) == pytest.approx(SQ2, abs=1e-12)
    assert chsh(rho, CORRECTED_SETTINGS) == pytest.approx(SQ2, abs=1e-12)


def test_separable_search_small():
    s = separable_bound_search(5000, seed=3)
    assert SQ2 - 0.01 <= s <= SEPARABLE_BOUND + 1e-6


def test_settings_reject_non_unit():
    with pytest.raises(ValueError):
        MeasurementSettings([1, 1, 0], [0, 1, 0], [1, 0, 0], [0, 1, 0])


# B(theta) for the attacked |Phi+> reduced state; frozen from the correlation
# matrix and checked against an independent search and 2 sqrt(1 + cos^4).
@pytest.mark.parametrize("theta, frozen", [(0, 2.8284271247), (np.pi / 4, 2.2360679775), (np.pi / 2, 2.0)])
def test_attacked_state_violation(theta, frozen):
    rho = particle_of(qwp_attack_prepare(0, "G2", SideChannelConfig(theta)))
    b = chsh_optimal(rho)[0]
    assert b == pytest.approx(frozen, abs=1e-9)
    assert b == pytest.approx(2 * np.sqrt(1 + np.cos(theta) ** 4), abs=1e-9)
    assert b == pytest.approx(chsh_search(rho, restarts=10), abs=1e-6)
    # the printed candidate breaks the Tsirelson bound below pi/2
    if theta < np.pi / 2:
        assert bell_b_printed(theta) > TSIRELSON_BOUND
    if theta == 0:
        assert b == pytest.approx(bell_b_fidelity(theta), abs=1e-12)
    else:
        assert b != pytest.approx(bell_b_fidelity(theta), abs=1e-3)
