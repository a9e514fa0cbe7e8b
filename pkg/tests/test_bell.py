import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvbell import bell
from cvbell.bell import (
    CH_LOWER,
    CH_UPPER,
    CIRELSON,
    BellResult,
    BellSettings,
    BoundViolationError,
    SettingKindError,
)
from cvbell.fock import make_ecs, make_single_photon_entangled, make_tmss
from cvbell.observables import DisplacementSetting, ProjectorSetting

angles = st.floats(-math.pi, math.pi)
disp = st.complex_numbers(max_magnitude=1.2, allow_nan=False, allow_infinity=False)


# settings containers


def test_settings_kinds():
    s = BellSettings.angles(0, 1, 2, 3)
    assert s.kind is ProjectorSetting
    assert [x.theta for x in s] == [0, 1, 2, 3]
    with pytest.raises(SettingKindError):
        BellSettings(ProjectorSetting(0), DisplacementSetting(0), ProjectorSetting(0), ProjectorSetting(0))
    with pytest.raises(SettingKindError):
        bell.chsh_gbw("tmss", 1.0, s)
    d = BellSettings.displacements(0, 1j, 0.5, -0.5)
    assert d.to_dict()["a_prime"] == {"re": 0.0, "im": 1.0}


def test_result_bounds():
    BellResult(CIRELSON, None, "gbw").check_bounds()
    with pytest.raises(BoundViolationError):
        BellResult(2.9, None, "pseudospin").check_bounds()
    with pytest.raises(BoundViolationError):
        BellResult(CH_LOWER - 0.01, None, "ch_q").check_bounds()
    BellResult(CH_UPPER, None, "ch_parity").check_bounds()


def test_kind_validation():
    with pytest.raises(ValueError):
        bell.pseudospin_max("tmss", -1.0)
    with pytest.raises(ValueError):
        bell.pseudospin_max("ecs", 0.0)
    with pytest.raises(ValueError):
        bell.pseudospin_max("cat", 1.0)


# pseudospin


@pytest.mark.parametrize(
    "gamma,expected",
    [(0.05, 2.8284263352960072), (1.0, 2.7492918517732085), (6.0, 2.8185170607032097)],
)
def test_ecs_pseudospin_max_oracle(gamma, expected):
    assert bell.pseudospin_max("ecs", gamma) == pytest.approx(expected, abs=1e-12)


def test_tmss_pseudospin_max():
    assert bell.pseudospin_max("tmss", 0.0) == pytest.approx(2.0)
    r = np.linspace(0, 3, 31)
    vals = [bell.pseudospin_max("tmss", x) for x in r]
    assert np.all(np.diff(vals) > 0)
    assert vals[-1] < CIRELSON and vals[-1] > 2.828


@pytest.mark.parametrize("kind,param", [("tmss", 0.7), ("ecs", 1.3)])
@given(st.lists(angles, min_size=8, max_size=8))
@settings(max_examples=15, deadline=None)
def test_pseudospin_matrix_matches_closed_form(kind, param, x):
    st_ = make_tmss(param) if kind == "tmss" else make_ecs(param)
    s = BellSettings.spins(*np.reshape(x, (4, 2)))
    ref = bell.chsh_pseudospin_analytic(kind, param, s)
    assert bell.chsh_pseudospin(st_, s) == pytest.approx(ref, abs=1e-9)
    assert abs(ref) <= bell.pseudospin_max(kind, param) + 1e-12


def test_pseudospin_table_matches_explicit_operators():
    s = make_ecs(0.9)
    sets = BellSettings.spins((0.1, 0.2), (1.0, -0.4), (2.0, 0.3), (-0.6, 1.1))
    assert bell.chsh_pseudospin(s, sets) == pytest.approx(bell.chsh_pseudospin_operators(s, sets), abs=1e-12)


def test_pseudospin_reaches_maximum():
    r = 1.0
    f = math.tanh(2 * r)
    t = math.atan(f)
    # a = z, a' = x; b, b' in the z-x plane at +-atan F
    s = BellSettings.spins((0, 0), (math.pi / 2, 0), (t, 0), (-t, 0))
    assert bell.chsh_pseudospin_analytic("tmss", r, s) == pytest.approx(bell.pseudospin_max("tmss", r), abs=1e-12)


# displaced parity


@pytest.mark.parametrize("kind,param", [("tmss", 0.8), ("ecs", 1.2)])
@given(disp, disp, disp, disp)
@settings(max_examples=8, deadline=None)
def test_gbw_closed_form_matches_matrix(kind, param, a, ap, b, bp):
    st_ = make_tmss(param) if kind == "tmss" else make_ecs(param)
    s = BellSettings.displacements(a, ap, b, bp)
    ref = bell.chsh_gbw(kind, param, s)
    assert bell.chsh_bw_numeric(st_, s) == pytest.approx(ref, abs=1e-8)
    assert abs(ref) <= CIRELSON


def test_gbw_vectorized_matches_scalar():
    rng = np.random.default_rng(3)
    z = rng.normal(size=(4, 6)) + 1j * rng.normal(size=(4, 6))
    vec = bell.chsh_gbw_vec("ecs", 1.1, *z)
    for k in range(6):
        s = BellSettings.displacements(*z[:, k])
        assert vec[k] == pytest.approx(bell.chsh_gbw("ecs", 1.1, s), abs=1e-13)


def test_bw_vacuum_limit():
    # r = 0: the product of vacuum Wigner functions
    s = BellSettings.displacements(0, 0.2, 0, -0.2)
    v = bell.chsh_gbw("tmss", 0.0, s)
    e = math.exp(-2 * 0.04)
    assert v == pytest.approx(1 + 2 * e - e * e, abs=1e-12)


# Gisin-Peres


def test_gisin_peres_singlet_reaches_cirelson():
    s = make_single_photon_entangled(1)
    sets = BellSettings.angles(0, math.pi / 2, math.pi / 4, -math.pi / 4)
    assert abs(bell.chsh_gisin_peres(s, sets)) == pytest.approx(CIRELSON, abs=1e-12)


def test_gisin_peres_truncation_and_convention():
    s = make_tmss(0.9)
    sets = BellSettings.angles(0.2, 1.5, -0.6, 0.9)
    full = bell.chsh_gisin_peres(s, sets)
    small = bell.chsh_gisin_peres(s, sets, N=5)
    assert small != pytest.approx(full, abs=1e-6)
    flipped = BellSettings.angles(*(math.pi - x.theta for x in sets))
    assert bell.chsh_gisin_peres(s, sets, convention="pauli") == pytest.approx(
        bell.chsh_gisin_peres(s, flipped), abs=1e-12
    )


# Clauser-Horne


@given(angles, angles, angles, angles)
@settings(max_examples=40, deadline=None)
def test_ch_qubit_single_photon(a, ap, b, bp):
    s = BellSettings.angles(a, ap, b, bp)
    v = bell.ch_qubit(make_single_photon_entangled(1), s)
    assert v == pytest.approx(bell.ch_qubit_single_photon(s), abs=1e-12)
    lo, hi = bell.ch_delta_bounds(s)
    assert lo - 1e-12 <= v <= hi + 1e-12
    assert CH_LOWER - 1e-12 <= lo and hi <= CH_UPPER + 1e-12


def test_ch_bounds_random_two_qubit_states():
    rng = np.random.default_rng(11)
    for _ in range(300):
        t = rng.uniform(-math.pi, math.pi, 4)
        s = BellSettings.angles(*t)
        psi = rng.normal(size=4)
        psi /= np.linalg.norm(psi)
        v = psi @ bell.ch_operator(s) @ psi
        lo, hi = bell.ch_delta_bounds(s)
        assert lo - 1e-12 <= v <= hi + 1e-12


@given(angles, angles, angles, angles)
@settings(max_examples=30, deadline=None)
def test_ch_operator_identity(a, ap, b, bp):
    s = BellSettings.angles(a, ap, b, bp)
    op = bell.ch_operator(s)
    assert np.allclose(op @ op, -op - bell.ch_delta_operator(s), atol=1e-12)
    ev = np.linalg.eigvalsh(bell.ch_delta_operator(s) + bell.ch_delta_operator(s).T) / 2
    lo, hi = bell.ch_delta_bounds(s)
    delta = ev.min()
    assert hi == pytest.approx((-1 + math.sqrt(1 - 4 * delta)) / 2, abs=1e-12)


def test_ch_qubit_warns_outside_subspace():
    with pytest.warns(UserWarning):
        bell.ch_qubit(make_tmss(0.5, 5), BellSettings.angles(0, 1, 0, 1))


@pytest.mark.parametrize("kind,param", [("tmss", 0.6), ("ecs", 0.9), ("single_photon", 0.0)])
@given(disp, disp, disp, disp)
@settings(max_examples=8, deadline=None)
def test_ch_q_closed_form_matches_matrix(kind, param, a, ap, b, bp):
    if kind == "tmss":
        st_ = make_tmss(param)
    elif kind == "ecs":
        st_ = make_ecs(param)
    else:
        st_ = make_single_photon_entangled(30)
    s = BellSettings.displacements(a, ap, b, bp)
    ref = bell.ch_q_formalism(kind, param, s)
    assert bell.ch_q_numeric(st_, s) == pytest.approx(ref, abs=1e-10)
    assert CH_LOWER <= ref <= CH_UPPER


def test_ch_q_vectorized_matches_scalar():
    rng = np.random.default_rng(5)
    z = rng.normal(size=(4, 5)) + 1j * rng.normal(size=(4, 5))
    vec = bell.ch_q_vec("tmss", 0.7, *z)
    for k in range(5):
        s = BellSettings.displacements(*z[:, k])
        assert vec[k] == pytest.approx(bell.ch_q_formalism("tmss", 0.7, s), abs=1e-13)


def test_chi_tmss_oracle():
    assert bell.chi_joint("tmss", 0.7, 0.4, -1.1) == pytest.approx(0.031702098318750634, abs=1e-14)
    assert bell.chi_marginal("tmss", 0.7, 0.4) == pytest.approx(0.66195713571719472, abs=1e-14)


def test_chi_ecs_closed_form():
    t1, t2, g = 0.3, 1.2, 1.0
    k = bell.k_of_gamma(g)
    c1, s1, c2, s2 = math.cos(t1), math.sin(t1), math.cos(t2), math.sin(t2)
    expected = 0.5 * (s1**2 * c2**2 + c1**2 * s2**2) - k * s1 * c1 * s2 * c2
    assert bell.chi_joint("ecs", g, t1, t2) == pytest.approx(expected, abs=1e-15)
    assert bell.chi_marginal("ecs", g, t1) == 0.5


@pytest.mark.parametrize("kind,param", [("tmss", 0.7), ("tmss", 1.5), ("ecs", 0.8), ("ecs", 2.0)])
@given(angles, angles, angles, angles)
@settings(max_examples=10, deadline=None)
def test_ch_parity_closed_form_matches_matrix(kind, param, a, ap, b, bp):
    st_ = make_tmss(param) if kind == "tmss" else make_ecs(param)
    s = BellSettings.angles(a, ap, b, bp)
    ref = bell.ch_parity_formalism(kind, param, s)
    assert bell.ch_parity_numeric(st_, s) == pytest.approx(ref, abs=1e-9)
    assert CH_LOWER - 1e-12 <= ref <= CH_UPPER + 1e-12


def test_ch_parity_numeric_matches_explicit_projectors():
    from cvbell.fock import FockOperator, expectation
    from cvbell.observables import chi_projector

    st_ = make_ecs(1.1)
    s = BellSettings.angles(0.2, -0.9, 1.4, 0.5)
    c = st_.cutoff
    ident = FockOperator.identity(c)

    def chi(x):
        return chi_projector(x.theta, c)

    direct = bell.ch_combination(
        lambda x, y: expectation(st_, chi(x), chi(y)),
        lambda x: expectation(st_, chi(x), ident),
        lambda y: expectation(st_, ident, chi(y)),
        s,
    )
    assert bell.ch_parity_numeric(st_, s) == pytest.approx(direct, abs=1e-12)
