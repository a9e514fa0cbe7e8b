import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvbell.fock import make_ecs, make_single_photon_entangled, make_tmss
from cvbell.phase_space import (
    PhasePoint,
    q_ecs,
    q_marginal_ecs,
    q_marginal_from_state,
    q_marginal_single_photon,
    q_marginal_tmss,
    q_marginals,
    q_single_photon,
    q_tmss,
    q_two_mode,
    wigner_ecs,
    wigner_from_state,
    wigner_tmss,
)

points = st.complex_numbers(max_magnitude=1.5, allow_nan=False, allow_infinity=False)


# frozen oracle values (high-precision evaluation of the defining overlaps)


def test_wigner_ecs_oracle():
    assert wigner_ecs(0, 0, 1.0) == pytest.approx(-0.40528473456935109, abs=1e-13)
    assert wigner_ecs(0.3 + 0.2j, -0.4j, 1.0) == pytest.approx(0.17811576497523199, abs=1e-13)


def test_wigner_tmss_oracle():
    assert wigner_tmss(0.3, 0.3, 0.5) == pytest.approx(0.35501259566110914, abs=1e-13)
    assert wigner_tmss(0, 0, 0.0) == pytest.approx(4 / math.pi**2)


def test_q_ecs_oracle():
    assert q_ecs(0.5 + 0.1j, -0.7 + 0.2j, 1.0) == pytest.approx(0.029014584753787199, abs=1e-14)


def test_ecs_rejects_zero_amplitude():
    with pytest.raises(ValueError):
        wigner_ecs(0, 0, 0.0)
    with pytest.raises(ValueError):
        q_ecs(0, 0, 0.0)


def test_tmss_rejects_negative_r():
    with pytest.raises(ValueError):
        wigner_tmss(0, 0, -1.0)
    with pytest.raises(ValueError):
        q_tmss(0, 0, -1.0)


# call forms


def test_phase_point_call_forms():
    p = PhasePoint(0.2 + 0.1j, -0.3)
    assert wigner_tmss(p, 0.7) == wigner_tmss(p.alpha, p.beta, 0.7)
    assert wigner_ecs(p, 1.1) == wigner_ecs(p.alpha, p.beta, 1.1)
    assert q_tmss(p, 0.7) == q_tmss(p.alpha, p.beta, 0.7)
    assert q_single_photon(p) == q_single_photon(p.alpha, p.beta)
    s = make_tmss(0.4)
    assert wigner_from_state(p, s) == wigner_from_state(s, p) == wigner_from_state(s, p.alpha, p.beta)
    assert q_two_mode(p, s) == q_two_mode(s, p.alpha, p.beta)


def test_vectorized_evaluation():
    a = np.linspace(-1, 1, 5) + 0.2j
    vals = wigner_ecs(a, -a, 1.3)
    assert vals.shape == (5,)
    assert vals[2] == pytest.approx(float(wigner_ecs(a[2], -a[2], 1.3)))


# closed forms against truncated states


@pytest.mark.parametrize("r", [0.3, 1.0, 1.5])
@pytest.mark.parametrize("pt", [(0, 0), (0.3 + 0.1j, 0.2 - 0.4j), (-0.5j, 0.6)])
def test_wigner_tmss_matches_state(r, pt):
    s = make_tmss(r)
    assert wigner_from_state(s, *pt) == pytest.approx(float(wigner_tmss(*pt, r)), abs=1e-8)


@pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("pt", [(0, 0), (0.3 + 0.1j, 0.2 - 0.4j), (1.2, -1.0 + 0.3j)])
def test_wigner_ecs_matches_state(gamma, pt):
    s = make_ecs(gamma)
    assert wigner_from_state(s, *pt) == pytest.approx(float(wigner_ecs(*pt, gamma)), abs=1e-10)


@given(points, points)
@settings(max_examples=25, deadline=None)
def test_q_closed_forms_match_overlaps(a, b):
    tm, ec, sp = make_tmss(0.8), make_ecs(1.4), make_single_photon_entangled(1)
    assert q_two_mode(tm, a, b) == pytest.approx(float(q_tmss(a, b, 0.8)), abs=1e-12)
    assert q_two_mode(ec, a, b) == pytest.approx(float(q_ecs(a, b, 1.4)), abs=1e-12)
    assert q_two_mode(sp, a, b) == pytest.approx(float(q_single_photon(a, b)), abs=1e-12)


@given(points)
@settings(max_examples=25, deadline=None)
def test_q_marginals_match_states(a):
    tm, ec, sp = make_tmss(0.8), make_ecs(1.4), make_single_photon_entangled(3)
    for mode in (1, 2):
        assert q_marginals(tm, a, mode) == pytest.approx(float(q_marginal_tmss(a, 0.8)), abs=1e-12)
        assert q_marginals(ec, a, mode) == pytest.approx(float(q_marginal_ecs(a, 1.4)), abs=1e-12)
        assert q_marginal_from_state(sp, a, mode) == pytest.approx(float(q_marginal_single_photon(a)), abs=1e-12)
    with pytest.raises(ValueError):
        q_marginals(tm, a, 3)


# bounds, normalization, symmetry


@given(points, points)
@settings(max_examples=40, deadline=None)
def test_wigner_bounds(a, b):
    lim = 4 / math.pi**2 + 1e-12
    for w in (wigner_tmss(a, b, 1.2), wigner_ecs(a, b, 0.9)):
        assert abs(float(w)) <= lim


@given(points, points)
@settings(max_examples=40, deadline=None)
def test_q_bounds_and_symmetry(a, b):
    for q in (q_tmss(a, b, 1.2), q_ecs(a, b, 0.9), q_single_photon(a, b)):
        assert -1e-15 <= float(q) <= 1 / math.pi**2 + 1e-12
    assert float(q_tmss(a, b, 0.6)) == pytest.approx(float(q_tmss(b, a, 0.6)), abs=1e-15)
    assert float(q_ecs(a, b, 0.9)) == pytest.approx(float(q_ecs(b, a, 0.9)), abs=1e-15)
    assert float(wigner_ecs(a, b, 0.9)) == pytest.approx(float(wigner_ecs(-a, -b, 0.9)), abs=1e-15)


def _plane_grid(box, step=0.05):
    x = np.arange(-box, box + step / 2, step)
    re, im = np.meshgrid(x, x, indexing="ij")
    return re + 1j * im, step * step


@pytest.mark.parametrize("gamma", [0.5, 1.5])
def test_q_marginal_ecs_is_partial_integral(gamma):
    grid, da = _plane_grid(gamma + 5)
    a = 0.4 - 0.3j
    integral = np.sum(q_ecs(a, grid, gamma)) * da
    assert integral == pytest.approx(float(q_marginal_ecs(a, gamma)), abs=1e-8)
    assert np.sum(q_marginal_ecs(grid, gamma)) * da == pytest.approx(1.0, abs=1e-8)


def test_q_marginal_tmss_is_partial_integral():
    r = 0.6
    grid, da = _plane_grid(r + 5)
    a = 0.3 + 0.5j
    integral = np.sum(q_tmss(a, grid, r)) * da
    assert integral == pytest.approx(float(q_marginal_tmss(a, r)), abs=1e-8)


def test_q_marginal_single_photon_normalized():
    grid, da = _plane_grid(6)
    assert np.sum(q_marginal_single_photon(grid)) * da == pytest.approx(1.0, abs=1e-8)
    a = -0.2 + 0.7j
    assert np.sum(q_single_photon(a, grid)) * da == pytest.approx(float(q_marginal_single_photon(a)), abs=1e-8)


def test_wigner_tmss_partial_integral_is_thermal():
    r = 0.5
    grid, da = _plane_grid(6)
    a = 0.3 - 0.2j
    c2 = math.cosh(2 * r)
    thermal = 2 / (math.pi * c2) * math.exp(-2 * abs(a) ** 2 / c2)
    assert np.sum(wigner_tmss(a, grid, r)) * da == pytest.approx(thermal, abs=1e-8)
