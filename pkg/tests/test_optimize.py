import math

import numpy as np
import pytest

from cvbell import bell
from cvbell.bell import CH_LOWER, CH_UPPER, CIRELSON
from cvbell.optimize import OptimizationError, OptimizeSpec, optimize, start_points, sweep
from cvbell.problems import bell_problem, wrap_angles


def _quadratic(x):
    return -float(np.sum((x - 0.3) ** 2)) + 1.0


def test_spec_validation():
    with pytest.raises(ValueError):
        OptimizeSpec(_quadratic, 2, [[-1, 1]] * 2, direction="up")
    with pytest.raises(ValueError):
        OptimizeSpec(_quadratic, 2, [[-1, 1]] * 2, restarts=0)
    with pytest.raises(ValueError):
        OptimizeSpec(_quadratic, 2, [[-1, 1]] * 2, tol=0)


def test_start_points_in_bounds_and_seeded():
    spec = OptimizeSpec(_quadratic, 3, [[-2, 1]] * 3, restarts=10, seed=4)
    p = start_points(spec)
    assert p.shape == (10, 3)
    assert np.all(p >= -2) and np.all(p <= 1)
    assert np.array_equal(p, start_points(spec))
    other = start_points(OptimizeSpec(_quadratic, 3, [[-2, 1]] * 3, restarts=10, seed=5))
    assert not np.array_equal(p, other)


def test_quadratic_maximum():
    res = optimize(OptimizeSpec(_quadratic, 3, [[-1, 1]] * 3, direction="max", restarts=4))
    assert res.value == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(res.diagnostics["x"], 0.3, atol=1e-5)
    assert res.diagnostics["converged"]


def test_min_and_max_abs():
    f = lambda x: float(np.cos(x[0]) - 2)  # noqa: E731  values in [-3, -1]
    lo = optimize(OptimizeSpec(f, 1, [[-3, 3]], direction="min", restarts=4))
    ab = optimize(OptimizeSpec(f, 1, [[-3, 3]], direction="max_abs", restarts=4))
    assert lo.value == pytest.approx(-3.0, abs=1e-12)
    assert ab.value == pytest.approx(-3.0, abs=1e-12)


def test_non_finite_value_raises():
    with pytest.raises(OptimizationError):
        optimize(OptimizeSpec(lambda x: float("nan"), 2, [[-1, 1]] * 2, restarts=2))


def test_never_worse_than_start_points():
    rng = np.random.default_rng(0)
    w = rng.normal(size=(5, 4))

    def rugged(x):
        return float(np.sum(np.sin(w @ x * 3)))

    spec = OptimizeSpec(rugged, 4, [[-2, 2]] * 4, direction="max", restarts=8, seed=2, maxiter=5)
    res = optimize(spec)
    assert res.value >= max(rugged(x) for x in start_points(spec)) - 1e-12


def test_determinism():
    p = bell_problem("gbw", "ecs", 1.0, restarts=6, seed=3)
    a, b = optimize(p), optimize(bell_problem("gbw", "ecs", 1.0, restarts=6, seed=3))
    assert a.value == b.value
    assert a.diagnostics["x"] == b.diagnostics["x"]


def test_thread_pool_matches_serial():
    p = bell_problem("ch_q", "tmss", 0.8, restarts=6, seed=1)
    serial = optimize(p)
    p.n_jobs = 3
    assert optimize(p).value == serial.value


# Bell problems


def test_singlet_gisin_peres_reaches_cirelson():
    res = optimize(bell_problem("gisin_peres", "single_photon", restarts=8))
    assert abs(res.value) == pytest.approx(CIRELSON, abs=1e-8)


def test_pseudospin_analytic_optimum():
    for kind, p in (("tmss", 0.8), ("ecs", 1.0)):
        res = optimize(bell_problem("pseudospin", kind, p, method="analytic", restarts=8))
        assert abs(res.value) == pytest.approx(bell.pseudospin_max(kind, p), abs=1e-8)
        for x in res.settings:
            assert -math.pi < x.theta <= math.pi


def test_ch_qubit_single_photon_bounds():
    lo = optimize(bell_problem("ch_qubit", "single_photon", direction="min", restarts=8))
    hi = optimize(bell_problem("ch_qubit", "single_photon", direction="max", restarts=8))
    assert lo.value == pytest.approx(CH_LOWER, abs=1e-9)
    assert hi.value == pytest.approx(CH_UPPER, abs=1e-9)


def test_bw_restricted_settings_pinned():
    res = optimize(bell_problem("bw", "tmss", 1.0, restarts=6))
    assert res.settings.a.alpha == 0 and res.settings.b.alpha == 0
    assert res.diagnostics["restricted"]
    full = optimize(bell_problem("gbw", "tmss", 1.0, restarts=6))
    assert abs(full.value) >= abs(res.value) - 1e-9


def test_imaginary_displacements():
    res = optimize(bell_problem("gbw", "ecs", 1.5, imaginary=True, restarts=6))
    assert all(x.alpha.real == 0 for x in res.settings)


def test_problem_errors():
    with pytest.raises(ValueError):
        bell_problem("nope", "tmss", 1.0)
    with pytest.raises(ValueError):
        bell_problem("gbw", "single_photon")
    with pytest.raises(ValueError):
        bell_problem("pseudospin", "single_photon", method="analytic")


def test_wrap_angles():
    x = np.array([0.0, math.pi, -math.pi, 3 * math.pi / 2, 7.0])
    w = wrap_angles(x)
    assert np.all(w > -math.pi) and np.all(w <= math.pi)
    assert np.allclose(np.exp(1j * w), np.exp(1j * x))
    assert w[2] == pytest.approx(math.pi)


def test_sweep_warm_start_and_order():
    grid = [0.5, 1.0, 1.5]
    res = sweep(lambda r: bell_problem("pseudospin", "tmss", r, method="analytic", restarts=4), grid)
    assert [x.diagnostics["param"] for x in res] == grid
    vals = [abs(x.value) for x in res]
    assert vals == pytest.approx([bell.pseudospin_max("tmss", r) for r in grid], abs=1e-8)
    assert res[1].diagnostics["restarts"] == 5  # four Sobol points plus the warm start
    with pytest.raises(ValueError):
        sweep(lambda r: None, [])
