import numpy as np
import pytest

from hyperflow import monitors
from hyperflow.flow import run
from hyperflow.problem import simple_problem

ARCCOSH2 = np.arccosh(2.0)


@pytest.fixture(scope="module")
def cosine_run():
    p = simple_problem(1, 32, 3.0, {"family": "even_cosine", "c0": 2.0, "coeffs": [0.5]},
                       {"shape": "klein_ellipse", "e1": 0.6, "e2": 0.4, "angle": 0.3},
                       trace_stride=20)
    return run(p)


@pytest.fixture(scope="module")
def normalized_run():
    # N=32 leaves a spatial drift near 2e-8; N=64 is the resolution that meets 1e-8
    p = simple_problem(1, 64, 2.5, {"family": "constant", "c": 1.0},
                       {"shape": "cosine", "c0": 0.8, "coeffs": {"2": 0.05}}, mode="normalized",
                       trace_stride=20)
    return run(p)


def test_monotone_violation():
    assert monitors.monotone_violation([1.0, 2.0, 2.0, 3.0], +1) <= 0
    assert monitors.monotone_violation([3.0, 1.0], -1) <= 0
    v = monitors.monotone_violation([1.0, 0.5], +1)
    assert abs(v - 0.25) < 1e-15
    assert np.isnan(monitors.monotone_violation([1.0, np.nan], +1))
    assert monitors.monotone_violation([1.0], +1) == -np.inf


def test_check_line_format():
    c = monitors.Check("x", True, 1e-12, 1e-10, "detail")
    assert c.line() == "PASS x: value=1e-12 limit=1e-10 detail"
    assert monitors.Check("y", False, 2.0, 1.0).line().startswith("FAIL y:")


def test_c0_bounds_constant_data():
    p = simple_problem(1, 32, 2.0, {"family": "constant", "c": 2.0}, {"shape": "round", "rho0": 0.3})
    r = run(p)
    lower, upper = monitors.c0_bounds(r)
    # the lower root sits at the equilibrium, the initial radius is below it
    assert lower == pytest.approx(0.3)
    assert upper == pytest.approx(np.arcsinh(2.0), rel=1e-14)
    assert monitors.corridor(r).passed


def test_theorem_checks_pass_on_cosine_run(cosine_run):
    assert cosine_run.converged
    checks = monitors.theorem_regime_checks(cosine_run)
    assert {c.name for c in checks} == {"star_shaped", "gradient_witness", "theta_corridor",
                                        "corridor", "max_principle"}
    assert all(c.passed for c in checks), [c.line() for c in checks]
    assert monitors.q_monotone(cosine_run).passed
    assert monitors.residual_target(cosine_run).passed
    assert monitors.evenness(cosine_run).passed


def test_normalized_run_monitors(normalized_run):
    assert normalized_run.converged
    assert monitors.conserved_drift(normalized_run).passed
    assert monitors.j_monotone(normalized_run).passed
    mp = monitors.max_principle(normalized_run)
    assert mp.passed and mp.detail == "not applicable"


def test_residual_target_fails_for_unconverged_run():
    p = simple_problem(1, 32, 3.0, {"family": "even_cosine", "c0": 2.0, "coeffs": [0.5]},
                       {"shape": "cosine", "c0": 0.6, "coeffs": {"2": 0.05}}, max_steps=3)
    assert not monitors.residual_target(run(p)).passed


def test_observed_order_and_floor():
    Ns = np.array([16, 32, 64, 128])
    errs = 3.0 * Ns.astype(float) ** -4
    order, used = monitors.observed_order(Ns, errs)
    assert abs(order - 4) < 1e-12 and used == 4
    order, used = monitors.observed_order(Ns, errs, floor=errs[2] * 1.01)
    assert used == 2 and abs(order - 4) < 1e-12
    order, used = monitors.observed_order(Ns, np.zeros(4))
    assert np.isnan(order) and used == 0


def test_roundoff_floor_grows_with_resolution():
    f = monitors.roundoff_floor(1, [64, 128])
    assert f[1] / f[0] == pytest.approx(4.0)


def test_resample_is_exact_for_band_limited_profiles():
    th = 2 * np.pi * np.arange(32) / 32
    rho = 1 + 0.1 * np.cos(2 * th)
    fine = monitors.resample_profile(rho, 1, 128)
    th2 = 2 * np.pi * np.arange(128) / 128
    assert np.max(np.abs(fine - (1 + 0.1 * np.cos(2 * th2)))) < 1e-14
    with pytest.raises(ValueError):
        monitors.resample_profile(rho, 2, 65)


def test_klein_orders_on_a_run(cosine_run):
    rows = monitors.klein_orders(cosine_run, Ns=(64, 128, 256))
    assert len(rows) == len(cosine_run.snapshots)
    first = rows[0]
    assert first[2] > 2 or first[3] < 2
