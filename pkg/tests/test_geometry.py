import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from hyperflow.geometry import (RadialState, StarShapeError, axisymmetric_curvatures, check_convex,
                                geometry_fields, gradient_bound, principal_radii_trace)
from hyperflow.monitors import observed_order
from hyperflow.sphere_grid import build_grid


def cosine_state(N, c0=1.0, a=0.1, k=2):
    g = build_grid(1, N)
    return RadialState(g, c0 + a * np.cos(k * g.theta))


def test_geodesic_circle_arcsinh_one():
    g = build_grid(1, 64)
    f = geometry_fields(RadialState(g, np.full(64, np.arcsinh(1.0))))
    assert np.allclose(f.phi, 1.0, atol=1e-15)
    assert np.allclose(f.dphi, np.sqrt(2), atol=1e-15)
    assert np.allclose(f.w, 1.0, atol=1e-15) and np.allclose(f.u, 1.0, atol=1e-15)
    assert np.allclose(f.K, np.sqrt(2), rtol=1e-14)
    ok, margin = check_convex(f)
    assert ok and abs(margin - np.sqrt(2)) < 1e-14


@pytest.mark.parametrize("general", [False, True])
def test_geodesic_sphere(general):
    rho0 = 0.7
    g = build_grid(2, 65)
    f = geometry_fields(RadialState(g, np.full(65, rho0)), general=general)
    coth = 1 / np.tanh(rho0)
    assert np.allclose(f.kappa, coth, rtol=1e-14)
    assert np.allclose(f.K, coth**2, rtol=1e-14)
    assert np.allclose(f.u, np.sinh(rho0), rtol=1e-15)
    ok, margin = check_convex(f)
    assert ok and abs(margin - coth) < 1e-13


def test_cosine_curve_matches_high_order_oracle():
    pts = np.array([0.0, np.pi / 4, np.pi / 2])
    ref = oracles.cosine_curve_K_fd(512, pts)
    state = cosine_state(512)
    K = geometry_fields(state).K
    idx = np.rint(pts / state.grid.spacing).astype(int)
    assert np.max(np.abs(K[idx] - ref) / np.abs(ref)) < 1e-8


def test_oracle_agrees_with_analytic_derivatives():
    pts = np.array([0.0, np.pi / 4, np.pi / 2])
    assert np.allclose(oracles.cosine_curve_K_fd(512, pts), oracles.cosine_curve_K_exact(pts),
                       rtol=1e-10, atol=0)


def test_curvature_converges_at_stencil_order():
    Ns = [32, 64, 128]
    errs = []
    for N in Ns:
        s = cosine_state(N)
        errs.append(np.max(np.abs(geometry_fields(s).K - oracles.cosine_curve_K_exact(s.grid.theta))))
    # each doubling gains at least 2^(6 - 0.5)
    assert all(e0 / e1 > 2**5.5 for e0, e1 in zip(errs, errs[1:])), errs
    assert observed_order(Ns, errs)[0] > 5.5


def test_u_times_w_is_phi():
    s = cosine_state(256, a=0.3, k=3)
    f = geometry_fields(s)
    assert np.max(np.abs(f.u * f.w - f.phi) / f.phi) < 1e-14


def test_nonconvex_cosine_detected():
    s = cosine_state(512, a=0.9)
    ok, margin = check_convex(geometry_fields(s))
    # oracle: sign scan of the exact curvature on a fine grid
    theta = np.linspace(0, 2 * np.pi, 20001)
    assert np.min(oracles.cosine_curve_K_exact(theta, a=0.9)) < 0
    assert not ok and margin < 0


def test_general_path_matches_fast_path():
    g = build_grid(2, 129)
    rho = 1.0 + 0.2 * np.cos(g.theta) ** 2 + 0.05 * np.cos(g.theta)
    s = RadialState(g, rho)
    fast, full = geometry_fields(s), geometry_fields(s, general=True)
    for name in ("K", "H", "u", "w"):
        assert np.allclose(getattr(fast, name), getattr(full, name), rtol=1e-12, atol=0)
    assert np.allclose(fast.kappa, full.kappa, rtol=1e-10)


def test_axisymmetric_closed_form_cross_check():
    g = build_grid(2, 129)
    s = RadialState(g, 0.9 + 0.15 * np.cos(2 * g.theta))
    f = geometry_fields(s, general=True)
    km, kp = axisymmetric_curvatures(s)
    assert np.allclose(np.sort(np.stack((km, kp), 1), axis=1), f.kappa, rtol=1e-10)
    assert np.allclose(km * kp, f.K, rtol=1e-12)
    with pytest.raises(ValueError):
        axisymmetric_curvatures(cosine_state(64))


def test_principal_radii_trace():
    g = build_grid(2, 33)
    f = geometry_fields(RadialState(g, np.full(33, 0.5)))
    assert np.allclose(principal_radii_trace(f), 2 / np.tanh(0.5))
    f1 = geometry_fields(cosine_state(32))
    assert np.all(principal_radii_trace(f1) == 1.0)


def test_nonpositive_rho_rejected():
    g = build_grid(1, 32)
    with pytest.raises(ValueError):
        RadialState(g, np.zeros(32))
    with pytest.raises(ValueError):
        RadialState(g, np.ones(31))


def test_nonfinite_rho_raises_star_shape_error():
    g = build_grid(1, 32)
    rho = np.ones(32)
    rho[3] = np.inf
    with pytest.raises((StarShapeError, FloatingPointError)):
        with np.errstate(all="ignore"):
            geometry_fields(RadialState(g, rho))


def test_gradient_bound_exceeds_convex_gradients():
    s = cosine_state(256, c0=1.0, a=0.1)
    f = geometry_fields(s)
    assert f.grad_norm.max() < gradient_bound(s.rho.min(), s.rho.max())


@settings(max_examples=30, deadline=None)
@given(c0=st.floats(0.3, 3.0), a=st.floats(-0.2, 0.2), k=st.integers(1, 4))
def test_identities_on_random_profiles(c0, a, k):
    a = a * c0
    s = cosine_state(128, c0=c0, a=a, k=k)
    f = geometry_fields(s)
    assert np.allclose(f.u * f.w, f.phi, rtol=1e-14)
    assert np.allclose(f.K, np.prod(f.kappa, axis=1), rtol=1e-14)
    assert np.all(f.w >= 1.0) and np.all(f.u <= f.phi)


@settings(max_examples=20, deadline=None)
@given(c0=st.floats(0.3, 2.0), a=st.floats(-0.3, 0.3))
def test_sphere_identities_random_axisymmetric(c0, a):
    g = build_grid(2, 65)
    s = RadialState(g, c0 * (1 + a * np.cos(g.theta) ** 2))
    fast, full = geometry_fields(s), geometry_fields(s, general=True)
    assert np.allclose(full.K, np.prod(full.kappa, axis=1), rtol=1e-12, atol=1e-12)
    assert np.allclose(fast.H, full.H, rtol=1e-12, atol=1e-12)
