"""Invariant checks evaluated on finished flow runs.

Each check returns a :class:`Check`; none of them raise on violation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq
from scipy.signal import resample

from .flow import FlowResult, eta_normalized, rhs
from .functionals import klein_mismatch
from .geometry import RadialState, geometry_fields, gradient_bound
from .problem import NORMALIZED, UNNORMALIZED, make_fdata
from .sphere_grid import build_grid

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    limit: float
    detail: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name}: value={self.value:.6g} limit={self.limit:.6g} {self.detail}".rstrip()


def monotone_violation(values: np.ndarray, direction: int, rel_tol: float = 1e-10) -> float:
    """Largest normalized step against ``direction`` (+1 non-decreasing, -1 non-increasing).

    Each step is measured as ``-direction * (v[k+1] - v[k]) / (1 + |v[k]|)``;
    NaN entries make the result NaN.
    """
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return -np.inf
    steps = -direction * np.diff(v) / (1.0 + np.abs(v[:-1]))
    if np.any(~np.isfinite(steps)):
        return float("nan")
    return float(steps.max())


def q_monotone(result: FlowResult, rel_tol: float = 1e-10) -> Check:
    worst = monotone_violation(result.trace.column("Q"), +1)
    return Check("q_monotone", bool(worst <= rel_tol), worst, rel_tol,
                 f"over {len(result.trace)} records")


def j_monotone(result: FlowResult, rel_tol: float = 1e-10) -> Check:
    worst = monotone_violation(result.trace.column("J"), -1)
    return Check("j_monotone", bool(worst <= rel_tol), worst, rel_tol,
                 f"over {len(result.trace)} records")


def conserved_drift(result: FlowResult, rel_tol: float = 1e-8) -> Check:
    C = result.trace.column("conserved")
    drift = float(np.max(np.abs(C - C[0])) / abs(C[0]))
    return Check("conserved_drift", bool(drift < rel_tol), drift, rel_tol)


def residual_target(result: FlowResult, tol: float | None = None) -> Check:
    tol = result.problem.controls.tol_rel if tol is None else tol
    value = result.trace.last("residual_linf")
    return Check("residual_target", bool(value < tol), value, tol)


def _solve_increasing(g, target: float) -> float:
    """Smallest rho in (0, 50] with g(rho) = target for increasing g; nan if none."""
    lo, hi = 1e-12, 50.0
    if not (g(lo) < target < g(hi)):
        return float("nan")
    return brentq(lambda r: g(r) - target, lo, hi, xtol=1e-15, rtol=1e-15)


def c0_bounds(result: FlowResult) -> tuple[float, float]:
    """Maximum-principle bounds ``(lower, upper)`` on rho for the unnormalized flow.

    Upper: ``sinh(rho)^(alpha-1) min f = 1``.  Lower: the root of
    ``sinh^(alpha-n-1) cosh^n max f = 1`` (absent when that expression never
    drops below 1, in which case the lower bound is 0).
    """
    p = result.problem
    n, alpha = p.n, p.alpha
    f = p.fdata.f
    upper = _solve_increasing(lambda r: np.sinh(r) ** (alpha - 1.0), 1.0 / f.min())
    if alpha >= n + 1:
        low = _solve_increasing(lambda r: np.sinh(r) ** (alpha - n - 1.0) * np.cosh(r) ** n,
                                1.0 / f.max())
    else:
        low = float("nan")
    h = result.history
    rho_min0, rho_max0 = h["rho_min"][0], h["rho_max"][0]
    upper = max(rho_max0, upper) if np.isfinite(upper) else np.inf
    lower = min(rho_min0, low) if np.isfinite(low) else 0.0
    return lower, upper


def corridor(result: FlowResult, tol: float | None = None) -> Check:
    """C^0 corridor from the maximum principle, checked at every step."""
    tol = result.problem.controls.tol_rel if tol is None else tol
    lower, upper = c0_bounds(result)
    h = result.history
    excess = max(float(np.max(h["rho_max"])) - upper, lower - float(np.min(h["rho_min"])))
    return Check("corridor", bool(excess <= 10 * tol), excess, 10 * tol,
                 f"rho in [{lower:.6g}, {upper:.6g}] +/- 10 tol")


def star_shaped(result: FlowResult) -> Check:
    u_min = float(np.min(result.history["u_min"]))
    return Check("star_shaped", bool(u_min > 0), u_min, 0.0, f"min u over {len(result.history)} steps")


def gradient_witness(result: FlowResult) -> Check:
    """``max|grad rho| <= sinh(rho_max) sqrt(exp(4 rho_max tanh rho_min) - 1)`` at every step."""
    h = result.history
    bound = np.array([gradient_bound(a, b) for a, b in zip(h["rho_min"], h["rho_max"])])
    ratio = float(np.max(h["grad_max"] / np.maximum(bound, np.finfo(float).tiny)))
    if not np.any(h["grad_max"] > 0):
        ratio = 0.0
    return Check("gradient_witness", bool(ratio <= 1.0), ratio, 1.0, "max |grad rho| / bound")


def theta_corridor(result: FlowResult, skip_fraction: float = 0.01, factor: float = 10.0) -> Check:
    """Theta = phi^alpha f K stays positive and within a fixed band after a burn-in.

    The band is ``[min(ends)/factor, factor*max(ends)]`` with ``ends`` the
    Theta extrema at the first retained step and at the last step.
    """
    h = result.history
    start = int(np.ceil(skip_fraction * (len(h) - 1)))
    lo, hi = h["theta_min"][start:], h["theta_max"][start:]
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        return Check("theta_corridor", False, float("nan"), 0.0, "non-finite Theta")
    band_lo = min(lo[0], lo[-1]) / factor
    band_hi = factor * max(hi[0], hi[-1])
    ok = bool(lo.min() > 0 and lo.min() >= band_lo and hi.max() <= band_hi)
    return Check("theta_corridor", ok, float(lo.min()), float(band_lo),
                 f"Theta in [{lo.min():.6g}, {hi.max():.6g}], band [{band_lo:.6g}, {band_hi:.6g}]")


def _subsampled_rate(state: RadialState, result: FlowResult) -> np.ndarray | None:
    """rhs on every other node, to estimate the discretization error of rhs."""
    grid = state.grid
    if grid.n == 1 and grid.N % 2:
        return None
    coarse_N = grid.N // 2 if grid.n == 1 else (grid.N + 1) // 2
    try:
        coarse = build_grid(grid.n, coarse_N)
    except ValueError:
        return None
    p = result.problem
    cp = replace(p, fdata=make_fdata(coarse, p.fdata.family, **p.fdata.params))
    cstate = RadialState(coarse, state.rho[::2], state.t)
    cfields = geometry_fields(cstate)
    eta = eta_normalized(cstate, cp, cfields) if p.mode == NORMALIZED else 1.0
    return rhs(cstate, cp, eta, cfields)


def max_principle(result: FlowResult) -> Check:
    """At the discrete argmax of rho the rate obeys the maximum-principle bound.

    ``rhs(argmax) <= phi (1 - phi^(alpha-n-1) phi'^n f) + tol_fd``, where
    ``tol_fd`` is the largest gap between rhs on the grid and on the grid
    with every other node (a conservative discretization-error estimate).
    Checked on every trace snapshot of an unnormalized run.
    """
    p = result.problem
    if p.mode != UNNORMALIZED:
        return Check("max_principle", True, float("nan"), float("nan"), "not applicable")
    n, alpha = p.n, p.alpha
    worst = -np.inf
    for _, t, rho in result.snapshots:
        state = RadialState(p.grid, rho, t)
        fields = geometry_fields(state)
        rate = rhs(state, p, 1.0, fields)
        j = int(np.argmax(rho))
        phi, dphi, f = fields.phi[j], fields.dphi[j], p.fdata.f[j]
        bound = phi * (1.0 - phi ** (alpha - n - 1) * dphi**n * f)
        coarse = _subsampled_rate(state, result)
        tol_fd = 1e3 * EPS * (abs(rate[j]) + phi)
        if coarse is not None:
            tol_fd += float(np.max(np.abs(rate[::2] - coarse)))
        worst = max(worst, rate[j] - bound - tol_fd)
    return Check("max_principle", bool(worst <= 0), float(worst), 0.0, "max of rate - bound - tol_fd")


def evenness(result: FlowResult, per_step: float = 100 * EPS) -> Check:
    """Antipodal defect of rho grows by at most ``per_step * max(rho)`` per step."""
    defects = result.trace.column("evenness_defect")
    if np.all(np.isnan(defects)):
        return Check("evenness", False, float("nan"), per_step, "grid has no antipodal nodes")
    steps = np.array([s for s, _, _ in result.snapshots], dtype=float)
    scale = float(np.max(result.history["rho_max"]))
    allowed = defects[0] + per_step * scale * steps
    excess = float(np.max(defects - allowed))
    return Check("evenness", bool(excess <= 0), float(defects.max()), float(allowed[-1]),
                 "defect vs 100 eps per step")


def theorem_regime_checks(result: FlowResult) -> list[Check]:
    """Monitors that must hold on every run inside a convergence regime."""
    checks = [star_shaped(result), gradient_witness(result), theta_corridor(result)]
    if result.regime in ("supercritical", "critical-bounded", "critical-even"):
        checks.append(corridor(result))
        checks.append(max_principle(result))
    return checks


def observed_order(Ns, errors, floor=None) -> tuple[float, int]:
    """Least-squares slope of ``-log(error)`` against ``log(N)``.

    Points at or below ``floor`` (scalar or per-N array) are dropped as
    roundoff-dominated.  Returns ``(order, points_used)``; the order is NaN
    when fewer than two points remain.
    """
    Ns = np.asarray(Ns, dtype=float)
    errors = np.asarray(errors, dtype=float)
    keep = np.isfinite(errors) & (errors > 0)
    if floor is not None:
        keep &= errors > np.broadcast_to(floor, errors.shape)
    if keep.sum() < 2:
        return float("nan"), int(keep.sum())
    slope = np.polyfit(np.log(Ns[keep]), np.log(errors[keep]), 1)[0]
    return float(-slope), int(keep.sum())


def roundoff_floor(n: int, N) -> np.ndarray:
    """Roundoff level of second differences, ``10 eps / dtheta^2``."""
    N = np.asarray(N, dtype=float)
    spacing = 2 * np.pi / N if n == 1 else np.pi / (N - 1)
    return 10 * EPS / spacing**2


def resample_profile(rho: np.ndarray, n: int, N: int) -> np.ndarray:
    """Band-limited resampling of a periodic profile (n=1) to N nodes."""
    if n != 1:
        raise ValueError("spectral resampling is implemented for the circle only")
    return resample(rho, N)


def klein_orders(result: FlowResult, Ns=(64, 128, 256, 512)):
    """Observed convergence order of the Klein curvature mismatch per snapshot.

    Returns a list of ``(t, mismatches, order, points_used)``.
    """
    n = result.problem.n
    out = []
    grids = {N: build_grid(n, N) for N in Ns}
    floor = roundoff_floor(n, Ns)
    for _, t, rho in result.snapshots:
        errs = [klein_mismatch(RadialState(grids[N], resample_profile(rho, n, N))) for N in Ns]
        order, used = observed_order(Ns, errs, floor)
        out.append((t, errs, order, used))
    return out
