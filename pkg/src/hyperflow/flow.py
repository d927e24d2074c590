"""Explicit time stepping of the scalar radial flow

    rho_t = -phi^alpha f w K + eta * phi,

with ``eta = 1`` (unnormalized) or the global term that keeps the
``int Omega(rho)/f`` integral fixed (normalized).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .functionals import (FunctionalConfig, J_functional, Q_functional, QuadratureError,
                          conserved_integral, klein_project, residual)
from .geometry import (GeometryFields, RadialState, geometry_fields,
                       principal_radii_trace)
from .problem import NORMALIZED, FlowProblem, evenness_defect
from .trace import DiagnosticsTrace

CONVERGED = "converged"
TIMEOUT = "timeout"
SHRINKING = "shrinking"
EXPANDING = "expanding"
FAILED = "failed"
VERDICTS = (CONVERGED, TIMEOUT, SHRINKING, EXPANDING, FAILED)


class CurvatureBreakdown(ArithmeticError):
    """Gauss curvature is not positive somewhere; the flow is not parabolic."""


class DegenerateDenominator(ArithmeticError):
    pass


class StepFailure(RuntimeError):
    """No admissible step after the allowed number of dt halvings."""


def rhs(state: RadialState, problem: FlowProblem, eta: float = 1.0,
        fields: GeometryFields | None = None) -> np.ndarray:
    """Time derivative of rho at every node.

    ``eta`` is ignored in unnormalized mode, where the coefficient is 1.
    """
    fields = fields if fields is not None else geometry_fields(state)
    if not np.all(fields.K > 0):
        j = int(np.argmin(fields.K))
        raise CurvatureBreakdown(f"K = {fields.K[j]:.6g} <= 0 at node {j}")
    coeff = eta if problem.mode == NORMALIZED else 1.0
    return -fields.phi**problem.alpha * problem.fdata.f * fields.w * fields.K + coeff * fields.phi


def eta_normalized(state: RadialState, problem: FlowProblem,
                   fields: GeometryFields | None = None) -> float:
    """``int (K/u) phi^(n+1) / int phi^(n+1-alpha) f_tilde`` on the grid."""
    fields = fields if fields is not None else geometry_fields(state)
    grid = state.grid
    n = grid.n
    denom = grid.integrate(fields.phi ** (n + 1 - problem.alpha) * problem.fdata.f_tilde)
    if not denom >= 1e-300:
        raise DegenerateDenominator(f"normalizing denominator {denom!r} is degenerate")
    return grid.integrate(fields.K / fields.u * fields.phi ** (n + 1)) / denom


def stable_dt(fields: GeometryFields, problem: FlowProblem) -> float:
    """Parabolic step bound ``cfl * dtheta^2 / max(w^-1 phi^(alpha-2) f K tr(W^-1))``.

    The denominator is the largest diffusion coefficient of the linearized
    operator acting on the angular second derivatives of rho.
    """
    diff = (fields.phi ** (problem.alpha - 2.0) * problem.fdata.f * principal_radii_trace(fields)
            / fields.w)
    return problem.controls.cfl * problem.grid.spacing**2 / float(np.max(diff))


def _eta(state, problem, fields):
    return eta_normalized(state, problem, fields) if problem.mode == NORMALIZED else 1.0


@dataclass(frozen=True)
class StepReport:
    dt: float
    halvings: int
    eta: float
    fields: GeometryFields     # geometry of the returned state


def step(state: RadialState, problem: FlowProblem, fields: GeometryFields | None = None,
         dt: float | None = None) -> tuple[RadialState, StepReport]:
    """One Heun (explicit RK2) step with dt halving on failure.

    A trial is rejected when the new radial function is non-finite or
    non-positive, or when a previously convex surface loses convexity.

    Raises
    ------
    CurvatureBreakdown
        If the incoming state already has K <= 0.
    StepFailure
        After ``max_halvings`` rejected trials.
    """
    fields = fields if fields is not None else geometry_fields(state)
    eta0 = _eta(state, problem, fields)
    k1 = rhs(state, problem, eta0, fields)
    dt = stable_dt(fields, problem) if dt is None else float(dt)
    was_convex = fields.convex
    last_error = "no trial"
    for halvings in range(problem.controls.max_halvings + 1):
        try:
            with np.errstate(all="ignore"):
                pred = state.rho + dt * k1
                if not (np.all(np.isfinite(pred)) and np.all(pred > 0)):
                    raise ArithmeticError("predictor left the admissible range")
                mid = RadialState(state.grid, pred, state.t + dt)
                mid_fields = geometry_fields(mid)
                k2 = rhs(mid, problem, _eta(mid, problem, mid_fields), mid_fields)
                rho_new = state.rho + 0.5 * dt * (k1 + k2)
                if not (np.all(np.isfinite(rho_new)) and np.all(rho_new > 0)):
                    raise ArithmeticError("corrector left the admissible range")
                new = RadialState(state.grid, rho_new, state.t + dt)
                new_fields = geometry_fields(new)
            if was_convex and not new_fields.convex:
                raise ArithmeticError("convexity lost")
            return new, StepReport(dt=dt, halvings=halvings, eta=eta0, fields=new_fields)
        except (ArithmeticError, ValueError) as exc:
            last_error = str(exc)
            dt *= 0.5
    raise StepFailure(f"step rejected after {problem.controls.max_halvings} halvings: {last_error}")


HISTORY_COLUMNS = ("t", "rho_min", "rho_max", "grad_max", "u_min", "theta_min", "theta_max")


class StepHistory:
    """Cheap per-step extrema, kept for monitors that must hold at every step."""

    def __init__(self):
        self._rows = []

    def add(self, state: RadialState, fields: GeometryFields, problem: FlowProblem) -> None:
        Theta = fields.theta_speed(problem.alpha, problem.fdata.f)
        self._rows.append((state.t, state.rho.min(), state.rho.max(), fields.grad_norm.max(),
                           fields.u.min(), Theta.min(), Theta.max()))

    def __len__(self) -> int:
        return len(self._rows)

    def __getitem__(self, name: str) -> np.ndarray:
        return np.array([r[HISTORY_COLUMNS.index(name)] for r in self._rows])


@dataclass
class FlowResult:
    problem: FlowProblem
    final: RadialState
    trace: DiagnosticsTrace
    verdict: str
    reason: str
    regime: str
    c_star: float
    steps: int
    wall_time: float
    config: FunctionalConfig
    initial_rate: np.ndarray
    history: StepHistory
    snapshots: list = field(default_factory=list)   # (step, t, rho) at each trace record

    @property
    def converged(self) -> bool:
        return self.verdict == CONVERGED

    @property
    def final_fields(self) -> GeometryFields:
        return geometry_fields(self.final)

    @property
    def rho_max_history(self) -> np.ndarray:
        return self.history["rho_max"]

    def summary(self) -> dict:
        res = residual(self.final, self.problem.fdata, self.problem.alpha, self.problem.mode)
        return {
            "verdict": self.verdict,
            "reason": self.reason,
            "regime": self.regime,
            "final_residual_linf": res.linf,
            "final_residual_l2": res.l2,
            "c_star": self.c_star,
            "final_t": self.final.t,
            "steps": self.steps,
            "wall_time": self.wall_time,
            "rho_min": float(self.final.rho.min()),
            "rho_max": float(self.final.rho.max()),
        }


def _record(trace, state, fields, problem, cfg, dt, eta):
    fdata = problem.fdata
    res = residual(state, fdata, problem.alpha, problem.mode, fields)
    Theta = fields.theta_speed(problem.alpha, fdata.f)
    try:
        kstate = klein_project(state, fields)
        Q = Q_functional(kstate, fdata, cfg, problem.alpha)
        J = J_functional(kstate, state.grid, cfg)
        conserved = conserved_integral(state, fdata, cfg, problem.alpha)
    except (QuadratureError, FloatingPointError):
        Q = J = conserved = float("nan")
    trace.append(
        t=state.t, dt=dt, rho_min=state.rho.min(), rho_max=state.rho.max(),
        grad_max=fields.grad_norm.max(), kappa_min=fields.kappa.min(), kappa_max=fields.kappa.max(),
        u_min=fields.u.min(), theta_min=Theta.min(), theta_max=Theta.max(),
        residual_linf=res.linf, residual_l2=res.l2, Q=Q, J=J, conserved=conserved,
        eta=eta, c_star=res.c_star, evenness_defect=evenness_defect(state.grid, state.rho),
    )
    return res


def run(problem: FlowProblem, config: FunctionalConfig | None = None, progress=None) -> FlowResult:
    """Evolve until the elliptic residual drops below ``tol_rel`` or a stop rule fires.

    Every math-domain problem becomes a verdict; nothing is raised for them.
    ``progress``, if given, is called with ``(steps, t, residual_linf)`` at
    each trace record.
    """
    ctl = problem.controls
    start = time.perf_counter()
    state = problem.initial_state()
    fields = geometry_fields(state)
    cfg = config if config is not None else FunctionalConfig.from_initial(state, fields)
    trace = DiagnosticsTrace()
    history = StepHistory()
    snapshots = []
    verdict, reason = TIMEOUT, ""
    steps = 0
    c_star = float("nan")
    try:
        eta = _eta(state, problem, fields)
        initial_rate = rhs(state, problem, eta, fields)
        dt_last = stable_dt(fields, problem)
    except ArithmeticError as exc:
        initial_rate = np.full(state.grid.N, np.nan)
        verdict, reason = FAILED, f"curvature-breakdown: {exc}"

    def record(st, fl, dt):
        res = _record(trace, st, fl, problem, cfg, dt, _eta(st, problem, fl))
        snapshots.append((steps, st.t, st.rho.copy()))
        if progress is not None:
            progress(steps, st.t, res.linf)

    history.add(state, fields, problem)
    if verdict != FAILED:
        record(state, fields, dt_last)
    last_recorded = 0
    while verdict != FAILED:
        res = residual(state, problem.fdata, problem.alpha, problem.mode, fields)
        c_star = res.c_star
        rho_max = state.rho.max()
        if res.linf < ctl.tol_rel:
            verdict = CONVERGED
            break
        if rho_max < ctl.rho_floor:
            verdict, reason = SHRINKING, f"rho_max fell below {ctl.rho_floor}"
            break
        if rho_max > ctl.rho_ceiling:
            verdict, reason = EXPANDING, f"rho_max exceeded {ctl.rho_ceiling}"
            break
        if state.t >= ctl.T_max:
            verdict, reason = TIMEOUT, f"t reached T_max={ctl.T_max}"
            break
        if steps >= ctl.max_steps:
            verdict, reason = TIMEOUT, f"step budget {ctl.max_steps} exhausted"
            break
        try:
            state, report = step(state, problem, fields)
        except CurvatureBreakdown as exc:
            verdict, reason = FAILED, f"curvature-breakdown: {exc}"
            break
        except (StepFailure, ArithmeticError, ValueError) as exc:
            verdict, reason = FAILED, f"step-failure: {exc}"
            break
        fields = report.fields
        dt_last = report.dt
        steps += 1
        history.add(state, fields, problem)
        if steps % ctl.trace_stride == 0:
            record(state, fields, dt_last)
            last_recorded = steps

    if steps != last_recorded:
        try:
            record(state, fields, dt_last)
        except ArithmeticError:
            pass

    hist = history["rho_max"]
    if verdict == TIMEOUT and len(hist) > 1 and np.all(np.diff(hist) < 0):
        verdict = SHRINKING
        reason += "; rho_max strictly decreasing throughout"

    return FlowResult(problem=problem, final=state, trace=trace, verdict=verdict, reason=reason,
                      regime=problem.regime, c_star=c_star, steps=steps,
                      wall_time=time.perf_counter() - start, config=cfg,
                      initial_rate=initial_rate, history=history, snapshots=snapshots)
