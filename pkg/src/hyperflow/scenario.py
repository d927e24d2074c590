"""Scenario files: loading, running, parameter sweeps and suite verification.

A scenario is a JSON object::

    {
      "schema_version": 1,
      "name": "round-equilibrium",
      "kind": "flow",
      "problem": {"n": 1, "N": 256, "alpha": 2.0, "mode": "unnormalized",
                  "fdata": {"family": "constant", "c": 2.0},
                  "initial": {"shape": "round", "rho0": 0.3},
                  "controls": {"cfl": 0.2, "trace_stride": 500}},
      "expect": {"verdict": "converged", "rho_target": 1.3169578969248166, "rho_tol": 1e-6},
      "asserts": [{"check": "q_monotone"}, {"check": "theorem_monitors"}]
    }

``kind = "ellipsoid_j"`` replaces ``problem`` by an ``ellipsoid`` block and
evaluates the J functional of a Klein ellipsoid of revolution instead of
running a flow.  See README for every field.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import jsonschema
import numpy as np

from . import monitors
from .flow import CONVERGED, VERDICTS, FlowResult, run
from .functionals import (FunctionalConfig, J_functional, ellipsoid_J_quadrature, klein_project,
                          residual, uniqueness_check)
from .geometry import geometry_fields
from .problem import (DATA_FAMILIES, MODES, NORMALIZED, SHAPE_FAMILIES, FlowProblem, InitialShape,
                      NumericControls, PositivityError, make_fdata)
from .sphere_grid import build_grid
from .trace import FLOAT_FORMAT

SCHEMA_VERSION = 1
CHECKS = ("q_monotone", "j_monotone", "conserved_drift", "residual_target", "corridor",
          "evenness", "uniqueness_pair", "theorem_monitors", "j_oracle")
SWEEP_PARAMS = ("alpha", "N", "cfl", "f-amplitude", "e1")
EVALUATED = "evaluated"

_number = {"type": "number"}
_controls_schema = {
    "type": "object",
    "additionalProperties": False,
    "properties": {k: _number for k in ("cfl", "tol_rel", "T_max", "rho_floor", "rho_ceiling")}
    | {k: {"type": "integer", "minimum": 1} for k in ("max_halvings", "trace_stride", "max_steps")},
}
_problem_schema = {
    "type": "object",
    "required": ["n", "N", "alpha", "fdata", "initial"],
    "additionalProperties": False,
    "properties": {
        "n": {"enum": [1, 2]},
        "N": {"type": "integer"},
        "alpha": _number,
        "mode": {"enum": list(MODES)},
        "exploratory": {"type": "boolean"},
        "fdata": {"type": "object", "required": ["family"],
                  "properties": {"family": {"enum": list(DATA_FAMILIES)}}},
        "initial": {"type": "object", "required": ["shape"],
                    "properties": {"shape": {"enum": list(SHAPE_FAMILIES)}}},
        "controls": _controls_schema,
    },
}
_ellipsoid_schema = {
    "type": "object",
    "required": ["n", "N", "e1", "e2"],
    "additionalProperties": False,
    "properties": {"n": {"enum": [1, 2]}, "N": {"type": "integer"}, "e1": _number, "e2": _number,
                   "a": _number, "quad_tol": _number},
}
SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "name", "kind"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
        "description": {"type": "string"},
        "kind": {"enum": ["flow", "ellipsoid_j"]},
        "problem": _problem_schema,
        "ellipsoid": _ellipsoid_schema,
        "expect": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "verdict": {"enum": list(VERDICTS) + [EVALUATED]},
                "rho_target": _number,
                "rho_tol": _number,
                "rho_max_decreasing": {"type": "boolean"},
                "initial_rate": {"type": "object", "required": ["value", "rel_tol"],
                                 "properties": {"value": _number, "rel_tol": _number}},
            },
        },
        "asserts": {
            "type": "array",
            "items": {"type": "object", "required": ["check"],
                      "properties": {"check": {"enum": list(CHECKS)}, "tol": _number}},
        },
        "outputs": {"type": "string"},
    },
    "allOf": [
        {"if": {"properties": {"kind": {"const": "flow"}}}, "then": {"required": ["problem"]}},
        {"if": {"properties": {"kind": {"const": "ellipsoid_j"}}}, "then": {"required": ["ellipsoid"]}},
    ],
}


class SchemaError(ValueError):
    """Scenario content does not match the schema; ``path`` locates the field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _path(parts) -> str:
    return "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in parts)


@dataclass(frozen=True)
class Assertion:
    check: str
    tol: float | None = None
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Scenario:
    name: str
    kind: str
    raw: dict
    problem: FlowProblem | None
    expect: dict
    asserts: tuple
    outputs: str

    @property
    def expected_verdict(self) -> str:
        return self.expect.get("verdict", CONVERGED if self.kind == "flow" else EVALUATED)


def _build_problem(problem_data: dict) -> FlowProblem:
    n = problem_data["n"]
    mode = problem_data.get("mode", "unnormalized")
    alpha = float(problem_data["alpha"])
    try:
        grid = build_grid(n, problem_data["N"])
    except ValueError as exc:
        raise SchemaError(_path(["problem", "N"]), str(exc)) from None
    fd = dict(problem_data["fdata"])
    try:
        fdata = make_fdata(grid, fd.pop("family"), **fd)
    except PositivityError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(_path(["problem", "fdata"]), f"invalid prescribed data: {exc}") from None
    init = dict(problem_data["initial"])
    initial = InitialShape(init.pop("shape"), init)
    try:
        initial.radial_function(grid)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(_path(["problem", "initial"]), f"invalid initial shape: {exc}") from None
    try:
        controls = NumericControls(**problem_data.get("controls", {}))
    except ValueError as exc:
        raise SchemaError(_path(["problem", "controls"]), str(exc)) from None
    if not alpha > 0:
        raise SchemaError(_path(["problem", "alpha"]), "alpha must be positive")
    if mode == NORMALIZED and not problem_data.get("exploratory", False):
        if not 2.0 < alpha <= n + 1:
            raise SchemaError(_path(["problem", "alpha"]),
                              f"normalized mode needs 2 < alpha <= n+1 = {n + 1}, got {alpha}"
                              " (set \"exploratory\": true to run anyway)")
        if not fdata.even:
            raise SchemaError(_path(["problem", "fdata"]), "normalized mode needs even data")
    return FlowProblem(n=n, alpha=alpha, fdata=fdata, mode=mode, initial=initial, controls=controls)


def parse_scenario(data: dict) -> Scenario:
    """Validate a scenario object and build its problem.

    Raises
    ------
    SchemaError
        On structural or semantic violations, with a JSONPath-like field path.
    PositivityError
        If the prescribed data is not positive on the scenario's grid.
    """
    validator = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise SchemaError(_path(err.absolute_path), err.message)
    problem = _build_problem(data["problem"]) if data["kind"] == "flow" else None
    if data["kind"] == "ellipsoid_j":
        e = data["ellipsoid"]
        if not 0 < e["e2"] < 1 or not 0 < e["e1"] < 1:
            raise SchemaError(_path(["ellipsoid"]), "semi-axes must lie in (0, 1)")
        try:
            build_grid(e["n"], e["N"])
        except ValueError as exc:
            raise SchemaError(_path(["ellipsoid", "N"]), str(exc)) from None
    asserts = tuple(
        Assertion(a["check"], a.get("tol"), {k: v for k, v in a.items() if k not in ("check", "tol")})
        for a in data.get("asserts", []))
    return Scenario(name=data["name"], kind=data["kind"], raw=data, problem=problem,
                    expect=dict(data.get("expect", {})), asserts=asserts,
                    outputs=data.get("outputs", data["name"]))


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"{path}: not valid JSON ({exc})") from None
    return parse_scenario(data)


# ---------------------------------------------------------------- outputs

def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def write_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=False) + "\n")


def profile_table(state, fdata, alpha: float, mode: str) -> tuple[list[str], np.ndarray]:
    """Columns of profile_final.csv for a state."""
    fields = geometry_fields(state)
    k = klein_project(state, fields)
    res = residual(state, fdata, alpha, mode, fields)
    R = fields.phi**alpha * fields.K - res.c_star * fdata.f_tilde * fields.u
    n = state.grid.n
    names = ["theta", "rho", "r", "u", "uhat", "K", "Khat"] + [f"kappa_{i + 1}" for i in range(n)]
    names += ["f_tilde", "residual"]
    cols = [state.grid.theta, state.rho, k.r, fields.u, k.uhat, fields.K, k.Khat]
    cols += [fields.kappa[:, i] for i in range(n)] + [fdata.f_tilde, R]
    return names, np.column_stack(cols)


def write_table(path: Path, names, table: np.ndarray) -> None:
    np.savetxt(path, table, delimiter=",", header=",".join(names), comments="", fmt=FLOAT_FORMAT)


def read_table(path: Path) -> tuple[list[str], np.ndarray]:
    with open(path) as fh:
        names = fh.readline().strip().split(",")
    return names, np.atleast_2d(np.loadtxt(path, delimiter=",", skiprows=1))


# ---------------------------------------------------------------- running

@dataclass
class Outcome:
    name: str
    exit_code: int
    summary: dict
    out_dir: Path | None
    result: FlowResult | None = None
    checks: list = field(default_factory=list)


def _flow_checks(s: Scenario, result: FlowResult, log) -> list:
    checks = []
    for a in s.asserts:
        if a.check == "q_monotone":
            checks.append(monitors.q_monotone(result, a.tol if a.tol is not None else 1e-10))
        elif a.check == "j_monotone":
            checks.append(monitors.j_monotone(result, a.tol if a.tol is not None else 1e-10))
        elif a.check == "conserved_drift":
            checks.append(monitors.conserved_drift(result, a.tol if a.tol is not None else 1e-8))
        elif a.check == "residual_target":
            checks.append(monitors.residual_target(result, a.tol))
        elif a.check == "corridor":
            checks.append(monitors.corridor(result, a.tol))
        elif a.check == "evenness":
            checks.append(monitors.evenness(result, a.tol if a.tol is not None else 100 * monitors.EPS))
        elif a.check == "theorem_monitors":
            if result.problem.theorem_regime:
                checks.extend(monitors.theorem_regime_checks(result))
            else:
                checks.append(monitors.Check("theorem_monitors", True, math.nan, math.nan,
                                             "exploratory regime: reported only"))
        elif a.check == "uniqueness_pair":
            checks.append(_uniqueness(s, result, a, log))
        elif a.check == "j_oracle":
            raise SchemaError("$.asserts", "j_oracle applies to ellipsoid_j scenarios only")
    return checks


def _uniqueness(s: Scenario, result: FlowResult, a: Assertion, log) -> monitors.Check:
    tol = a.tol if a.tol is not None else 1e-5
    init = dict(a.params.get("initial", {}))
    if "shape" not in init:
        raise SchemaError("$.asserts", "uniqueness_pair needs an 'initial' shape")
    other = replace(s.problem, initial=InitialShape(init.pop("shape"), init))
    log(f"[{s.name}] second run for uniqueness pair")
    partner = run(other)
    dist = uniqueness_check(result, partner)
    gated = not (result.converged and partner.converged and s.problem.theorem_regime)
    detail = f"partner verdict {partner.verdict}"
    if gated:
        return monitors.Check("uniqueness_pair", True, dist, tol, detail + "; not asserted (gated)")
    return monitors.Check("uniqueness_pair", bool(dist < tol), dist, tol, detail)


def _expectations(s: Scenario, result: FlowResult) -> list:
    out = []
    e = s.expect
    if "rho_target" in e:
        err = float(np.max(np.abs(result.final.rho - e["rho_target"])))
        tol = e.get("rho_tol", 1e-6)
        out.append(monitors.Check("rho_target", bool(err < tol), err, tol))
    if e.get("rho_max_decreasing"):
        d = np.diff(result.rho_max_history)
        worst = float(d.max()) if d.size else -math.inf
        out.append(monitors.Check("rho_max_decreasing", bool(d.size and worst < 0), worst, 0.0,
                                  f"over {d.size} steps"))
    if "initial_rate" in e:
        target = e["initial_rate"]["value"]
        tol = e["initial_rate"]["rel_tol"]
        err = float(np.max(np.abs(result.initial_rate - target)) / abs(target))
        out.append(monitors.Check("initial_rate", bool(err < tol), err, tol))
    return out


def _progress_logger(name: str, log):
    def progress(steps, t, res):
        log(f"[{name}] step {steps:>8d}  t={t:.6g}  residual={res:.3e}")
    return progress


def run_scenario(s: Scenario, out_root: str | Path | None = None, quiet: bool = True,
                 figures: bool = True) -> Outcome:
    """Run a scenario, write its artifacts and decide its exit status.

    Exit code 0 means the verdict matched the expected one and every
    expectation and assertion passed; 1 otherwise.
    """
    log = (lambda msg: None) if quiet else print
    out_dir = None
    if out_root is not None:
        out_dir = Path(out_root) / s.outputs
        out_dir.mkdir(parents=True, exist_ok=True)
    if s.kind == "ellipsoid_j":
        return _run_ellipsoid(s, out_dir, log, figures)
    p = s.problem
    log(f"[{s.name}] n={p.n} N={p.grid.N} alpha={p.alpha} mode={p.mode} regime={p.regime}")
    result = run(p, progress=None if quiet else _progress_logger(s.name, log))
    checks = _expectations(s, result) + _flow_checks(s, result, log)
    failures = [c.line() for c in checks if not c.passed]
    if result.verdict != s.expected_verdict:
        failures.insert(0, f"verdict {result.verdict} ({result.reason}) != expected {s.expected_verdict}")
    summary = {"name": s.name, "kind": s.kind, "expected_verdict": s.expected_verdict}
    summary |= result.summary()
    summary |= {
        "checks": [c.__dict__ for c in checks],
        "failures": failures,
        "exit_code": 0 if not failures else 1,
        "metrics": {},
    }
    if out_dir is not None:
        result.trace.to_csv(out_dir / "trace.csv")
        names, table = profile_table(result.final, p.fdata, p.alpha, p.mode)
        write_table(out_dir / "profile_final.csv", names, table)
        write_json(out_dir / "summary.json", summary)
        if figures:
            from . import plotting
            plotting.profile_figure(names, table, p.n, out_dir / "profile_final.png", title=s.name)
            plotting.trace_figure(result.trace, out_dir / "trace.png", title=s.name)
    for c in checks:
        log(f"[{s.name}] {c.line()}")
    log(f"[{s.name}] verdict={result.verdict} steps={result.steps} wall={result.wall_time:.2f}s")
    return Outcome(s.name, summary["exit_code"], summary, out_dir, result, checks)


def ellipsoid_state(n: int, N: int, e1: float, e2: float):
    """Radial state whose Klein projection is the ellipsoid of revolution (e1 on the axis)."""
    grid = build_grid(n, N)
    return InitialShape("klein_ellipse", {"e1": e1, "e2": e2}).state(grid)


def _run_ellipsoid(s: Scenario, out_dir, log, figures) -> Outcome:
    start = time.perf_counter()
    e = s.raw["ellipsoid"]
    n, e1, e2 = e["n"], float(e["e1"]), float(e["e2"])
    state = ellipsoid_state(n, e["N"], e1, e2)
    fields = geometry_fields(state)
    k = klein_project(state, fields)
    a = float(e.get("a", 0.5 * float(k.uhat.min())))
    cfg = FunctionalConfig(a=a, b=0.5 * float(state.rho.min()), quad_tol=float(e.get("quad_tol", 1e-12)))
    J = J_functional(k, state.grid, cfg)
    metrics = {"J": J, "a": a, "uhat_max": float(k.uhat.max()), "u_max": float(fields.u.max()),
               "convex": bool(k.convex)}
    checks = []
    for asrt in s.asserts:
        if asrt.check != "j_oracle":
            raise SchemaError("$.asserts", f"{asrt.check} does not apply to ellipsoid_j scenarios")
        tol = asrt.tol if asrt.tol is not None else 1e-8
        ref = ellipsoid_J_quadrature(e1, e2, a, n)
        metrics["J_reference"] = ref
        err = abs(J - ref) / abs(ref)
        checks.append(monitors.Check("j_oracle", bool(err < tol), err, tol, f"J={J:.17g} ref={ref:.17g}"))
    failures = [c.line() for c in checks if not c.passed]
    if s.expected_verdict != EVALUATED:
        failures.insert(0, f"verdict {EVALUATED} != expected {s.expected_verdict}")
    summary = {
        "name": s.name, "kind": s.kind, "expected_verdict": s.expected_verdict, "verdict": EVALUATED,
        "reason": "", "regime": "n/a", "final_residual_linf": math.nan, "final_residual_l2": math.nan,
        "c_star": math.nan, "final_t": 0.0, "steps": 0, "wall_time": time.perf_counter() - start,
        "rho_min": float(state.rho.min()), "rho_max": float(state.rho.max()),
        "checks": [c.__dict__ for c in checks], "failures": failures,
        "exit_code": 0 if not failures else 1, "metrics": metrics,
    }
    if out_dir is not None:
        fdata = make_fdata(state.grid, "constant", c=1.0)
        names, table = profile_table(state, fdata, 2.0, "unnormalized")
        write_table(out_dir / "profile_final.csv", names, table)
        write_json(out_dir / "summary.json", summary)
        if figures:
            from . import plotting
            plotting.profile_figure(names, table, n, out_dir / "profile_final.png", title=s.name)
    log(f"[{s.name}] J={J:.12g} uhat_max={metrics['uhat_max']:.6g}")
    for c in checks:
        log(f"[{s.name}] {c.line()}")
    return Outcome(s.name, summary["exit_code"], summary, out_dir, None, checks)


# ---------------------------------------------------------------- sweeps

def with_param(s: Scenario, param: str, value: float) -> Scenario:
    """Copy of ``s`` with one parameter replaced, re-validated from raw form."""
    if param not in SWEEP_PARAMS:
        raise SchemaError("$", f"sweep parameter must be one of {SWEEP_PARAMS}, got {param!r}")
    raw = json.loads(json.dumps(s.raw))
    tag = f"{param}={value:g}"
    raw["name"] = f"{s.name}_{tag}".replace("=", "-")
    raw["outputs"] = str(Path(s.outputs) / tag)
    if param == "e1":
        block = raw.get("ellipsoid") or raw["problem"]["initial"]
        if "e1" not in block:
            raise SchemaError("$", "scenario has no e1 parameter to sweep")
        block["e1"] = float(value)
    elif raw["kind"] != "flow":
        raise SchemaError("$", f"{param} sweeps need a flow scenario")
    elif param == "alpha":
        raw["problem"]["alpha"] = float(value)
    elif param == "N":
        raw["problem"]["N"] = int(value)
    elif param == "cfl":
        raw["problem"].setdefault("controls", {})["cfl"] = float(value)
    elif param == "f-amplitude":
        fd = raw["problem"]["fdata"]
        if fd["family"] == "constant":
            fd["c"] = float(value) * fd["c"]
        elif "coeffs" in fd:
            fd["coeffs"] = [float(value) * c for c in fd["coeffs"]]
        else:
            fd["amplitude"] = float(value) * fd["amplitude"]
    return parse_scenario(raw)


def _common_nodes(states) -> list[np.ndarray]:
    """Values of each final rho on the nodes of the coarsest grid."""
    coarse = min(states, key=lambda st: st.grid.N)
    out = []
    for st in states:
        if st.grid.n == 1:
            stride = st.grid.N // coarse.grid.N
        else:
            stride = (st.grid.N - 1) // (coarse.grid.N - 1)
        out.append(st.rho[::stride])
    return out


SWEEP_COLUMNS = ("value", "exit_code", "verdict", "steps", "wall_time", "final_residual_linf",
                 "c_star", "rho_min", "rho_max", "J", "uhat_max", "error")


def sweep(s: Scenario, param: str, values, out_root: str | Path | None = None, quiet: bool = True,
          figures: bool = True) -> dict:
    """Run one scenario per value and aggregate.

    Per-instance failures are recorded and the sweep continues.  The
    aggregate holds one row per instance plus derived statistics:
    ``observed_order`` (N sweeps, from successive differences of the final
    profiles on the coarsest nodes), ``max_pairwise_diff`` (cfl sweeps),
    ``J_max`` and ``J_growth_last`` (ellipsoid sweeps).
    """
    log = (lambda msg: None) if quiet else print
    rows, outcomes = [], []
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"sweep value {v!r} is not finite")
        try:
            inst = with_param(s, param, v)
            oc = run_scenario(inst, out_root, quiet=quiet, figures=figures)
        except (SchemaError, PositivityError, ArithmeticError, ValueError) as exc:
            log(f"[{s.name}] {param}={v:g} failed: {exc}")
            rows.append({"value": v, "exit_code": 2, "verdict": f"error: {exc}"})
            outcomes.append(None)
            continue
        sm = oc.summary
        err = math.nan
        if oc.result is not None and "rho_target" in s.expect:
            err = float(np.max(np.abs(oc.result.final.rho - s.expect["rho_target"])))
        rows.append({"value": v, "exit_code": oc.exit_code, "verdict": sm["verdict"],
                     "steps": sm["steps"], "wall_time": sm["wall_time"],
                     "final_residual_linf": sm["final_residual_linf"], "c_star": sm["c_star"],
                     "rho_min": sm["rho_min"], "rho_max": sm["rho_max"],
                     "J": sm["metrics"].get("J", math.nan), "uhat_max": sm["metrics"].get("uhat_max", math.nan),
                     "error": err})
        outcomes.append(oc)
    stats = {}
    done = [oc for oc in outcomes if oc is not None and oc.result is not None]
    if param == "N" and len(done) >= 3:
        finals = _common_nodes([oc.result.final for oc in done])
        diffs = [float(np.max(np.abs(a - b))) for a, b in zip(finals[:-1], finals[1:])]
        Ns = [oc.result.final.grid.N for oc in done]
        ratios = [math.log(d0 / d1) / math.log(n1 / n0) if d0 > 0 and d1 > 0 else math.nan
                  for d0, d1, n0, n1 in zip(diffs[:-1], diffs[1:], Ns[:-1], Ns[1:])]
        stats["successive_differences"] = diffs
        stats["observed_order"] = ratios[-1] if ratios else math.nan
        stats["observed_orders"] = ratios
        errs = [r.get("error", math.nan) for r in rows]
        if all(math.isfinite(x) for x in errs):
            stats["target_order"], _ = monitors.observed_order(Ns, errs)
    if param == "cfl" and len(done) >= 2:
        finals = [oc.result.final.rho for oc in done]
        stats["max_pairwise_diff"] = max(float(np.max(np.abs(a - b)))
                                         for i, a in enumerate(finals) for b in finals[i + 1:])
    Js = [r.get("J", math.nan) for r in rows]
    if any(math.isfinite(x) for x in Js):
        stats["J_max"] = float(np.nanmax(Js))
        if len(Js) >= 2 and all(math.isfinite(x) for x in Js[-2:]):
            stats["J_growth_last"] = Js[-1] / Js[-2] - 1.0
    report = {"scenario": s.name, "param": param, "values": list(values), "rows": rows, "stats": stats}
    if out_root is not None:
        base = Path(out_root) / s.outputs
        base.mkdir(parents=True, exist_ok=True)
        path = base / f"sweep_{param}.csv"
        with open(path, "w") as fh:
            fh.write(",".join(SWEEP_COLUMNS) + "\n")
            for r in rows:
                fh.write(",".join(_cell(r.get(c, math.nan)) for c in SWEEP_COLUMNS) + "\n")
        write_json(base / f"sweep_{param}.json", report)
        if figures:
            from . import plotting
            plotting.sweep_figure(rows, param, base / f"sweep_{param}.png", title=s.name)
    return report


def _cell(x) -> str:
    if isinstance(x, (float, np.floating)):
        return FLOAT_FORMAT % x
    return str(x)


# ---------------------------------------------------------------- suites

SUITE_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "entries"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "entries": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["scenario"],
                "additionalProperties": False,
                "properties": {
                    "scenario": {"type": "string"},
                    "sweep": {
                        "type": "object",
                        "required": ["param", "values"],
                        "additionalProperties": False,
                        "properties": {
                            "param": {"enum": list(SWEEP_PARAMS)},
                            "values": {"type": "array", "items": _number, "minItems": 1},
                            "expect": {
                                "type": "object",
                                "additionalProperties": False,
                                "properties": {"min_order": _number, "max_pairwise_diff": _number,
                                               "max_J_growth": _number, "all_exit_zero": {"type": "boolean"}},
                            },
                        },
                    },
                },
            },
        },
    },
}


def load_suite(path: str | Path) -> list[tuple[Scenario, dict | None]]:
    path = Path(path)
    data = json.loads(path.read_text())
    errors = sorted(jsonschema.Draft202012Validator(SUITE_SCHEMA).iter_errors(data),
                    key=lambda e: list(e.absolute_path))
    if errors:
        raise SchemaError(_path(errors[0].absolute_path), errors[0].message)
    entries, seen = [], set()
    for i, entry in enumerate(data["entries"]):
        s = load_scenario(path.parent / entry["scenario"])
        key = (s.name, json.dumps(entry.get("sweep"), sort_keys=True))
        if key in seen:
            raise SchemaError(_path(["entries", i]), f"duplicate entry for scenario {s.name!r}")
        seen.add(key)
        entries.append((s, entry.get("sweep")))
    return entries


def _sweep_checks(report: dict, expect: dict) -> list:
    st = report["stats"]
    checks = []
    if expect.get("all_exit_zero", True):
        bad = [r["value"] for r in report["rows"] if r["exit_code"] != 0]
        checks.append(monitors.Check("instances", not bad, float(len(bad)), 0.0,
                                     f"failing values {bad}" if bad else ""))
    if "min_order" in expect:
        order = st.get("observed_order", math.nan)
        checks.append(monitors.Check("observed_order", bool(order >= expect["min_order"]), order,
                                     expect["min_order"], f"successive differences {st.get('successive_differences')}"))
    if "max_pairwise_diff" in expect:
        d = st.get("max_pairwise_diff", math.nan)
        checks.append(monitors.Check("max_pairwise_diff", bool(d < expect["max_pairwise_diff"]), d,
                                     expect["max_pairwise_diff"]))
    if "max_J_growth" in expect:
        g = st.get("J_growth_last", math.nan)
        checks.append(monitors.Check("J_growth_last", bool(g <= expect["max_J_growth"]), g,
                                     expect["max_J_growth"], f"J_max={st.get('J_max', math.nan):.12g}"))
    return checks


def verify(suite_path: str | Path, out_root: str | Path | None = None, quiet: bool = True,
           figures: bool = True, echo=print) -> int:
    """Run every entry of a suite file; prints one PASS/FAIL line per entry.

    Returns 0 iff every entry passed.
    """
    entries = load_suite(suite_path)
    failed = 0
    lines = []
    for s, sw in entries:
        t0 = time.perf_counter()
        if sw is None:
            oc = run_scenario(s, out_root, quiet=quiet, figures=figures)
            ok = oc.exit_code == 0
            detail = "; ".join(oc.summary["failures"]) or f"verdict {oc.summary['verdict']}"
            label = s.name
        else:
            report = sweep(s, sw["param"], [float(v) for v in sw["values"]], out_root, quiet, figures)
            checks = _sweep_checks(report, sw.get("expect", {}))
            ok = all(c.passed for c in checks)
            detail = "; ".join(c.line() for c in checks)
            label = f"{s.name} sweep {sw['param']}"
        failed += not ok
        line = f"{'PASS' if ok else 'FAIL'} {label} ({time.perf_counter() - t0:.1f}s): {detail}"
        lines.append(line)
        echo(line)
    if out_root is not None:
        Path(out_root).mkdir(parents=True, exist_ok=True)
        (Path(out_root) / "verify_report.txt").write_text("\n".join(lines) + "\n")
    echo(f"{len(entries) - failed}/{len(entries)} entries passed")
    return 0 if failed == 0 else 1
