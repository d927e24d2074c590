"""Flow problem definition: prescribed curvature data, initial shapes, controls."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
from numpy.polynomial import legendre

from .geometry import RadialState
from .sphere_grid import SphereGrid, build_grid

UNNORMALIZED = "unnormalized"
NORMALIZED = "normalized"
MODES = (UNNORMALIZED, NORMALIZED)

DATA_FAMILIES = ("constant", "even_cosine", "even_legendre", "gaussian_pair")
SHAPE_FAMILIES = ("round", "cosine", "klein_ellipse")


class PositivityError(ValueError):
    """Prescribed curvature data is not strictly positive on the grid."""


def _symmetrize(grid: SphereGrid, values: np.ndarray) -> np.ndarray:
    # bitwise antipodal symmetry: (a + b) / 2 == (b + a) / 2
    idx = grid.antipode
    if idx is None:
        return values
    return 0.5 * (values + values[idx])


def evenness_defect(grid: SphereGrid, values: np.ndarray) -> float:
    """max_j |v(theta_j) - v(-theta_j)| under the antipodal map; NaN if undefined."""
    idx = grid.antipode
    if idx is None:
        return float("nan")
    return float(np.max(np.abs(values - values[idx])))


@dataclass(frozen=True)
class PrescribedData:
    """Samples of ``f_tilde`` and of the flow coefficient ``f = 1/f_tilde``."""

    family: str
    params: dict
    grid: SphereGrid
    f_tilde: np.ndarray
    f: np.ndarray
    even: bool

    def scaled(self, amplitude: float) -> "PrescribedData":
        """Same family with every non-constant coefficient multiplied by ``amplitude``."""
        params = dict(self.params)
        if "coeffs" in params:
            params["coeffs"] = [amplitude * a for a in params["coeffs"]]
        if "amplitude" in params:
            params["amplitude"] = amplitude * params["amplitude"]
        return make_fdata(self.grid, self.family, **params)


def _gaussian_pair(grid: SphereGrid, c0: float, amplitude: float, width: float, center: float = 0.0):
    if grid.n == 1:
        dist = np.abs(np.angle(np.exp(1j * (grid.theta - center))))
        far = np.pi - dist
    else:
        dist = grid.theta
        far = np.pi - grid.theta
    bump = np.exp(-0.5 * (dist / width) ** 2) + np.exp(-0.5 * (far / width) ** 2)
    return c0 + amplitude * bump


def make_fdata(grid: SphereGrid, family: str, **params: Any) -> PrescribedData:
    """Sample a prescribed-data family on ``grid``.

    Families
    --------
    constant : ``c``
    even_cosine (n=1) : ``c0 + sum_k a_k cos(2 k theta)``, params ``c0``, ``coeffs``
    even_legendre (n=2) : ``c0 + sum_k a_k P_{2k}(cos theta)``, params ``c0``, ``coeffs``
    gaussian_pair : ``c0 + amplitude * (bump(theta) + bump(antipode))``,
        params ``c0``, ``amplitude``, ``width``, optional ``center`` (n=1)

    Raises
    ------
    PositivityError
        If ``f_tilde <= 0`` at some node.
    """
    theta = grid.theta
    if family == "constant":
        values = np.full(grid.N, float(params["c"]))
    elif family == "even_cosine":
        if grid.n != 1:
            raise ValueError("even_cosine data is defined on S^1 only")
        values = np.full(grid.N, float(params["c0"]))
        for k, a in enumerate(params.get("coeffs", []), start=1):
            values = values + float(a) * np.cos(2 * k * theta)
    elif family == "even_legendre":
        if grid.n != 2:
            raise ValueError("even_legendre data is defined on axisymmetric S^2 only")
        coeffs = np.zeros(2 * len(params.get("coeffs", [])) + 1)
        coeffs[0] = float(params["c0"])
        for k, a in enumerate(params.get("coeffs", []), start=1):
            coeffs[2 * k] = float(a)
        values = legendre.legval(np.cos(theta), coeffs)
    elif family == "gaussian_pair":
        values = _gaussian_pair(grid, float(params["c0"]), float(params["amplitude"]),
                                float(params["width"]), float(params.get("center", 0.0)))
    else:
        raise ValueError(f"unknown prescribed-data family {family!r}")
    values = _symmetrize(grid, np.asarray(values, dtype=float))
    if not np.all(values > 0):
        j = int(np.argmin(values))
        raise PositivityError(
            f"f_tilde must be positive; {family} data reaches {values[j]:.6g} at theta={theta[j]:.6g}")
    f = 1.0 / values
    for arr in (values, f):
        arr.setflags(write=False)
    even = evenness_defect(grid, values) == 0.0
    return PrescribedData(family=family, params=dict(params), grid=grid,
                          f_tilde=values, f=f, even=even)


@dataclass(frozen=True)
class InitialShape:
    shape: str
    params: dict = field(default_factory=dict)

    def radial_function(self, grid: SphereGrid) -> np.ndarray:
        theta = grid.theta
        p = self.params
        if self.shape == "round":
            return np.full(grid.N, float(p["rho0"]))
        if self.shape == "cosine":
            rho = np.full(grid.N, float(p["c0"]))
            for k, a in sorted((int(k), float(a)) for k, a in p.get("coeffs", {}).items()):
                rho = rho + a * np.cos(k * theta)
            return rho
        if self.shape == "klein_ellipse":
            return np.arctanh(klein_ellipse_radius(theta, float(p["e1"]), float(p["e2"]),
                                                   float(p.get("angle", 0.0))))
        raise ValueError(f"unknown initial shape {self.shape!r}")

    def state(self, grid: SphereGrid) -> RadialState:
        return RadialState(grid, self.radial_function(grid), 0.0)


def klein_ellipse_radius(theta, e1: float, e2: float, angle: float = 0.0) -> np.ndarray:
    """Euclidean radial function of the centred ellipse (ellipsoid of revolution
    for n=2) with semi-axes ``e1`` along ``angle`` and ``e2`` across it."""
    if not (0 < e2 and 0 < e1 < 1 and e2 < 1):
        raise ValueError("Klein ellipse semi-axes must lie in (0, 1)")
    c = np.cos(np.asarray(theta) - angle)
    s = np.sin(np.asarray(theta) - angle)
    return e1 * e2 / np.sqrt(e2**2 * c**2 + e1**2 * s**2)


@dataclass(frozen=True)
class NumericControls:
    cfl: float = 0.2
    tol_rel: float = 1e-8
    T_max: float = 50.0
    max_halvings: int = 30
    trace_stride: int = 100
    max_steps: int = 2_000_000
    rho_floor: float = 1e-3
    rho_ceiling: float = 20.0

    def __post_init__(self):
        if not 0 < self.cfl <= 1:
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if not self.tol_rel > 0:
            raise ValueError(f"tol_rel must be positive, got {self.tol_rel}")
        if self.trace_stride < 1:
            raise ValueError("trace_stride must be >= 1")


def classify_regime(n: int, alpha: float, mode: str, fdata: PrescribedData) -> str:
    """Name of the parameter regime in which convergence is known, or 'exploratory'."""
    critical = abs(alpha - (n + 1)) <= 1e-12
    if mode == UNNORMALIZED:
        if alpha > n + 1 and not critical:
            return "supercritical"
        if critical and float(np.max(fdata.f)) < 1.0:
            return "critical-bounded"
        if critical and fdata.even and fdata.grid.integrate(fdata.f_tilde) > fdata.grid.area:
            return "critical-even"
        return "exploratory"
    if 2.0 < alpha and (alpha <= n + 1 or critical) and fdata.even:
        return "normalized-even"
    return "exploratory"


@dataclass(frozen=True)
class FlowProblem:
    n: int
    alpha: float
    fdata: PrescribedData
    mode: str = UNNORMALIZED
    initial: InitialShape = field(default_factory=lambda: InitialShape("round", {"rho0": 0.5}))
    controls: NumericControls = field(default_factory=NumericControls)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.fdata.grid.n != self.n:
            raise ValueError("prescribed data lives on a grid of a different dimension")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    @property
    def grid(self) -> SphereGrid:
        return self.fdata.grid

    @property
    def regime(self) -> str:
        return classify_regime(self.n, self.alpha, self.mode, self.fdata)

    @property
    def theorem_regime(self) -> bool:
        return self.regime != "exploratory"

    def initial_state(self) -> RadialState:
        return self.initial.state(self.grid)

    def with_controls(self, **changes) -> "FlowProblem":
        return replace(self, controls=replace(self.controls, **changes))


def simple_problem(n: int, N: int, alpha: float, fdata: dict, initial: dict,
                   mode: str = UNNORMALIZED, **controls) -> FlowProblem:
    """Convenience constructor from plain dictionaries."""
    grid = build_grid(n, N)
    fd = dict(fdata)
    data = make_fdata(grid, fd.pop("family"), **fd)
    init = dict(initial)
    shape = InitialShape(init.pop("shape"), init)
    return FlowProblem(n=n, alpha=alpha, fdata=data, mode=mode, initial=shape,
                       controls=NumericControls(**controls))
