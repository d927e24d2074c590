"""Klein-model projection and the integral quantities monitored along the flows.

Naming: ``psi_radial(r) = r^alpha (1 - r^2)^((n+2-alpha)/2)`` and
``varphi_support(s) = s^-1 (1 - s^2)^(-(n+1)/2)``.  The surface measure of
the Gauss image is never built explicitly; integrals against it are pulled
back to the theta grid with ``dsigma = (Khat r^(n+1) / uhat) dtheta``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate as sp_integrate

from .geometry import GeometryFields, RadialState, geometry_fields, sphere_derivatives
from .problem import NORMALIZED, PrescribedData

_GL_HI = np.polynomial.legendre.leggauss(20)
_GL_LO = np.polynomial.legendre.leggauss(10)


class QuadratureError(ArithmeticError):
    """Inner 1D quadrature could not reach the requested tolerance."""


class IncompatibleGridsError(ValueError):
    pass


@dataclass(frozen=True)
class FunctionalConfig:
    a: float
    b: float
    quad_tol: float = 1e-12

    def __post_init__(self):
        if not 0 < self.a < 1:
            raise ValueError(f"lower limit a must lie in (0, 1), got {self.a}")
        if not self.b > 0:
            raise ValueError(f"lower limit b must be positive, got {self.b}")

    @classmethod
    def from_initial(cls, state: RadialState, fields: GeometryFields | None = None,
                     quad_tol: float = 1e-12) -> "FunctionalConfig":
        """Freeze ``a = min(uhat)/2`` and ``b = min(rho)/2`` on the initial surface."""
        fields = fields if fields is not None else geometry_fields(state)
        uhat = fields.u / np.sqrt(1.0 + fields.u**2)
        return cls(a=0.5 * float(np.min(uhat)), b=0.5 * float(np.min(state.rho)), quad_tol=quad_tol)


def primitive(integrand, lower: float, uppers, tol: float = 1e-12) -> np.ndarray:
    """``F(x) = int_lower^x integrand(s) ds`` at every point of ``uppers``.

    The sorted evaluation points split the range into short panels, each
    integrated by 20-point Gauss-Legendre with a 10-point error estimate;
    panels that miss ``tol`` fall back to adaptive QUADPACK.  ``integrand``
    must accept numpy arrays.
    """
    x = np.asarray(uppers, dtype=float)
    knots = np.unique(np.concatenate(([float(lower)], x.ravel())))
    left, right = knots[:-1], knots[1:]
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    hi = half * (integrand(mid[:, None] + half[:, None] * _GL_HI[0]) @ _GL_HI[1])
    lo = half * (integrand(mid[:, None] + half[:, None] * _GL_LO[0]) @ _GL_LO[1])
    panels = hi
    bad = ~(np.abs(hi - lo) <= tol * np.maximum(1.0, np.abs(hi)))
    for i in np.flatnonzero(bad):
        val, err = sp_integrate.quad(lambda s: float(integrand(np.array(s))), left[i], right[i],
                                     epsabs=0.0, epsrel=tol, limit=500)
        if not (err <= 10 * tol * max(1.0, abs(val)) and np.isfinite(val)):
            raise QuadratureError(
                f"quadrature on [{left[i]:.17g}, {right[i]:.17g}] reached only {err:.3g}")
        panels = panels.copy() if panels is hi else panels
        panels[i] = val
    cumulative = np.concatenate(([0.0], np.cumsum(panels)))
    origin = cumulative[np.searchsorted(knots, lower)]
    return (cumulative[np.searchsorted(knots, x)] - origin).reshape(x.shape)


def psi_radial(r, n: int, alpha: float):
    return r**alpha * (1.0 - r**2) ** (0.5 * (n + 2 - alpha))


def varphi_support(s, n: int):
    return 1.0 / (s * (1.0 - s**2) ** (0.5 * (n + 1)))


def radial_potential(r, a: float, n: int, alpha: float, tol: float = 1e-12) -> np.ndarray:
    """``int_a^r s^n / psi_radial(s) ds``."""
    return primitive(lambda s: s**n / psi_radial(s, n, alpha), a, r, tol)


def support_potential(uhat, a: float, n: int, tol: float = 1e-12) -> np.ndarray:
    """``int_a^uhat varphi_support(s) ds``."""
    return primitive(lambda s: varphi_support(s, n), a, uhat, tol)


def volume_potential(rho, b: float, n: int, alpha: float, tol: float = 1e-12) -> np.ndarray:
    """``int_b^rho sinh(s)^(n - alpha) ds``."""
    if abs(n - alpha + 1.0) <= 1e-15:
        return np.log(np.tanh(0.5 * np.asarray(rho)) / np.tanh(0.5 * b))
    return primitive(lambda s: np.sinh(s) ** (n - alpha), b, rho, tol)


@dataclass(frozen=True)
class KleinState:
    r: np.ndarray
    uhat: np.ndarray
    Khat: np.ndarray
    n: int

    @property
    def convex(self) -> bool:
        return bool(np.all(self.Khat > 0))

    def sigma_density(self) -> np.ndarray:
        """Density of the Gauss-image measure with respect to dtheta."""
        return self.Khat * self.r ** (self.n + 1) / self.uhat


def klein_project(state: RadialState, fields: GeometryFields | None = None) -> KleinState:
    """Project the radial graph to the Klein ball.

    ``r = tanh(rho)``, ``uhat = u / sqrt(1 + u^2)`` and the Euclidean Gauss
    curvature follows from ``K = Khat ((1 - r^2)/(1 - uhat^2))^((n+2)/2)``.
    """
    fields = fields if fields is not None else geometry_fields(state)
    n = state.grid.n
    r = np.tanh(state.rho)
    uhat = fields.u / np.sqrt(1.0 + fields.u**2)
    Khat = fields.K * ((1.0 - uhat**2) / (1.0 - r**2)) ** (0.5 * (n + 2))
    return KleinState(r=r, uhat=uhat, Khat=Khat, n=n)


def hyperbolic_support(uhat):
    """Inverse of ``uhat = u / sqrt(1 + u^2)``."""
    uhat = np.asarray(uhat)
    return uhat / np.sqrt(1.0 - uhat**2)


def euclidean_graph_curvature(state: RadialState) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(r, uhat, Khat)`` computed directly from ``r = tanh(rho)`` in R^{n+1}.

    Independent of the hyperbolic path: derivatives are taken of r itself.
    """
    grid = state.grid
    n = grid.n
    r = np.tanh(state.rho)
    grad, hess = sphere_derivatives(grid, r)
    grad_sq = np.sum(grad**2, axis=1)
    root = np.sqrt(r**2 + grad_sq)
    outer = grad[:, :, None] * grad[:, None, :]
    mat = -r[:, None, None] * hess + 2.0 * outer + (r**2)[:, None, None] * np.eye(n)
    det = mat[:, 0, 0] if n == 1 else mat[:, 0, 0] * mat[:, 1, 1] - mat[:, 0, 1] * mat[:, 1, 0]
    Khat = det / (root ** (n + 2) * r ** (2 * n - 2))
    uhat = r**2 / root
    return r, uhat, Khat


def klein_mismatch(state: RadialState, fields: GeometryFields | None = None) -> float:
    """Max relative gap between intrinsic K and the transformed Euclidean curvature."""
    fields = fields if fields is not None else geometry_fields(state)
    n = state.grid.n
    r, uhat, Khat = euclidean_graph_curvature(state)
    K_from_klein = Khat * ((1.0 - r**2) / (1.0 - uhat**2)) ** (0.5 * (n + 2))
    return float(np.max(np.abs(K_from_klein - fields.K) / np.abs(fields.K)))


def Q_functional(kstate: KleinState, fdata: PrescribedData, cfg: FunctionalConfig, alpha: float) -> float:
    """Lyapunov quantity of the unnormalized flow (non-decreasing along it).

    ``int Psi(r) f_tilde dtheta - int Omega(uhat) dsigma``; NaN when the
    projected surface is not convex.
    """
    if not kstate.convex:
        return float("nan")
    grid = fdata.grid
    n = kstate.n
    Psi = radial_potential(kstate.r, cfg.a, n, alpha, cfg.quad_tol)
    Omega = support_potential(kstate.uhat, cfg.a, n, cfg.quad_tol)
    return grid.integrate(Psi * fdata.f_tilde) - grid.integrate(Omega * kstate.sigma_density())


def J_functional(kstate: KleinState, grid, cfg: FunctionalConfig) -> float:
    """``int Omega(uhat) dsigma``, non-increasing along the normalized flow."""
    if not kstate.convex:
        return float("nan")
    Omega = support_potential(kstate.uhat, cfg.a, kstate.n, cfg.quad_tol)
    return grid.integrate(Omega * kstate.sigma_density())


def conserved_integral(state: RadialState, fdata: PrescribedData, cfg: FunctionalConfig,
                       alpha: float) -> float:
    """``int Omega(rho) / f dtheta`` with ``Omega(rho) = int_b^rho sinh^(n-alpha)``."""
    grid = state.grid
    Omega = volume_potential(state.rho, cfg.b, grid.n, alpha, cfg.quad_tol)
    return grid.integrate(Omega * fdata.f_tilde)


@dataclass(frozen=True)
class Residual:
    linf: float
    l2: float
    c_star: float

    def __iter__(self):
        return iter((self.linf, self.l2, self.c_star))


def residual(state: RadialState, fdata: PrescribedData, alpha: float, mode: str,
             fields: GeometryFields | None = None) -> Residual:
    """Residual of ``phi^alpha K = c f_tilde u`` normalized by ``max(f_tilde u)``.

    ``c = 1`` for the unnormalized problem; in normalized mode ``c`` is the
    node mean of ``phi^alpha K / (f_tilde u)``.
    """
    fields = fields if fields is not None else geometry_fields(state)
    lhs = fields.phi**alpha * fields.K
    target = fdata.f_tilde * fields.u
    c_star = float(np.mean(lhs / target)) if mode == NORMALIZED else 1.0
    R = lhs - c_star * target
    scale = float(np.max(target))
    grid = state.grid
    linf = float(np.max(np.abs(R))) / scale
    l2 = float(np.sqrt(grid.integrate(R**2) / grid.area)) / scale
    return Residual(linf, l2, c_star)


def ratio_spread(state: RadialState, fdata: PrescribedData, alpha: float,
                 fields: GeometryFields | None = None) -> float:
    """Relative spread (max - min)/mean of ``phi^alpha K / (f_tilde u)``."""
    fields = fields if fields is not None else geometry_fields(state)
    ratio = fields.phi**alpha * fields.K / (fdata.f_tilde * fields.u)
    return float((ratio.max() - ratio.min()) / ratio.mean())


def uniqueness_check(run_a, run_b) -> float:
    """Max node distance between the final profiles of two runs on one grid."""
    ga, gb = run_a.final.grid, run_b.final.grid
    if ga.n != gb.n or ga.N != gb.N:
        raise IncompatibleGridsError(f"grids differ: (n={ga.n}, N={ga.N}) vs (n={gb.n}, N={gb.N})")
    return float(np.max(np.abs(run_a.final.rho - run_b.final.rho)))


def ellipsoid_support(v1, e1: float, e2: float):
    """Support function of the Klein ellipsoid in terms of the normal's colatitude."""
    return np.sqrt(e1**2 - (e1**2 - e2**2) * np.sin(v1) ** 2)


def ellipsoid_J_quadrature(e1: float, e2: float, a: float, n: int, tol: float = 1e-12) -> float:
    """J of the Klein ellipsoid of revolution computed on the Gauss image.

    Integrates ``Omega(uhat(v1))`` against the round measure of the normal
    directions, ``2 pi sin(v1) dv1`` for n=2 and ``dv1`` over the full
    circle for n=1.  Independent of any radial-graph discretization.
    """
    def integrand(v):
        Om = support_potential(np.atleast_1d(ellipsoid_support(v, e1, e2)), a, n, tol)[0]
        return Om * (2.0 * np.pi * np.sin(v) if n == 2 else 1.0)

    upper = np.pi if n == 2 else 2.0 * np.pi
    breaks = [0.5 * np.pi] if n == 2 else [0.5 * np.pi, np.pi, 1.5 * np.pi]
    val, err = sp_integrate.quad(integrand, 0.0, upper, points=breaks, epsabs=0.0,
                                 epsrel=tol, limit=400)
    if not err <= 100 * tol * abs(val):
        raise QuadratureError(f"ellipsoid J quadrature reached only {err:.3g}")
    return float(val)
