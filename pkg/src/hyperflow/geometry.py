"""Geometry of radial graphs ``rho(theta)`` in hyperbolic space H^{n+1}.

The ambient metric is ``d rho^2 + sinh(rho)^2 g_{S^n}``.  All tensors are
expressed in an orthonormal frame of the round sphere: for n=2 the frame is
(meridian, parallel) and, for axisymmetric fields, the sphere Hessian is
``diag(rho'', cot(theta) rho')``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sphere_grid import SphereGrid


class StarShapeError(ArithmeticError):
    """The support function is not positive; the graph is not star-shaped."""


@dataclass(frozen=True)
class RadialState:
    grid: SphereGrid
    rho: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float)
        if rho.shape != (self.grid.N,):
            raise ValueError(f"rho has shape {rho.shape}, expected ({self.grid.N},)")
        if not np.all(rho > 0):
            raise ValueError("radial function must be positive at every node")
        object.__setattr__(self, "rho", rho)


@dataclass(frozen=True)
class GeometryFields:
    phi: np.ndarray        # sinh(rho)
    dphi: np.ndarray       # cosh(rho)
    grad: np.ndarray       # (N, n) sphere gradient in the orthonormal frame
    hess: np.ndarray       # (N, n, n) sphere Hessian
    w: np.ndarray
    u: np.ndarray
    g: np.ndarray          # (N, n, n) induced metric
    h: np.ndarray          # (N, n, n) second fundamental form
    W: np.ndarray          # (N, n, n) Weingarten matrix h_i^j
    kappa: np.ndarray      # (N, n) ascending principal curvatures
    K: np.ndarray
    H: np.ndarray

    @property
    def grad_norm(self) -> np.ndarray:
        return np.sqrt(np.sum(self.grad**2, axis=1))

    @property
    def convex(self) -> bool:
        return bool(np.all(self.kappa > 0))

    @property
    def star_shaped(self) -> bool:
        return bool(np.all(self.u > 0))

    def theta_speed(self, alpha: float, f: np.ndarray) -> np.ndarray:
        """Normal speed ``phi^alpha f K`` of the unnormalized flow."""
        return self.phi**alpha * f * self.K


def sphere_derivatives(grid: SphereGrid, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gradient ``(N, n)`` and Hessian ``(N, n, n)`` of an (axisymmetric) field."""
    v1 = grid.d1(values)
    v2 = grid.d2(values)
    N, n = grid.N, grid.n
    grad = np.zeros((N, n))
    hess = np.zeros((N, n, n))
    grad[:, 0] = v1
    hess[:, 0, 0] = v2
    if n == 2:
        hess[:, 1, 1] = grid.cot_times(v1, v2)
    return grad, hess


def weingarten(phi, dphi, grad, hess):
    """Metric, second fundamental form and Weingarten matrix of a radial graph.

    Pointwise evaluation of the radial-graph formulas for ``g_ij``, ``h_ij``
    and ``h_i^j`` from the sphere gradient/Hessian of rho.  Shapes follow
    :func:`sphere_derivatives`.
    """
    n = grad.shape[1]
    eye = np.eye(n)
    grad_sq = np.sum(grad**2, axis=1)
    root = np.sqrt(phi**2 + grad_sq)
    outer = grad[:, :, None] * grad[:, None, :]
    g = phi[:, None, None] ** 2 * eye + outer
    numer = (-phi[:, None, None] * hess + 2.0 * dphi[:, None, None] * outer
             + (phi**2 * dphi)[:, None, None] * eye)
    h = numer / root[:, None, None]
    proj = eye - outer / (root**2)[:, None, None]
    W = np.matmul(numer, proj) / (phi**2 * root)[:, None, None]
    return g, h, W


def eigenvalues_closed_form(W: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of 1x1 or 2x2 matrices with real spectrum."""
    n = W.shape[1]
    if n == 1:
        return W[:, :, 0].copy()
    tr = W[:, 0, 0] + W[:, 1, 1]
    half_gap = np.sqrt(np.maximum(0.25 * (W[:, 0, 0] - W[:, 1, 1]) ** 2 + W[:, 0, 1] * W[:, 1, 0], 0.0))
    return np.stack((0.5 * tr - half_gap, 0.5 * tr + half_gap), axis=1)


def _det(W: np.ndarray) -> np.ndarray:
    if W.shape[1] == 1:
        return W[:, 0, 0].copy()
    return W[:, 0, 0] * W[:, 1, 1] - W[:, 0, 1] * W[:, 1, 0]


def geometry_fields(state: RadialState, general: bool = False) -> GeometryFields:
    """All radial-graph quantities at every node.

    The default path exploits the diagonal structure of 1D and axisymmetric
    tensors; ``general=True`` forms the full Weingarten matrix instead.

    Raises
    ------
    StarShapeError
        If the support function is not positive somewhere, which can only
        happen when rho or its derivatives are non-finite.
    """
    rho = state.rho
    phi = np.sinh(rho)
    dphi = np.cosh(rho)
    grid = state.grid
    if grid.n == 1 and not general:
        # same formulas with 1x1 tensors, kept scalar for speed
        r1 = grid.d1(rho)
        r2 = grid.d2(rho)
        s2 = phi**2 + r1**2
        root = np.sqrt(s2)
        w = root / phi
        u = phi / w
        if not np.all(u > 0):
            raise StarShapeError("support function is not positive; radial graph is degenerate")
        h11 = (-phi * r2 + 2.0 * dphi * r1**2 + phi**2 * dphi) / root
        K = h11 / s2
        grad = r1[:, None]
        hess = r2[:, None, None]
        g = s2[:, None, None]
        h = h11[:, None, None]
        W = K[:, None, None]
        return GeometryFields(phi=phi, dphi=dphi, grad=grad, hess=hess, w=w, u=u,
                              g=g, h=h, W=W, kappa=K[:, None], K=K, H=K.copy())
    grad, hess = sphere_derivatives(grid, rho)
    grad_sq = np.sum(grad**2, axis=1)
    w = np.sqrt(1.0 + grad_sq / phi**2)
    u = phi / w
    if not np.all(u > 0):
        raise StarShapeError("support function is not positive; radial graph is degenerate")
    if general:
        g, h, W = weingarten(phi, dphi, grad, hess)
        kappa = eigenvalues_closed_form(W)
        K = _det(W)
        H = np.trace(W, axis1=1, axis2=2)
    else:
        # axisymmetric: grad = (rho', 0) and hess is diagonal, so every tensor is diagonal
        r1 = grad[:, 0]
        s2 = phi**2 + grad_sq
        root = np.sqrt(s2)
        h11 = (-phi * hess[:, 0, 0] + 2.0 * dphi * r1**2 + phi**2 * dphi) / root
        h22 = (-phi * hess[:, 1, 1] + phi**2 * dphi) / root
        k1 = h11 / s2
        k2 = h22 / phi**2
        g = np.zeros((grid.N, 2, 2))
        g[:, 0, 0] = s2
        g[:, 1, 1] = phi**2
        h = np.zeros((grid.N, 2, 2))
        h[:, 0, 0] = h11
        h[:, 1, 1] = h22
        W = np.zeros((grid.N, 2, 2))
        W[:, 0, 0] = k1
        W[:, 1, 1] = k2
        kappa = np.stack((np.minimum(k1, k2), np.maximum(k1, k2)), axis=1)
        K = k1 * k2
        H = k1 + k2
    return GeometryFields(phi=phi, dphi=dphi, grad=grad, hess=hess, w=w, u=u,
                          g=g, h=h, W=W, kappa=kappa, K=K, H=H)


def check_convex(fields: GeometryFields) -> tuple[bool, float]:
    """Whether all principal curvatures are positive, with the minimum as margin."""
    margin = float(np.min(fields.kappa))
    return margin > 0, margin


def principal_radii_trace(fields: GeometryFields) -> np.ndarray:
    """``K * tr(W^{-1})``, i.e. the sum over i of prod_{j != i} kappa_j."""
    if fields.kappa.shape[1] == 1:
        return np.ones_like(fields.K)
    return fields.kappa[:, 0] + fields.kappa[:, 1]


def axisymmetric_curvatures(state: RadialState) -> tuple[np.ndarray, np.ndarray]:
    """Meridian and parallel curvatures of an axisymmetric graph (n=2).

    Closed-form specialisation used to cross-check the general Weingarten
    computation.
    """
    grid = state.grid
    if grid.n != 2:
        raise ValueError("axisymmetric curvatures need an n=2 grid")
    rho = state.rho
    phi, dphi = np.sinh(rho), np.cosh(rho)
    r1, r2 = grid.d1(rho), grid.d2(rho)
    cot_r1 = grid.cot_times(r1, r2)
    s2 = phi**2 + r1**2
    root = np.sqrt(s2)
    meridian = (-phi * r2 + 2.0 * dphi * r1**2 + phi**2 * dphi) / (root * s2)
    parallel = (-phi * cot_r1 + phi**2 * dphi) / (root * phi**2)
    return meridian, parallel


def gradient_bound(rho_min: float, rho_max: float) -> float:
    """Upper bound on |grad rho| for convex graphs with rho in [rho_min, rho_max]."""
    return float(np.sinh(rho_max) * np.sqrt(np.expm1(4.0 * rho_max * np.tanh(rho_min))))
