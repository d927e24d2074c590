"""Discretization of S^1 and of axisymmetric fields on S^2.

For ``n == 1`` the nodes are ``theta_j = 2*pi*j/N`` on the periodic circle.
For ``n == 2`` the unknowns depend on the colatitude only; the nodes are
``theta_j = pi*j/(N-1)`` and include both poles.

Derivatives are 6th-order central differences.  On the circle the stencil
wraps around; on S^2 the field is extended across each pole by even
reflection, which is exact for smooth axisymmetric functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MIN_NODES = 16

# 6th-order central stencils, written as weights on symmetric differences
# so that constants are annihilated exactly.
_D1_WEIGHTS = np.array([45.0, -9.0, 1.0]) / 60.0
_D2_WEIGHTS = np.array([270.0, -27.0, 2.0]) / 180.0
_HALF_WIDTH = 3
STENCIL_ORDER = 6


def sphere_area(n: int) -> float:
    """Round measure |S^n| for n in {1, 2}."""
    return 2.0 * np.pi if n == 1 else 4.0 * np.pi


def clenshaw_curtis_weights(m: int) -> np.ndarray:
    """Weights of the (m+1)-point Clenshaw-Curtis rule on [-1, 1].

    Nodes are ``x_j = cos(pi*j/m)``; the rule is exact for polynomials of
    degree <= m.
    """
    theta = np.pi * np.arange(m + 1) / m
    w = np.ones(m + 1)
    for k in range(1, m // 2 + 1):
        b = 1.0 if 2 * k == m else 2.0
        w -= b * np.cos(2 * k * theta) / (4 * k * k - 1)
    c = np.full(m + 1, 2.0)
    c[0] = c[-1] = 1.0
    return c * w / m


@dataclass(frozen=True)
class SphereGrid:
    """Nodes, spacing and quadrature weights on S^n (n = 1 or axisymmetric n = 2).

    ``weights`` already contain the full round measure, so ``weights.sum()``
    is 2*pi (n=1) or 4*pi (n=2).
    """

    n: int
    N: int
    theta: np.ndarray
    spacing: float
    weights: np.ndarray
    _cot: np.ndarray = field(repr=False)

    @property
    def area(self) -> float:
        return sphere_area(self.n)

    @property
    def antipode(self) -> np.ndarray | None:
        """Index of the antipodal node, or None when it is not a node."""
        if self.n == 1:
            if self.N % 2:
                return None
            return (np.arange(self.N) + self.N // 2) % self.N
        return np.arange(self.N)[::-1]

    def d1(self, values: np.ndarray) -> np.ndarray:
        return d1(self, values)

    def d2(self, values: np.ndarray) -> np.ndarray:
        return d2(self, values)

    def integrate(self, values: np.ndarray) -> float:
        return integrate(self, values)

    def cot_times(self, first_derivative: np.ndarray, second_derivative: np.ndarray) -> np.ndarray:
        """``cot(theta) * d1`` for n=2, using the limit ``d2`` at the poles."""
        out = self._cot * first_derivative
        out[0] = second_derivative[0]
        out[-1] = second_derivative[-1]
        return out


def build_grid(n: int, N: int) -> SphereGrid:
    """Build the grid for S^1 (periodic) or axisymmetric S^2 (colatitude).

    Raises
    ------
    ValueError
        If ``n`` is not 1 or 2, ``N < 16``, or ``N`` is even for n=2.
    """
    if n not in (1, 2):
        raise ValueError(f"unsupported dimension n={n}; expected 1 or 2")
    N = int(N)
    if N < MIN_NODES:
        raise ValueError(f"N={N} is below the minimum of {MIN_NODES} nodes")
    if n == 1:
        spacing = 2.0 * np.pi / N
        theta = spacing * np.arange(N)
        weights = np.full(N, spacing)
        cot = np.zeros(N)
    else:
        if N % 2 == 0:
            raise ValueError(f"n=2 grids need an odd node count so the equator is a node; got N={N}")
        m = N - 1
        spacing = np.pi / m
        theta = spacing * np.arange(N)
        weights = 2.0 * np.pi * clenshaw_curtis_weights(m)
        cot = np.zeros(N)
        cot[1:-1] = np.cos(theta[1:-1]) / np.sin(theta[1:-1])
    for arr in (theta, weights, cot):
        arr.setflags(write=False)
    return SphereGrid(n=n, N=N, theta=theta, spacing=spacing, weights=weights, _cot=cot)


def _padded(grid: SphereGrid, values: np.ndarray) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if v.shape != (grid.N,):
        raise ValueError(f"field has shape {v.shape}, expected ({grid.N},)")
    k = _HALF_WIDTH
    if grid.n == 1:
        return np.concatenate((v[-k:], v, v[:k]))
    return np.concatenate((v[k:0:-1], v, v[-2:-k - 2:-1]))


def d1(grid: SphereGrid, values: np.ndarray) -> np.ndarray:
    """First derivative in theta (angle on S^1, colatitude on S^2)."""
    p = _padded(grid, values)
    N, k = grid.N, _HALF_WIDTH
    out = np.zeros(N)
    for s, c in enumerate(_D1_WEIGHTS, start=1):
        out += c * (p[k + s:k + s + N] - p[k - s:k - s + N])
    out /= grid.spacing
    if grid.n == 2:
        out[0] = 0.0
        out[-1] = 0.0
    return out


def d2(grid: SphereGrid, values: np.ndarray) -> np.ndarray:
    """Second derivative in theta (angle on S^1, colatitude on S^2)."""
    p = _padded(grid, values)
    N, k = grid.N, _HALF_WIDTH
    centre = p[k:k + N]
    out = np.zeros(N)
    for s, c in enumerate(_D2_WEIGHTS, start=1):
        out += c * ((p[k + s:k + s + N] - centre) + (p[k - s:k - s + N] - centre))
    return out / grid.spacing**2


def integrate(grid: SphereGrid, values: np.ndarray) -> float:
    """Integral over S^n with the round measure."""
    v = np.asarray(values, dtype=float)
    if v.shape != (grid.N,):
        raise ValueError(f"field has shape {v.shape}, expected ({grid.N},)")
    return float(np.dot(grid.weights, v))
