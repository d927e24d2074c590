"""Prescribed Gauss curvature flows of convex radial graphs in hyperbolic space.

Typical use::

    from hyperflow import simple_problem, run
    problem = simple_problem(1, 256, 2.0, {"family": "constant", "c": 2.0},
                             {"shape": "round", "rho0": 0.3})
    result = run(problem)
"""

from .flow import (CurvatureBreakdown, DegenerateDenominator, FlowResult, StepFailure,
                   eta_normalized, rhs, run, stable_dt, step)
from .functionals import (FunctionalConfig, IncompatibleGridsError, KleinState, QuadratureError,
                          J_functional, Q_functional, conserved_integral, klein_mismatch,
                          klein_project, residual, uniqueness_check)
from .geometry import (GeometryFields, RadialState, StarShapeError, check_convex,
                       geometry_fields)
from .problem import (FlowProblem, InitialShape, NumericControls, PositivityError,
                      PrescribedData, make_fdata, simple_problem)
from .sphere_grid import SphereGrid, build_grid
from .trace import DiagnosticsTrace

__version__ = "0.1.0"

__all__ = [
    "CurvatureBreakdown", "DegenerateDenominator", "DiagnosticsTrace", "FlowProblem", "FlowResult",
    "FunctionalConfig", "GeometryFields", "IncompatibleGridsError", "InitialShape", "J_functional",
    "KleinState", "NumericControls", "PositivityError", "PrescribedData", "Q_functional",
    "QuadratureError", "RadialState", "SphereGrid", "StarShapeError", "StepFailure", "build_grid",
    "check_convex", "conserved_integral", "eta_normalized", "geometry_fields", "klein_mismatch",
    "klein_project", "make_fdata", "residual", "rhs", "run", "simple_problem", "stable_dt", "step",
    "uniqueness_check",
]
