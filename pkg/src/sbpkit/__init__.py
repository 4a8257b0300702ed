"""Numerical toolkit for the Schrödinger–Bopp–Podolsky variational problem.

The public surface mirrors the mathematical pipeline: radial grids and
profiles, the screened nonlocal potential, the energy functional and its
fibering maps, extremal charge estimates, the two-solution solvers, and
the invariant verification suite.
"""

__version__ = "1.0.0"

from .energy import EnergyBreakdown, NehariVerdict, energy, nehari_classify
from .extremal import ExtremalEstimate, estimate_extremals, per_u_certificates
from .fibering import FiberCoeffs, FiberingReport, classify_fiber, fiber_coeffs
from .grids import ProblemParams, RadialFunction, RadialGrid, make_grid
from .potential import PotentialSolution, solve_potential
from .solve import SolutionRecord, SolveOptions, continue_branch, find_minimizer, mountain_pass
from .verify import VerifyReport, coercivity_certificate, run_suite

__all__ = [
    "EnergyBreakdown",
    "ExtremalEstimate",
    "FiberCoeffs",
    "FiberingReport",
    "NehariVerdict",
    "PotentialSolution",
    "ProblemParams",
    "RadialFunction",
    "RadialGrid",
    "SolutionRecord",
    "SolveOptions",
    "VerifyReport",
    "__version__",
    "classify_fiber",
    "coercivity_certificate",
    "continue_branch",
    "energy",
    "estimate_extremals",
    "fiber_coeffs",
    "find_minimizer",
    "make_grid",
    "mountain_pass",
    "nehari_classify",
    "per_u_certificates",
    "run_suite",
    "solve_potential",
]
