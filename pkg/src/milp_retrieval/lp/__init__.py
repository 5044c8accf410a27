"""LP relaxation simplex and branch and bound."""

from .bnb import Feasibility, Limits, MilpSolution, MilpStatus, check_feasible, solve_milp
from .kernel import BACKEND
from .simplex import BasisStatus, LpSolution, LpStatus, solve_lp_relaxation

__all__ = [
    "BACKEND",
    "BasisStatus",
    "Feasibility",
    "Limits",
    "LpSolution",
    "LpStatus",
    "MilpSolution",
    "MilpStatus",
    "check_feasible",
    "solve_lp_relaxation",
    "solve_milp",
]
