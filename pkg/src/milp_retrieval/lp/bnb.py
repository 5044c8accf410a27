"""Depth-first branch and bound over the simplex relaxation.

Nodes branch on the most fractional integral variable (lowest index on
ties).  The child nearer to the LP value is explored first, the up child
when the fraction is exactly one half.  A child is solved by dual simplex
from its parent's basis: the first child reuses the live tableau, the
second refactors the parent's stored basis.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass

import numpy as np

from ..milp import MilpInstance
from .simplex import LpStatus, Simplex

INT_TOL = 1e-6
PRUNE_TOL = 1e-6


class MilpStatus(enum.Enum):
    FEASIBLE = "Feasible"
    PROVEN_INFEASIBLE = "ProvenInfeasible"
    LIMIT_REACHED = "LimitReached"


class Feasibility(enum.Enum):
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    UNKNOWN = "Unknown"


@dataclass
class MilpSolution:
    status: MilpStatus
    x_int: np.ndarray | None
    obj: float | None
    nodes_explored: int
    optimal: bool = False
    root_bound: float | None = None  # LP relaxation objective at the root


@dataclass(frozen=True)
class Limits:
    max_nodes: int = 50_000
    max_seconds: float = 60.0
    max_iters: int = 50_000  # per LP solve


def _most_fractional(x: np.ndarray, integral: np.ndarray) -> int:
    frac = np.abs(x - np.round(x))
    frac = np.where(integral & (frac > INT_TOL), frac, -1.0)
    j = int(np.argmax(frac))
    return j if frac[j] > 0 else -1


def solve_milp(
    inst: MilpInstance,
    limits: Limits = Limits(),
    first_incumbent: bool = False,
) -> MilpSolution:
    """Branch and bound; with ``first_incumbent`` stop at the first integral point."""
    t0 = time.monotonic()
    integral = inst.integral_mask()
    lower = inst.lower.copy()
    upper = inst.upper.copy()
    lower[integral] = np.ceil(lower[integral] - INT_TOL)
    upper[integral] = np.floor(upper[integral] + INT_TOL)
    if limits.max_nodes <= 0:
        return MilpSolution(MilpStatus.LIMIT_REACHED, None, None, 0)
    if np.any(lower > upper):
        return MilpSolution(MilpStatus.PROVEN_INFEASIBLE, None, None, 1, optimal=True)

    sense = float(inst.sense)
    lp = Simplex(inst, lower, upper)
    best_x: np.ndarray | None = None
    best_obj = math.inf  # minimisation form
    nodes = 0
    root_bound = None
    # stack entries: (lower, upper, parent snapshot or None for the live tableau)
    stack: list[tuple[np.ndarray, np.ndarray, tuple | None]] = [(lower, upper, None)]
    first = True
    hit_limit = False
    while stack:
        if nodes >= limits.max_nodes or time.monotonic() - t0 > limits.max_seconds:
            hit_limit = True
            break
        lo, up, snap = stack.pop()
        nodes += 1
        if first:
            status = lp.solve(limits.max_iters)
            first = False
        else:
            status = lp.reoptimize(lo, up, snap, limits.max_iters)
        if status == LpStatus.INFEASIBLE:
            continue
        if status == LpStatus.UNBOUNDED:
            if nodes == 1:
                return MilpSolution(MilpStatus.LIMIT_REACHED, None, None, nodes)
            continue
        if status == LpStatus.LIMIT_REACHED:
            hit_limit = True
            continue
        x = lp.x[: inst.n_vars].copy()
        val = sense * float(inst.c @ x)
        if root_bound is None:
            root_bound = sense * val
        if val >= best_obj - PRUNE_TOL * max(1.0, abs(best_obj)):
            continue
        j = _most_fractional(x, integral)
        if j < 0:
            xr = x.copy()
            xr[integral] = np.round(xr[integral])
            best_x, best_obj = xr, sense * float(inst.c @ xr)
            if first_incumbent:
                break
            continue
        snap_here = lp.snapshot()
        down_up = (lo.copy(), up.copy())
        down_up[1][j] = math.floor(x[j])
        up_lo = (lo.copy(), up.copy())
        up_lo[0][j] = math.ceil(x[j])
        frac = x[j] - math.floor(x[j])
        near_up = frac >= 0.5
        # pushed last is explored first and reuses the live tableau
        if near_up:
            stack.append((down_up[0], down_up[1], snap_here))
            stack.append((up_lo[0], up_lo[1], None))
        else:
            stack.append((up_lo[0], up_lo[1], snap_here))
            stack.append((down_up[0], down_up[1], None))

    obj = None if best_x is None else sense * best_obj
    if best_x is not None and not hit_limit:
        done = not stack
        return MilpSolution(MilpStatus.FEASIBLE, best_x, obj, nodes, optimal=done, root_bound=root_bound)
    if best_x is None and not hit_limit:
        return MilpSolution(MilpStatus.PROVEN_INFEASIBLE, None, None, nodes, True, root_bound)
    return MilpSolution(MilpStatus.LIMIT_REACHED, best_x, obj, nodes, root_bound=root_bound)


def check_feasible(inst: MilpInstance, limits: Limits = Limits()) -> Feasibility:
    sol = solve_milp(inst, limits, first_incumbent=True)
    if sol.x_int is not None:
        return Feasibility.FEASIBLE
    if sol.status == MilpStatus.PROVEN_INFEASIBLE:
        return Feasibility.INFEASIBLE
    return Feasibility.UNKNOWN
