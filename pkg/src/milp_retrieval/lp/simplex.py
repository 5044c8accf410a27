"""Dense bounded-variable simplex for LP relaxations.

Every row is brought to ``a_i x + s_i = b_i`` with a slack ``s_i >= 0``:
GE rows are negated first and EQ rows get a slack fixed at ``[0, 0]``.  The
tableau holds ``B^-1 [A I art | b]`` plus a reduced-cost row, so the last
column carries ``B^-1 b``.  Nonbasic variables sit at a finite bound, or at
zero when free.

Phase 1 adds an artificial only on rows whose slack is out of bounds at the
starting point and minimises their sum.  Pricing is Dantzig's rule; after
``DEGENERATE_SWITCH`` consecutive degenerate pivots the solver switches to
Bland's rule for the rest of the solve, which guarantees termination.

A bounded dual simplex re-optimises after bound changes (branch-and-bound
warm starts).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch
from ..milp import INF, MilpInstance, RowSense
from . import kernel

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PHASE1_TOL = 1e-7
DEGENERATE_SWITCH = 50

# nonbasic/basic state codes
AT_LOWER, BASIC, AT_UPPER, ZERO = 0, 1, 2, 3


class LpStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    LIMIT_REACHED = "LimitReached"


class BasisStatus(enum.IntEnum):
    AT_LOWER = 0
    BASIC = 1
    AT_UPPER = 2
    ZERO = 3


@dataclass
class LpSolution:
    status: LpStatus
    x: np.ndarray
    obj: float
    basis: np.ndarray  # BasisStatus codes per structural variable
    y: np.ndarray  # d obj / d b_i in the instance's objective sense
    activity: np.ndarray
    reduced_costs: np.ndarray  # d obj / d x_j for nonbasic j, same sense
    iterations: int = 0

    def dual_objective(self, inst: MilpInstance) -> float:
        """``b.y + sum_j rc_j x_j``; equals ``obj`` at an optimal basis."""
        return float(inst.b @ self.y + self.reduced_costs @ self.x)


class Simplex:
    """Tableau state for one LP; reusable across bound changes."""

    def __init__(self, inst: MilpInstance, lower=None, upper=None):
        n, m = inst.n_vars, inst.n_cons
        self.inst = inst
        self.n, self.m = n, m
        self.row_sign = np.where(inst.senses == RowSense.GE, -1.0, 1.0)
        self.Abar = inst.A.toarray() * self.row_sign[:, None]
        self.bbar = inst.b * self.row_sign
        self.cost = float(inst.sense) * inst.c
        slack_ub = np.where(inst.senses == RowSense.EQ, 0.0, INF)
        lo = inst.lower if lower is None else np.asarray(lower, dtype=float)
        up = inst.upper if upper is None else np.asarray(upper, dtype=float)
        self.lb = np.concatenate((lo, np.zeros(m)))
        self.ub = np.concatenate((up, slack_ub))
        self.art_rows = np.empty(0, dtype=np.int64)
        self.art_sign = np.empty(0)
        self.iterations = 0
        self.bland = False
        self.T: np.ndarray | None = None
        self.warm = False  # tableau holds an optimal phase-2 basis

    # ------------------------------------------------------------ setup
    @property
    def ncols(self) -> int:
        return self.n + self.m + self.art_rows.size

    def _columns(self) -> np.ndarray:
        """Full constraint matrix ``[Abar I art]``."""
        m = self.m
        art = np.zeros((m, self.art_rows.size))
        art[self.art_rows, np.arange(self.art_rows.size)] = self.art_sign
        return np.hstack((self.Abar, np.eye(m), art))

    def _nonbasic_value(self, j: int) -> tuple[int, float]:
        if self.lb[j] > -INF:
            return AT_LOWER, self.lb[j]
        if self.ub[j] < INF:
            return AT_UPPER, self.ub[j]
        return ZERO, 0.0

    def _cold_start(self) -> None:
        n, m = self.n, self.m
        x = np.zeros(n + m)
        state = np.full(n + m, BASIC, dtype=np.int8)
        for j in range(n):
            state[j], x[j] = self._nonbasic_value(j)
        slack = self.bbar - self.Abar @ x[:n]
        s_val = np.clip(slack, 0.0, self.ub[n:])
        resid = slack - s_val
        bad = np.flatnonzero(np.abs(resid) > FEAS_TOL)
        k = bad.size
        # on a bad row the slack sits at the bound it overshot and the
        # artificial a_i = |resid_i| (column sign(resid_i) e_i) is basic
        state[n + bad] = np.where(resid[bad] > 0, AT_UPPER, AT_LOWER)
        x[n:] = s_val
        self.art_rows = bad.astype(np.int64)
        self.art_sign = np.where(resid[bad] > 0, 1.0, -1.0)
        self.lb = np.concatenate((self.lb[: n + m], np.zeros(k)))
        self.ub = np.concatenate((self.ub[: n + m], np.full(k, INF)))
        self.state = np.concatenate((state, np.full(k, BASIC, dtype=np.int8)))
        self.x = np.concatenate((x, np.abs(resid[bad])))
        self.basis = np.arange(n, n + m, dtype=np.int64)
        self.basis[bad] = n + m + np.arange(k)
        self._refactor()

    def _refactor(self) -> None:
        """Rebuild the tableau from the current basis."""
        m = self.m
        M = self._columns()
        Bm = M[:, self.basis]
        rhs = np.hstack((M, self.bbar[:, None]))
        T = np.empty((m + 1, self.ncols + 1))
        T[:m] = np.linalg.solve(Bm, rhs)
        self.T = T
        nb = self.state != BASIC
        nb_idx = np.flatnonzero(nb)
        self.x[self.basis] = T[:m, -1] - T[:m, nb_idx] @ self.x[nb_idx]

    def _set_costs(self, cost_full: np.ndarray) -> None:
        T, m = self.T, self.m
        T[m, :-1] = cost_full - cost_full[self.basis] @ T[:m, :-1]
        T[m, -1] = -(cost_full[self.basis] @ T[:m, -1])

    def _phase_costs(self, phase: int) -> np.ndarray:
        cost = np.zeros(self.ncols)
        if phase == 1:
            cost[self.n + self.m :] = 1.0
        else:
            cost[: self.n] = self.cost
        return cost

    # --------------------------------------------------------- primitives
    def _pivot(self, r: int, q: int) -> None:
        kernel.pivot(self.T, r, q)
        self.iterations += 1

    def _choose_entering(self) -> tuple[int, int]:
        """Entering column and its direction (+1 up, -1 down); (-1, 0) if optimal."""
        d = self.T[self.m, :-1]
        st = self.state
        movable = self.lb < self.ub
        can_up = movable & ((st == AT_LOWER) | (st == ZERO)) & (d < -OPT_TOL)
        can_dn = movable & ((st == AT_UPPER) | (st == ZERO)) & (d > OPT_TOL)
        elig = can_up | can_dn
        if not elig.any():
            return -1, 0
        if self.bland:
            q = int(np.argmax(elig))
        else:
            score = np.where(elig, np.abs(d), -1.0)
            q = int(np.argmax(score))
        return q, (1 if can_up[q] else -1)

    def _ratio_test(self, q: int, direction: int) -> tuple[int, float, bool]:
        """Leaving row, step length, and whether the leaver goes to its upper bound.

        Row ``-1`` means the entering variable flips to its other bound;
        step ``inf`` means unbounded.
        """
        m = self.m
        alpha = direction * self.T[:m, q]
        xb = self.x[self.basis]
        lb = self.lb[self.basis]
        ub = self.ub[self.basis]
        with np.errstate(divide="ignore", invalid="ignore"):
            dec = alpha > PIVOT_TOL
            inc = alpha < -PIVOT_TOL
            ratio = np.full(m, INF)
            ratio[dec] = (xb[dec] - lb[dec]) / alpha[dec]
            ratio[inc] = (ub[inc] - xb[inc]) / -alpha[inc]
        ratio = np.maximum(ratio, 0.0)
        flip = self.ub[q] - self.lb[q]
        theta = ratio.min() if m else INF
        if flip <= theta:
            return -1, flip, False
        if theta == INF:
            return -1, INF, False
        ties = np.flatnonzero(ratio <= theta)
        if self.bland:
            r = int(ties[np.argmin(self.basis[ties])])
        else:
            r = int(ties[np.argmax(np.abs(alpha[ties]))])
        return r, theta, bool(inc[r])

    def _primal(self, max_iters: int) -> LpStatus:
        m = self.m
        degenerate_run = 0
        while True:
            q, direction = self._choose_entering()
            if q < 0:
                return LpStatus.OPTIMAL
            if self.iterations >= max_iters:
                return LpStatus.LIMIT_REACHED
            r, theta, to_upper = self._ratio_test(q, direction)
            if theta == INF:
                return LpStatus.UNBOUNDED
            step = direction * theta
            if step != 0.0:
                self.x[self.basis] -= step * self.T[:m, q]
                self.x[q] += step
            if r < 0:
                self.state[q] = AT_UPPER if direction > 0 else AT_LOWER
                self.iterations += 1
            else:
                leave = self.basis[r]
                self.state[leave] = AT_UPPER if to_upper else AT_LOWER
                self.x[leave] = self.ub[leave] if to_upper else self.lb[leave]
                self.state[q] = BASIC
                self.basis[r] = q
                self._pivot(r, q)
            if theta <= FEAS_TOL:
                degenerate_run += 1
                if degenerate_run >= DEGENERATE_SWITCH:
                    self.bland = True
            else:
                degenerate_run = 0

    def _dual(self, max_iters: int) -> LpStatus | None:
        """Dual simplex from a dual-feasible basis.

        Returns OPTIMAL when primal feasibility is restored, INFEASIBLE when a
        violated row has no eligible entering column, LIMIT_REACHED, or None
        if the starting basis is not dual feasible.
        """
        m = self.m
        T = self.T
        d = T[m, :-1]
        st = self.state
        movable = self.lb < self.ub
        bad_lo = movable & (st == AT_LOWER) & (d < -OPT_TOL)
        bad_up = movable & (st == AT_UPPER) & (d > OPT_TOL)
        bad_free = movable & (st == ZERO) & (np.abs(d) > OPT_TOL)
        if (bad_lo | bad_up | bad_free).any():
            return None
        while True:
            xb = self.x[self.basis]
            lb = self.lb[self.basis]
            ub = self.ub[self.basis]
            infeas = np.maximum(lb - xb, xb - ub)
            r = int(np.argmax(infeas))
            if m == 0 or infeas[r] <= FEAS_TOL:
                return LpStatus.OPTIMAL
            if self.iterations >= max_iters:
                return LpStatus.LIMIT_REACHED
            below = xb[r] < lb[r]
            target = lb[r] if below else ub[r]
            row = T[r, :-1]
            d = T[m, :-1]
            st = self.state
            movable = self.lb < self.ub
            nb = (st != BASIC) & movable
            # x_Br = beta_r - sum_j row_j x_j: to raise it, raise x_j with row_j < 0
            # (or lower x_j with row_j > 0); mirror for lowering.
            sgn = -1.0 if below else 1.0
            up_ok = nb & ((st == AT_LOWER) | (st == ZERO)) & (sgn * row > PIVOT_TOL)
            dn_ok = nb & ((st == AT_UPPER) | (st == ZERO)) & (sgn * row < -PIVOT_TOL)
            elig = up_ok | dn_ok
            if not elig.any():
                return LpStatus.INFEASIBLE
            idx = np.flatnonzero(elig)
            ratios = np.abs(d[idx]) / np.abs(row[idx])
            best = ratios.min()
            ties = idx[ratios <= best + 1e-12]
            q = int(ties[np.argmax(np.abs(row[ties]))])
            delta = (xb[r] - target) / T[r, q]
            self.x[self.basis] -= delta * T[:m, q]
            self.x[q] += delta
            leave = self.basis[r]
            self.state[leave] = AT_LOWER if below else AT_UPPER
            self.x[leave] = target
            self.state[q] = BASIC
            self.basis[r] = q
            self._pivot(r, q)

    def _recompute_basics(self) -> None:
        m = self.m
        nb_idx = np.flatnonzero(self.state != BASIC)
        self.x[self.basis] = self.T[:m, -1] - self.T[:m, nb_idx] @ self.x[nb_idx]

    # ------------------------------------------------------------- driver
    def solve(self, max_iters: int = 50_000) -> LpStatus:
        """Cold two-phase solve."""
        self.iterations = 0
        self.warm = False
        self.bland = False
        self._cold_start()
        if self.art_rows.size:
            self._set_costs(self._phase_costs(1))
            status = self._primal(max_iters)
            if status == LpStatus.LIMIT_REACHED:
                return status
            self._recompute_basics()
            art = self.x[self.n + self.m :]
            if art.sum() > PHASE1_TOL * max(1.0, float(np.abs(self.bbar).max(initial=0.0))):
                return LpStatus.INFEASIBLE
            self.ub[self.n + self.m :] = 0.0
            a_idx = self.n + self.m + np.arange(self.art_rows.size)
            nb_art = a_idx[self.state[a_idx] != BASIC]
            self.state[nb_art] = AT_LOWER
            self.x[a_idx] = np.where(self.state[a_idx] == BASIC, self.x[a_idx], 0.0)
        self.bland = False
        self._set_costs(self._phase_costs(2))
        status = self._primal(max_iters)
        self._recompute_basics()
        self.warm = status == LpStatus.OPTIMAL
        return status

    def snapshot(self) -> tuple:
        return (self.art_rows.copy(), self.art_sign.copy(), self.basis.copy(), self.state.copy())

    def reoptimize(self, lower: np.ndarray, upper: np.ndarray, snap: tuple | None = None,
                   max_iters: int = 50_000) -> LpStatus:
        """Re-solve after changing structural bounds, warm-starting from the
        current basis or from ``snap``; falls back to a cold solve."""
        n = self.n
        if snap is not None:
            art_rows, art_sign, basis, state = snap
            self.art_rows, self.art_sign = art_rows.copy(), art_sign.copy()
            k = art_rows.size
            self.lb = np.concatenate((self.lb[: n + self.m], np.zeros(k)))
            self.ub = np.concatenate((self.ub[: n + self.m], np.zeros(k)))
            self.basis, self.state = basis.copy(), state.copy()
            self.x = np.zeros(self.ncols)
        self.lb[:n] = lower
        self.ub[:n] = upper
        if np.any(self.lb > self.ub):
            return LpStatus.INFEASIBLE
        if self.T is None or (snap is None and not self.warm):
            return self.solve(max_iters)
        self.iterations = 0
        self.warm = False
        self.bland = False
        # nonbasic variables move to their (possibly new) bound
        for j in np.flatnonzero(self.state != BASIC):
            st = self.state[j]
            if st == AT_LOWER and self.lb[j] == -INF or st == AT_UPPER and self.ub[j] == INF:
                st = ZERO if self.lb[j] == -INF and self.ub[j] == INF else (
                    AT_LOWER if self.lb[j] > -INF else AT_UPPER)
                self.state[j] = st
            self.x[j] = self.lb[j] if st == AT_LOWER else (self.ub[j] if st == AT_UPPER else 0.0)
        try:
            if snap is not None:
                self._refactor()
                self._set_costs(self._phase_costs(2))
            else:
                self._recompute_basics()
        except np.linalg.LinAlgError:
            return self.solve(max_iters)
        status = self._dual(max_iters)
        if status is None or status == LpStatus.LIMIT_REACHED:
            return self.solve(max_iters)
        if status == LpStatus.INFEASIBLE:
            return status
        status = self._primal(max_iters)
        self._recompute_basics()
        self.warm = status == LpStatus.OPTIMAL
        return status

    # ------------------------------------------------------------ results
    def solution(self, status: LpStatus) -> LpSolution:
        inst, n, m = self.inst, self.n, self.m
        x = self.x[:n].copy()
        sense = float(inst.sense)
        basis = self.state[:n].copy()  # state codes coincide with BasisStatus
        if self.T is not None and status == LpStatus.OPTIMAL:
            d = self.T[m, :-1]
            y = sense * self.row_sign * (-d[n : n + m])
            rc = sense * d[:n] * (self.state[:n] != BASIC)
        else:
            y = np.zeros(m)
            rc = np.zeros(n)
        activity = inst.A @ x
        obj = float(inst.c @ x) if status != LpStatus.INFEASIBLE else float("nan")
        return LpSolution(status, x, obj, basis, y, activity, rc, self.iterations)


def solve_lp_relaxation(
    inst: MilpInstance, max_iters: int = 50_000, lower=None, upper=None
) -> LpSolution:
    """Solve the LP relaxation of ``inst`` (integrality dropped)."""
    if lower is not None and len(lower) != inst.n_vars:
        raise DimensionMismatch("lower bound vector length differs from n_vars")
    if upper is not None and len(upper) != inst.n_vars:
        raise DimensionMismatch("upper bound vector length differs from n_vars")
    lp = Simplex(inst, lower, upper)
    if np.any(lp.lb > lp.ub):
        return LpSolution(
            LpStatus.INFEASIBLE, np.clip(np.zeros(inst.n_vars), lp.lb[: inst.n_vars], None),
            float("nan"), np.zeros(inst.n_vars, np.int8), np.zeros(inst.n_cons),
            np.zeros(inst.n_cons), np.zeros(inst.n_vars),
        )
    status = lp.solve(max_iters)
    return lp.solution(status)
