"""
Dense two-phase tableau simplex.

Problems handled here are tiny (a few hundred columns at most), so the
solver favours robustness: rows are scaled to unit infinity norm, pricing
is Dantzig's rule with lowest-index tie-breaking, and after a run of
degenerate pivots it falls back to Bland's rule for the rest of the phase.
The ratio test is Harris' two-pass rule, and the tableau is rebuilt from
the original rows every few pivots and before any verdict, so round-off
never decides between optimal and unbounded.
"""

import logging
from typing import NamedTuple

import numpy as np

from core.errors import InvalidInputError
from core.linprog.schema import LpProblem, LpSolution

logger = logging.getLogger(__name__)

FEAS_TOL = 1e-8
PIVOT_TOL = 1e-10
# ratio-test slack on the scaled rows
HARRIS_TOL = 1e-11
DEGENERATE_RUN = 50
REFACTOR_EVERY = 25


class _Tableau:
    """Constraint rows [A | b] plus the objective row, with the basis."""

    def __init__(self, a: np.ndarray, b: np.ndarray, basis: list[int]):
        m, n = a.shape
        self.t = np.zeros((m + 1, n + 1))
        self.t[:m, :n] = a
        self.t[:m, n] = b
        self.basis = list(basis)
        # original rows, for refactorization
        self.a = a.copy()
        self.b = b.copy()
        self.c = np.zeros(n)

    @property
    def m(self) -> int:
        return self.t.shape[0] - 1

    @property
    def n(self) -> int:
        return self.t.shape[1] - 1

    def set_objective(self, c: np.ndarray) -> None:
        """Loads ``maximize c @ x`` and prices out the current basis."""
        self.c = np.asarray(c, dtype=float).copy()
        self.t[-1, :] = 0.0
        self.t[-1, : self.n] = -self.c
        for i, j in enumerate(self.basis):
            coef = self.t[-1, j]
            if coef != 0.0:
                self.t[-1, :] -= coef * self.t[i, :]

    def pivot(self, row: int, col: int) -> None:
        t = self.t
        t[row, :] /= t[row, col]
        factors = t[:, col].copy()
        factors[row] = 0.0
        t -= np.outer(factors, t[row, :])
        t[:, col] = 0.0
        t[row, col] = 1.0
        self.basis[row] = col

    def refactor(self) -> bool:
        """
        Rebuilds every row as B^-1 [A | b] from the original data and re-prices
        the objective. Returns False when the basis matrix is singular.
        """
        if self.m:
            try:
                rows = np.linalg.solve(self.a[:, self.basis], np.column_stack([self.a, self.b]))
            except np.linalg.LinAlgError:
                return False
            if not np.all(np.isfinite(rows)):
                return False
            rows[:, self.basis] = np.eye(self.m)
            self.t[: self.m, :] = rows
        self.set_objective(self.c)
        return True

    def min_value(self) -> float:
        return float(self.t[: self.m, -1].min(initial=0.0))

    def clip_values(self) -> None:
        np.maximum(self.t[: self.m, -1], 0.0, out=self.t[: self.m, -1])

    def delete_row(self, row: int) -> None:
        # the basic column is an artificial, a unit vector on its own original row
        original = int(np.argmax(np.abs(self.a[:, self.basis[row]])))
        self.t = np.delete(self.t, row, axis=0)
        self.a = np.delete(self.a, original, axis=0)
        self.b = np.delete(self.b, original)
        del self.basis[row]

    def keep_columns(self, n_keep: int) -> None:
        self.t = np.hstack([self.t[:, :n_keep], self.t[:, -1:]])
        self.a = self.a[:, :n_keep]
        self.c = self.c[:n_keep]

    def values(self) -> np.ndarray:
        x = np.zeros(self.n)
        for i, j in enumerate(self.basis):
            x[j] = self.t[i, -1]
        return x


class _StandardForm(NamedTuple):
    """max cost @ x' s.t. a x' = b, x' >= 0, with x = shift + expand @ x'[:n_struct]"""
    a: np.ndarray
    b: np.ndarray
    basis: list[int]
    n_struct: int
    n_real: int
    cost: np.ndarray
    shift: np.ndarray
    expand: np.ndarray


class SimplexSolver:
    """
    Solver for LpProblem instances.
    """

    def __init__(
        self,
        feas_tol: float = FEAS_TOL,
        pivot_tol: float = PIVOT_TOL,
        max_iter: int | None = None,
        refactor_every: int = REFACTOR_EVERY,
    ):
        self.feas_tol = feas_tol
        self.pivot_tol = pivot_tol
        self.max_iter = max_iter
        self.refactor_every = max(1, refactor_every)

    def solve(self, problem: LpProblem) -> LpSolution:
        """
        Solves ``problem`` to optimality, or reports why it cannot.

        An optimal point is checked against the original rows. If the check
        fails the problem is solved again with a refactorization after every pivot.

        Args:
            problem: The linear program

        Returns:
            LpSolution with status optimal, infeasible, unbounded or iteration-limit

        Raises:
            InvalidInputError: If dimensions are inconsistent or entries not finite
        """
        self._validate(problem)
        form = self._standard_form(problem)
        if isinstance(form, LpSolution):
            return form

        solution = self._solve_form(problem, form, self.refactor_every)
        if solution is None:
            logger.debug("simplex lost accuracy, solving again with a refactorization per pivot")
            solution = self._solve_form(problem, form, 1)
        if solution is None:
            logger.warning("simplex could not reach a point feasible within %.1e", self.feas_tol)
            return LpSolution(status="iteration-limit", iterations=self._budget(form))
        return solution

    def satisfies(self, problem: LpProblem, x: np.ndarray) -> bool:
        """True when ``x`` meets every row and bound of ``problem`` within the feasibility tolerance."""
        a_eq, b_eq = problem.equalities()
        a_ub, b_ub = problem.inequalities()
        lower = problem.bounds()
        if b_eq.size:
            tol = self.feas_tol * (1.0 + np.max(np.abs(b_eq)))
            if np.max(np.abs(a_eq @ x - b_eq)) > tol:
                return False
        if b_ub.size:
            tol = self.feas_tol * (1.0 + np.max(np.abs(b_ub)))
            if np.max(a_ub @ x - b_ub) > tol:
                return False
        return bool(np.all(x >= lower - 1e-10))

    def _standard_form(self, problem: LpProblem) -> _StandardForm | LpSolution:
        n = problem.n_vars
        a_eq, b_eq = problem.equalities()
        a_ub, b_ub = problem.inequalities()
        lower = problem.bounds()

        # x = lower + x'   (finite bound),   x = x+ - x-   (free)
        free = np.isneginf(lower)
        shift = np.where(free, 0.0, lower)
        identity = np.eye(n)
        expand = np.hstack([identity, -identity[:, free]])
        n_struct = expand.shape[1]

        rows_eq = a_eq @ expand
        rhs_eq = b_eq - a_eq @ shift
        rows_ub = a_ub @ expand
        rhs_ub = b_ub - a_ub @ shift

        m_eq, m_ub = rows_eq.shape[0], rows_ub.shape[0]
        a = np.zeros((m_eq + m_ub, n_struct + m_ub))
        a[:m_eq, :n_struct] = rows_eq
        a[m_eq:, :n_struct] = rows_ub
        a[m_eq:, n_struct:] = np.eye(m_ub)
        b = np.concatenate([rhs_eq, rhs_ub])
        is_ub = np.concatenate([np.zeros(m_eq, bool), np.ones(m_ub, bool)])

        # scale on structural coefficients only so slacks keep a unit entry
        keep = []
        for i in range(a.shape[0]):
            norm = np.max(np.abs(a[i, :n_struct])) if n_struct else 0.0
            if norm <= self.pivot_tol:
                bad = b[i] < -self.feas_tol if is_ub[i] else abs(b[i]) > self.feas_tol
                if bad:
                    return LpSolution(status="infeasible")
                continue
            a[i, :n_struct] /= norm
            b[i] /= norm
            keep.append(i)
        a, b, is_ub = a[keep], b[keep], is_ub[keep]
        slack_cols = [n_struct + (i - m_eq) for i in keep if i >= m_eq]
        a = a[:, list(range(n_struct)) + slack_cols]
        n_real = a.shape[1]

        flip = b < 0
        a[flip] *= -1.0
        b[flip] *= -1.0

        # slack is basic where its row kept a +1 coefficient; others get an artificial
        basis: list[int] = []
        artificial_rows = []
        slack_iter = iter(range(n_struct, n_real))
        for i in range(a.shape[0]):
            if is_ub[i]:
                col = next(slack_iter)
                if not flip[i]:
                    basis.append(col)
                    continue
            basis.append(-1)
            artificial_rows.append(i)

        a_full = np.hstack([a, np.zeros((a.shape[0], len(artificial_rows)))])
        for k, i in enumerate(artificial_rows):
            a_full[i, n_real + k] = 1.0
            basis[i] = n_real + k

        cost = np.concatenate([problem.objective @ expand, np.zeros(n_real - n_struct)])
        return _StandardForm(a_full, b, basis, n_struct, n_real, cost, shift, expand)

    def _budget(self, form: _StandardForm) -> int:
        m, n = form.a.shape
        return self.max_iter or 50 * (m + n) + 1000

    def _solve_form(self, problem: LpProblem, form: _StandardForm, refactor_every: int) -> LpSolution | None:
        """One two-phase run; None when accuracy was lost."""
        tab = _Tableau(form.a, form.b, form.basis)
        budget = self._budget(form)
        iterations = 0

        if tab.n > form.n_real:
            phase1 = np.zeros(tab.n)
            phase1[form.n_real:] = -1.0
            tab.set_objective(phase1)
            status, it = self._run(tab, budget, refactor_every)
            iterations += it
            if status == "drift":
                return None
            if status != "optimal":
                return LpSolution(status=status, iterations=iterations)
            if -tab.t[-1, -1] > self.feas_tol * (1.0 + np.max(np.abs(form.b), initial=0.0)):
                return LpSolution(status="infeasible", iterations=iterations)
            self._drive_out_artificials(tab, form.n_real)
            tab.keep_columns(form.n_real)
            if not tab.refactor():
                return None

        tab.set_objective(form.cost)
        status, it = self._run(tab, budget - iterations, refactor_every)
        iterations += it
        if status == "drift":
            return None
        if status != "optimal":
            return LpSolution(status=status, iterations=iterations)

        x_std = tab.values()[: form.n_struct]
        x = form.shift + form.expand @ x_std
        lower = problem.bounds()
        # pin bounded variables exactly onto their bound when round-off drifts below
        x = np.where(~np.isneginf(lower) & (x < lower), lower, x)
        if not self.satisfies(problem, x):
            return None
        value = float(problem.objective @ x)
        logger.debug("simplex optimal in %d pivots, value %.10g", iterations, value)
        return LpSolution(status="optimal", x=x, objective_value=value, iterations=iterations)

    def _refresh(self, tab: _Tableau) -> bool:
        """Refactorizes and accepts the basis if it is still primal feasible."""
        if not tab.refactor():
            return False
        if tab.min_value() < -self.feas_tol:
            return False
        tab.clip_values()
        return True

    def _run(self, tab: _Tableau, budget: int, refactor_every: int) -> tuple[str, int]:
        """Primal simplex iterations on the loaded objective."""
        degenerate = 0
        bland = False
        fresh = False
        since_refactor = 0
        it = 0
        while it < max(budget, 0):
            if since_refactor >= refactor_every:
                if not self._refresh(tab):
                    return "drift", it
                since_refactor = 0
                fresh = True

            z = tab.t[-1, : tab.n]
            candidates = np.flatnonzero(z < -self.pivot_tol)
            if candidates.size == 0:
                if fresh:
                    return "optimal", it
                if not self._refresh(tab):
                    return "drift", it
                since_refactor, fresh = 0, True
                continue
            col = int(candidates[0]) if bland else int(candidates[np.argmin(z[candidates])])

            column = tab.t[: tab.m, col]
            limit = self.pivot_tol * max(1.0, float(np.max(np.abs(column), initial=0.0)))
            rows = np.flatnonzero(column > limit)
            if rows.size == 0:
                if fresh:
                    return "unbounded", it
                if not self._refresh(tab):
                    return "drift", it
                since_refactor, fresh = 0, True
                continue

            row, step = self._ratio_test(tab, rows, column, bland)
            if step <= self.pivot_tol:
                degenerate += 1
                if degenerate >= DEGENERATE_RUN and not bland:
                    logger.debug("switching to Bland's rule after %d degenerate pivots", degenerate)
                    bland = True
            else:
                degenerate = 0
            tab.pivot(row, col)
            it += 1
            since_refactor += 1
            fresh = False
        return "iteration-limit", max(budget, 0)

    @staticmethod
    def _ratio_test(tab: _Tableau, rows: np.ndarray, column: np.ndarray, bland: bool) -> tuple[int, float]:
        """
        Leaving row for the entering column. Harris' rule: bound the step with
        slightly relaxed rows, then take the largest pivot under that bound.
        Under Bland's rule the exact minimum ratio wins, lowest basic index first.
        """
        rhs = np.maximum(tab.t[rows, -1], 0.0)
        pivots = column[rows]
        ratios = rhs / pivots
        if bland:
            best = ratios.min()
            ties = rows[ratios <= best + PIVOT_TOL * (1.0 + abs(best))]
            return int(min(ties, key=lambda r: tab.basis[r])), float(best)
        bound = ((rhs + HARRIS_TOL) / pivots).min()
        within = np.flatnonzero(ratios <= bound)
        pick = within[np.argmax(pivots[within])]
        return int(rows[pick]), float(ratios[pick])

    def _drive_out_artificials(self, tab: _Tableau, n_real: int) -> None:
        row = 0
        while row < tab.m:
            if tab.basis[row] >= n_real:
                entries = np.abs(tab.t[row, :n_real])
                if entries.size and entries.max() > self.pivot_tol:
                    tab.pivot(row, int(np.argmax(entries)))
                else:
                    # redundant equality
                    tab.delete_row(row)
                    continue
            row += 1

    @staticmethod
    def _validate(problem: LpProblem) -> None:
        n = problem.n_vars
        if n == 0:
            raise InvalidInputError("LP has no variables")
        checks = [("objective", problem.objective)]
        for name, lhs, rhs in (
            ("eq", problem.eq_lhs, problem.eq_rhs),
            ("ub", problem.ub_lhs, problem.ub_rhs),
        ):
            if (lhs is None) != (rhs is None):
                raise InvalidInputError(f"{name}_lhs and {name}_rhs must be given together")
            if lhs is None or lhs.size == 0 and (rhs is None or rhs.size == 0):
                continue
            if lhs.shape[1] != n:
                raise InvalidInputError(f"{name}_lhs has {lhs.shape[1]} columns, expected {n}")
            if lhs.shape[0] != rhs.shape[0]:
                raise InvalidInputError(f"{name}_lhs has {lhs.shape[0]} rows but {name}_rhs has {rhs.shape[0]}")
            checks += [(f"{name}_lhs", lhs), (f"{name}_rhs", rhs)]
        for name, arr in checks:
            if not np.all(np.isfinite(arr)):
                raise InvalidInputError(f"LP {name} has non-finite entries")
        lower = problem.bounds()
        if lower.shape[0] != n:
            raise InvalidInputError(f"lower_bounds has {lower.shape[0]} entries, expected {n}")
        if np.any(np.isposinf(lower)) or np.any(np.isnan(lower)):
            raise InvalidInputError("lower bounds must be finite or -inf")


# Singleton solver instance
simplex_solver = SimplexSolver()


def solve_lp(problem: LpProblem) -> LpSolution:
    return simplex_solver.solve(problem)
