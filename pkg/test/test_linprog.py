from itertools import combinations

import numpy as np
import pytest

from core.designer.services import assemble_subproblem, random_init
from core.errors import InvalidInputError
from core.linprog.schema import LpProblem
from core.linprog.services import SimplexSolver, simplex_solver, solve_lp
from core.model.schema import COLOR_PROFILES, DesignSpec
from core.rng import make_generator


def brute_force_vertices(c, a_ub, b_ub, a_eq=None, b_eq=None):
    """Best vertex of {A_eq x = b_eq, A x <= b, x >= 0} by enumerating every active set."""
    n = len(c)
    a_eq = np.zeros((0, n)) if a_eq is None else np.asarray(a_eq)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq)
    a_all = np.vstack([a_ub, -np.eye(n)])
    b_all = np.concatenate([b_ub, np.zeros(n)])
    best = -np.inf
    for rows in combinations(range(len(b_all)), n - len(b_eq)):
        sub = np.vstack([a_eq, a_all[list(rows)]])
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, np.concatenate([b_eq, b_all[list(rows)]]))
        if np.all(a_all @ x <= b_all + 1e-9) and np.allclose(a_eq @ x, b_eq, atol=1e-9):
            best = max(best, float(c @ x))
    return best


def assert_feasible(problem, x):
    a_eq, b_eq = problem.equalities()
    a_ub, b_ub = problem.inequalities()
    assert np.max(np.abs(a_eq @ x - b_eq), initial=0.0) <= 1e-8 * (1.0 + np.max(np.abs(b_eq), initial=0.0))
    assert np.max(a_ub @ x - b_ub, initial=0.0) <= 1e-8 * (1.0 + np.max(np.abs(b_ub), initial=0.0))
    assert np.all(x >= problem.bounds() - 1e-10)


def random_bounded_lp(seed):
    """At most 6 variables and 8 constraints (box rows included), feasible by construction."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    m_eq = int(rng.integers(0, min(2, 8 - n) + 1))
    m_ub = 8 - n - m_eq
    x0 = rng.uniform(0.5, 2.0, n)
    c = rng.uniform(-1.0, 2.0, n)
    a_eq = rng.uniform(-1.0, 2.0, (m_eq, n))
    a_ub = rng.uniform(-1.0, 2.0, (m_ub, n))
    a_ub = np.vstack([a_ub, np.eye(n)])
    b_ub = np.concatenate([a_ub[:m_ub] @ x0 + rng.uniform(0.1, 1.0, m_ub), np.full(n, 5.0)])
    return c, a_ub, b_ub, a_eq, a_eq @ x0



@pytest.mark.parametrize("seed", range(50))
def test_matches_vertex_enumeration(seed):
    rng = np.random.default_rng(seed)
    n, m = 3, 4
    c = rng.uniform(-1.0, 2.0, n)
    a_ub = rng.uniform(-1.0, 2.0, (m, n))
    b_ub = rng.uniform(0.5, 3.0, m)
    # box rows keep the region bounded
    a_ub = np.vstack([a_ub, np.eye(n)])
    b_ub = np.concatenate([b_ub, np.full(n, 5.0)])

    solution = solve_lp(LpProblem(objective=c, ub_lhs=a_ub, ub_rhs=b_ub))

    assert solution.status == "optimal"
    assert solution.objective_value == pytest.approx(brute_force_vertices(c, a_ub, b_ub), abs=1e-6)
    assert np.all(a_ub @ solution.x <= b_ub + 1e-8)
    assert np.all(solution.x >= 0)


@pytest.mark.parametrize("seed", range(50))
def test_matches_vertex_enumeration_with_equalities(seed):
    c, a_ub, b_ub, a_eq, b_eq = random_bounded_lp(seed)
    problem = LpProblem(
        objective=c,
        eq_lhs=a_eq if len(b_eq) else None,
        eq_rhs=b_eq if len(b_eq) else None,
        ub_lhs=a_ub,
        ub_rhs=b_ub,
    )

    solution = solve_lp(problem)

    assert solution.status == "optimal"
    assert solution.objective_value == pytest.approx(brute_force_vertices(c, a_ub, b_ub, a_eq, b_eq), abs=1e-6)
    assert_feasible(problem, solution.x)


def test_identical_input_gives_identical_output():
    c, a_ub, b_ub, a_eq, b_eq = random_bounded_lp(17)
    problem = LpProblem(objective=c, eq_lhs=a_eq, eq_rhs=b_eq, ub_lhs=a_ub, ub_rhs=b_ub)

    first = SimplexSolver().solve(problem)
    second = SimplexSolver().solve(problem)

    assert first.status == second.status == "optimal"
    assert np.array_equal(first.x, second.x)
    assert first.objective_value == second.objective_value
    assert first.iterations == second.iterations


@pytest.mark.parametrize("seed", range(10))
def test_weak_duality(seed):
    rng = np.random.default_rng(100 + seed)
    n, m = 4, 5
    c = rng.uniform(0.1, 2.0, n)
    a_ub = rng.uniform(0.1, 2.0, (m, n))
    b_ub = rng.uniform(1.0, 3.0, m)

    primal = solve_lp(LpProblem(objective=c, ub_lhs=a_ub, ub_rhs=b_ub))
    # min b @ y  s.t.  A^T y >= c, y >= 0
    dual = solve_lp(LpProblem(objective=-b_ub, ub_lhs=-a_ub.T, ub_rhs=-c))

    assert primal.is_optimal and dual.is_optimal
    dual_value = -dual.objective_value
    assert primal.objective_value <= dual_value + 1e-6
    assert np.all(a_ub.T @ dual.x >= c - 1e-8)
    assert primal.objective_value == pytest.approx(dual_value, abs=1e-6)


def sca_trajectory_lps(restart, iterations=30):
    """Every subproblem met along one balanced SCA run at unit power."""
    spec = DesignSpec(color_fractions=COLOR_PROFILES["balanced"], avg_power=1.0, seed=5)
    c_ref = random_init(spec, make_generator(spec.seed, restart))
    for _ in range(iterations):
        problem = assemble_subproblem(spec, c_ref)
        solution = simplex_solver.solve(problem)
        yield problem, solution
        if not solution.is_optimal:
            return
        c_ref = solution.x[:-1]


@pytest.mark.parametrize("restart", range(4))
def test_sca_subproblems_solve_to_feasible_optima(restart):
    for problem, solution in sca_trajectory_lps(restart):
        assert solution.status == "optimal"
        assert_feasible(problem, solution.x)


@pytest.mark.slow
def test_forty_sca_trajectories_stay_feasible():
    solved = 0
    for restart in range(40):
        for problem, solution in sca_trajectory_lps(restart):
            assert solution.status == "optimal", f"restart {restart}: {solution.status}"
            assert_feasible(problem, solution.x)
            solved += 1
    assert solved == 40 * 30


def test_textbook_problem():
    # max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18  ->  (2, 6), value 36
    solution = solve_lp(LpProblem(
        objective=[3.0, 5.0],
        ub_lhs=[[1.0, 0.0], [0.0, 2.0], [3.0, 2.0]],
        ub_rhs=[4.0, 12.0, 18.0],
    ))
    assert solution.is_optimal
    np.testing.assert_allclose(solution.x, [2.0, 6.0], atol=1e-9)
    assert solution.objective_value == pytest.approx(36.0)


def test_equality_and_negative_rhs():
    # max x + y, x + y = 2, -x <= -0.5 (x >= 0.5), y <= 1
    solution = solve_lp(LpProblem(
        objective=[1.0, 1.0],
        eq_lhs=[[1.0, 1.0]],
        eq_rhs=[2.0],
        ub_lhs=[[-1.0, 0.0], [0.0, 1.0]],
        ub_rhs=[-0.5, 1.0],
    ))
    assert solution.is_optimal
    assert solution.objective_value == pytest.approx(2.0)
    assert solution.x[0] >= 0.5 - 1e-9
    assert solution.x[1] <= 1.0 + 1e-9


def test_free_variable_goes_negative():
    # max t, t <= -1 - x, x >= 0, t free  ->  t = -1
    solution = solve_lp(LpProblem(
        objective=[0.0, 1.0],
        ub_lhs=[[1.0, 1.0]],
        ub_rhs=[-1.0],
        lower_bounds=[0.0, -np.inf],
    ))
    assert solution.is_optimal
    np.testing.assert_allclose(solution.x, [0.0, -1.0], atol=1e-9)


def test_finite_lower_bound_is_shifted():
    # max -x, x >= 2  ->  x = 2
    solution = solve_lp(LpProblem(
        objective=[-1.0],
        ub_lhs=[[1.0]],
        ub_rhs=[10.0],
        lower_bounds=[2.0],
    ))
    assert solution.is_optimal
    assert solution.x[0] == pytest.approx(2.0)


def test_infeasible():
    solution = solve_lp(LpProblem(
        objective=[1.0],
        eq_lhs=[[1.0]],
        eq_rhs=[-1.0],
    ))
    assert solution.status == "infeasible"
    assert solution.x is None


def test_unbounded():
    solution = solve_lp(LpProblem(objective=[1.0, 0.0], ub_lhs=[[0.0, 1.0]], ub_rhs=[1.0]))
    assert solution.status == "unbounded"


def test_redundant_equalities():
    solution = solve_lp(LpProblem(
        objective=[1.0, 2.0],
        eq_lhs=[[1.0, 1.0], [2.0, 2.0]],
        eq_rhs=[1.0, 2.0],
    ))
    assert solution.is_optimal
    np.testing.assert_allclose(solution.x, [0.0, 1.0], atol=1e-9)


def test_degenerate_problem_terminates():
    # many constraints active at the optimum vertex (1, 1)
    a_ub = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 1.0], [1.0, 2.0]])
    b_ub = np.array([1.0, 1.0, 2.0, 3.0, 3.0])
    solution = solve_lp(LpProblem(objective=[1.0, 1.0], ub_lhs=a_ub, ub_rhs=b_ub))
    assert solution.is_optimal
    assert solution.objective_value == pytest.approx(2.0)


def test_iteration_limit():
    solver = SimplexSolver(max_iter=1)
    solution = solver.solve(LpProblem(
        objective=[3.0, 5.0],
        ub_lhs=[[1.0, 0.0], [0.0, 2.0], [3.0, 2.0]],
        ub_rhs=[4.0, 12.0, 18.0],
    ))
    assert solution.status == "iteration-limit"


def test_rejects_shape_mismatch():
    with pytest.raises(InvalidInputError):
        solve_lp(LpProblem(objective=[1.0, 1.0], ub_lhs=[[1.0, 1.0, 1.0]], ub_rhs=[1.0]))


def test_rejects_non_finite_entries():
    with pytest.raises(InvalidInputError):
        solve_lp(LpProblem(objective=[1.0], ub_lhs=[[np.nan]], ub_rhs=[1.0]))
