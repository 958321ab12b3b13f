from itertools import combinations

import numpy as np
import pytest

from src.adapters.gateways.implementations.admm_qp_solver import ADMMQPSolver, ADMMSettings
from src.application.exceptions import QPValidationException
from src.entities.qp_problem import QPProblem, QPSolution, QPStatus


def random_problem(rng, size=3, n_eq=1, n_ineq=2):
    """Strictly convex QP with a known interior-feasible point"""
    root = rng.normal(size=(size, size))
    x0 = rng.uniform(-0.5, 0.5, size)
    Jeq = rng.normal(size=(n_eq, size))
    A = rng.normal(size=(n_ineq, size))
    return QPProblem(
        Q=root.T @ root + 0.1 * np.eye(size),
        C=rng.normal(scale=3.0, size=size),
        Jeq=Jeq,
        nu=Jeq @ x0,
        A=A,
        B=A @ x0 + rng.uniform(0.05, 0.5, n_ineq),
        lower=-np.ones(size),
        upper=np.ones(size),
    )


def enumerate_optimum(problem: QPProblem) -> np.ndarray:
    """Best feasible point over every choice of active inequalities and bounds"""
    size = problem.size
    rows = [(problem.A[i], problem.B[i]) for i in range(problem.n_ineq)]
    rows += [(np.eye(size)[i], problem.upper[i]) for i in range(size)]
    rows += [(-np.eye(size)[i], -problem.lower[i]) for i in range(size)]

    best, best_value = None, np.inf
    for count in range(0, size - problem.n_eq + 1):
        for subset in combinations(range(len(rows)), count):
            M = np.vstack([problem.Jeq] + [rows[i][0] for i in subset])
            target = np.concatenate((problem.nu, [rows[i][1] for i in subset]))
            kkt = np.block([[problem.Q, M.T], [M, np.zeros((M.shape[0], M.shape[0]))]])
            rhs = np.concatenate((-problem.C, target))
            solution, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
            if np.max(np.abs(kkt @ solution - rhs)) > 1e-9:
                continue
            x = solution[:size]
            if problem.constraint_violation(x) > 1e-9:
                continue
            value = problem.objective(x)
            if value < best_value:
                best, best_value = x, value
    return best


def test_one_dimensional_bound_is_active():
    problem = QPProblem(Q=[[1.0]], C=[-2.0], upper=[1.0])
    solution = ADMMQPSolver().solve(problem)
    assert solution.status == QPStatus.OPTIMAL
    assert solution.x == pytest.approx([1.0], abs=1e-8)


def test_least_norm_equality():
    problem = QPProblem(Q=np.eye(2), C=np.zeros(2), Jeq=[[1.0, 1.0]], nu=[2.0])
    solution = ADMMQPSolver().solve(problem)
    assert solution.is_optimal
    assert solution.x == pytest.approx([1.0, 1.0], abs=1e-8)
    assert solution.objective == pytest.approx(1.0, abs=1e-8)


def test_unconstrained_minimum():
    problem = QPProblem(Q=np.diag([2.0, 4.0]), C=[-2.0, 4.0])
    solution = ADMMQPSolver().solve(problem)
    assert solution.x == pytest.approx([1.0, -1.0], abs=1e-8)


def test_matches_enumeration_oracle_on_random_problems():
    rng = np.random.default_rng(11)
    solver = ADMMQPSolver()
    for _ in range(25):
        problem = random_problem(rng)
        expected = enumerate_optimum(problem)
        solution = solver.solve(problem)
        assert solution.status == QPStatus.OPTIMAL
        assert solution.x == pytest.approx(expected, abs=1e-6)
        assert problem.constraint_violation(solution.x) < 1e-7


def test_warm_start_reaches_the_same_point():
    rng = np.random.default_rng(12)
    solver = ADMMQPSolver()
    problem = random_problem(rng, size=4, n_eq=1, n_ineq=3)
    cold = solver.solve(problem)
    warm = solver.solve(problem, warm_start=cold)
    assert warm.is_optimal
    assert warm.x == pytest.approx(cold.x, abs=1e-8)
    assert warm.iterations <= cold.iterations

    from_vector = solver.solve(problem, warm_start=cold.x)
    assert from_vector.x == pytest.approx(cold.x, abs=1e-6)


def test_warm_start_with_stale_dual_size_still_solves():
    rng = np.random.default_rng(13)
    solver = ADMMQPSolver()
    previous = solver.solve(random_problem(rng, size=3, n_eq=1, n_ineq=2))
    problem = random_problem(rng, size=3, n_eq=1, n_ineq=1)
    solution = solver.solve(problem, warm_start=previous)
    assert solution.x == pytest.approx(enumerate_optimum(problem), abs=1e-6)


def test_conflicting_bound_and_inequality_is_infeasible():
    problem = QPProblem(Q=[[1.0]], C=[0.0], A=[[1.0]], B=[-1.0], lower=[0.0], upper=[1.0])
    solution = ADMMQPSolver().solve(problem)
    assert solution.status == QPStatus.INFEASIBLE


def test_inconsistent_equalities_are_infeasible():
    problem = QPProblem(Q=np.eye(2), C=np.zeros(2), Jeq=[[1.0, 0.0], [1.0, 0.0]], nu=[1.0, 2.0])
    solution = ADMMQPSolver().solve(problem)
    assert solution.status == QPStatus.INFEASIBLE


def test_unbounded_direction_is_reported():
    problem = QPProblem(Q=np.diag([1.0, 0.0]), C=[0.0, -1.0], A=[[1.0, 0.0]], B=[1.0])
    solution = ADMMQPSolver().solve(problem)
    assert solution.status == QPStatus.UNBOUNDED
    assert not solution.is_optimal


def test_indefinite_objective_is_rejected():
    problem = QPProblem(Q=np.diag([1.0, -1.0]), C=np.zeros(2))
    with pytest.raises(QPValidationException):
        ADMMQPSolver().solve(problem)


def test_positive_semidefinite_objective_is_accepted():
    problem = QPProblem(Q=np.diag([1.0, 0.0]), C=[0.0, -1.0], upper=[1.0, 2.0], lower=[-1.0, -2.0])
    solution = ADMMQPSolver().solve(problem)
    assert solution.x == pytest.approx([0.0, 2.0], abs=1e-7)


def test_problem_validation():
    with pytest.raises(ValueError):
        QPProblem(Q=[[1.0, 2.0], [0.0, 1.0]], C=np.zeros(2))
    with pytest.raises(ValueError):
        QPProblem(Q=np.eye(2), C=np.zeros(3))
    with pytest.raises(ValueError):
        QPProblem(Q=np.eye(2), C=np.zeros(2), lower=[1.0, 1.0], upper=[0.0, 2.0])
    with pytest.raises(ValueError):
        QPProblem(Q=np.eye(1), C=[np.nan])


def test_settings_validation():
    with pytest.raises(ValueError):
        ADMMSettings(alpha=2.0)
    with pytest.raises(ValueError):
        ADMMSettings(max_iter=0)


def test_solution_status_coerced():
    solution = QPSolution(x=np.zeros(1), status="optimal", kkt_residual=0.0)
    assert solution.status == QPStatus.OPTIMAL
    assert solution.is_optimal
