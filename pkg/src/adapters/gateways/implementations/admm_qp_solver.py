from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, lu_factor, lu_solve

from src.adapters.gateways.interfaces.qp_solver_interface import QPSolverInterface, WarmStart
from src.app_logs import get_logger
from src.application.exceptions import QPValidationException
from src.entities.qp_problem import QPProblem, QPSolution, QPStatus

logger = get_logger(__name__)

INFINITY = 1e20
RHO_MIN = 1e-6
RHO_MAX = 1e6
RHO_EQUALITY_SCALE = 1e3
PSD_TOLERANCE = 1e-9

LOWER = -1
INACTIVE = 0
UPPER = 1
EQUALITY = 2


@dataclass(frozen=True)
class ADMMSettings:
    """Solver parameters; defaults suit dense problems of a few dozen variables"""

    rho: float = 0.1
    sigma: float = 1e-6
    alpha: float = 1.6
    eps_abs: float = 1e-8
    eps_rel: float = 1e-8
    eps_prim_inf: float = 1e-6
    eps_dual_inf: float = 1e-6
    acceptance: float = 1e-6
    max_iter: int = 4000
    check_interval: int = 5
    adaptive_rho_interval: int = 25
    polish_interval: int = 25
    polish_passes: int = 25
    polish_delta: float = 1e-9
    refine_iterations: int = 3

    def __post_init__(self):
        if self.rho <= 0 or self.sigma <= 0:
            raise ValueError("rho and sigma must be positive")
        if not 0 < self.alpha < 2:
            raise ValueError("alpha must lie in (0, 2)")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class _Stacked:
    """All constraints as l <= M x <= u, rows ordered equality, inequality, bounds"""

    P: np.ndarray
    q: np.ndarray
    M: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    kind: np.ndarray

    @classmethod
    def from_problem(cls, problem: QPProblem) -> "_Stacked":
        size = problem.size
        M = np.vstack((problem.Jeq, problem.A, np.eye(size)))
        lower = np.concatenate((problem.nu, np.full(problem.n_ineq, -np.inf), problem.lower))
        upper = np.concatenate((problem.nu, problem.B, problem.upper))
        kind = np.zeros(M.shape[0], dtype=int)
        kind[: problem.n_eq] = EQUALITY
        equal_bounds = np.flatnonzero(lower[problem.n_eq :] == upper[problem.n_eq :])
        kind[problem.n_eq + equal_bounds] = EQUALITY
        return cls(
            P=problem.Q,
            q=problem.C,
            M=M,
            lower=np.clip(lower, -INFINITY, INFINITY),
            upper=np.clip(upper, -INFINITY, INFINITY),
            kind=kind,
        )

    @property
    def rows(self) -> int:
        return self.M.shape[0]


class ADMMQPSolver(QPSolverInterface):
    """
    Dense operator-splitting QP solver with active-set polishing.

    ADMM iterations locate the active constraints; a primal-dual
    active-set pass then solves the reduced KKT system exactly. When a
    warm start is available the polish is tried first and ADMM only runs
    if the guessed active set is wrong.
    """

    def __init__(self, settings: Optional[ADMMSettings] = None):
        self.settings = settings or ADMMSettings()

    def solve(self, problem: QPProblem, warm_start: WarmStart = None) -> QPSolution:
        smallest = float(np.linalg.eigvalsh(problem.Q)[0]) if problem.size else 0.0
        if smallest < -PSD_TOLERANCE:
            raise QPValidationException(f"Q is not positive semidefinite (eigenvalue {smallest:.3e})")
        data = _Stacked.from_problem(problem)
        x0, y0 = self._initial_iterate(problem, data, warm_start)

        if warm_start is not None:
            polished = self._polish(data, x0, y0)
            if polished is not None:
                return self._finish(problem, data, *polished, QPStatus.OPTIMAL, 0)

        return self._admm(problem, data, x0, y0)

    def _initial_iterate(
        self, problem: QPProblem, data: _Stacked, warm_start: WarmStart
    ) -> Tuple[np.ndarray, np.ndarray]:
        x0 = np.zeros(problem.size)
        y0 = np.zeros(data.rows)
        if warm_start is None:
            return x0, y0

        if isinstance(warm_start, QPSolution):
            x_prev, duals = np.asarray(warm_start.x, dtype=float), warm_start.duals
        else:
            x_prev, duals = np.asarray(warm_start, dtype=float).reshape(-1), None
        if x_prev.shape == (problem.size,):
            x0 = x_prev.copy()

        if duals is not None and duals.shape[0] == data.rows:
            y0 = duals.copy()
        elif duals is not None and duals.shape[0] >= problem.n_eq + problem.size:
            # Inequality rows come and go between solves; keep the rest.
            y0[: problem.n_eq] = duals[: problem.n_eq]
            y0[-problem.size :] = duals[-problem.size :]
        return x0, y0

    # ------------------------------------------------------------------ ADMM
    def _rho_vector(self, data: _Stacked, rho: float) -> np.ndarray:
        rho_vec = np.full(data.rows, rho)
        rho_vec[data.kind == EQUALITY] = rho * RHO_EQUALITY_SCALE
        free = (data.lower <= -INFINITY) & (data.upper >= INFINITY)
        rho_vec[free] = RHO_MIN
        return np.clip(rho_vec, RHO_MIN, RHO_MAX)

    def _factor(self, data: _Stacked, rho_vec: np.ndarray):
        size = data.P.shape[0]
        reduced = data.P + self.settings.sigma * np.eye(size) + data.M.T @ (rho_vec[:, None] * data.M)
        return cho_factor(reduced)

    def _admm(
        self, problem: QPProblem, data: _Stacked, x: np.ndarray, y: np.ndarray
    ) -> QPSolution:
        settings = self.settings
        rho = settings.rho
        rho_vec = self._rho_vector(data, rho)
        factor = self._factor(data, rho_vec)
        z = np.clip(data.M @ x, data.lower, data.upper)

        for iteration in range(1, settings.max_iter + 1):
            rhs = settings.sigma * x - data.q + data.M.T @ (rho_vec * z - y)
            x_tilde = cho_solve(factor, rhs)
            z_tilde = data.M @ x_tilde

            x_next = settings.alpha * x_tilde + (1.0 - settings.alpha) * x
            z_relaxed = settings.alpha * z_tilde + (1.0 - settings.alpha) * z
            z_next = np.clip(z_relaxed + y / rho_vec, data.lower, data.upper)
            y_next = y + rho_vec * (z_relaxed - z_next)
            delta_x, delta_y = x_next - x, y_next - y
            x, z, y = x_next, z_next, y_next

            if iteration % settings.check_interval:
                continue

            r_prim, r_dual, eps_prim, eps_dual, scale_prim, scale_dual = self._residuals(data, x, z, y)
            if r_prim <= eps_prim and r_dual <= eps_dual:
                polished = self._polish(data, x, y)
                if polished is not None:
                    return self._finish(problem, data, *polished, QPStatus.OPTIMAL, iteration)
                return self._finish(problem, data, x, y, QPStatus.OPTIMAL, iteration)

            if self._is_primal_infeasible(data, delta_y):
                logger.debug("QP primal infeasibility certificate found", iteration=iteration)
                return self._finish(problem, data, x, y, QPStatus.INFEASIBLE, iteration)

            if self._is_dual_infeasible(data, delta_x):
                logger.debug("QP dual infeasibility certificate found", iteration=iteration)
                return self._finish(problem, data, x, y, QPStatus.UNBOUNDED, iteration)

            if iteration % settings.polish_interval == 0:
                polished = self._polish(data, x, y)
                if polished is not None:
                    return self._finish(problem, data, *polished, QPStatus.OPTIMAL, iteration)

            if iteration % settings.adaptive_rho_interval == 0:
                ratio = np.sqrt(
                    (r_prim / max(scale_prim, 1e-12)) / max(r_dual / max(scale_dual, 1e-12), 1e-30)
                )
                new_rho = float(np.clip(rho * ratio, RHO_MIN, RHO_MAX))
                if new_rho > 5.0 * rho or new_rho < 0.2 * rho:
                    rho = new_rho
                    rho_vec = self._rho_vector(data, rho)
                    factor = self._factor(data, rho_vec)

        status = QPStatus.MAX_ITER
        if self._kkt_residual(data, x, y) <= settings.acceptance:
            status = QPStatus.OPTIMAL
        else:
            logger.warning("QP solver reached iteration cap", max_iter=settings.max_iter)
        return self._finish(problem, data, x, y, status, settings.max_iter)

    def _residuals(self, data: _Stacked, x: np.ndarray, z: np.ndarray, y: np.ndarray):
        Mx = data.M @ x
        Px = data.P @ x
        MTy = data.M.T @ y
        r_prim = np.linalg.norm(Mx - z, np.inf)
        r_dual = np.linalg.norm(Px + data.q + MTy, np.inf)
        scale_prim = max(np.linalg.norm(Mx, np.inf), np.linalg.norm(z, np.inf))
        scale_dual = max(
            np.linalg.norm(Px, np.inf), np.linalg.norm(MTy, np.inf), np.linalg.norm(data.q, np.inf)
        )
        eps_prim = self.settings.eps_abs + self.settings.eps_rel * scale_prim
        eps_dual = self.settings.eps_abs + self.settings.eps_rel * scale_dual
        return r_prim, r_dual, eps_prim, eps_dual, scale_prim, scale_dual

    def _is_primal_infeasible(self, data: _Stacked, delta_y: np.ndarray) -> bool:
        eps = self.settings.eps_prim_inf
        norm = np.linalg.norm(delta_y, np.inf)
        if norm <= eps:
            return False
        v = delta_y / norm
        if np.any(v[data.upper >= INFINITY] > eps) or np.any(v[data.lower <= -INFINITY] < -eps):
            return False
        finite_upper = data.upper < INFINITY
        finite_lower = data.lower > -INFINITY
        support = data.upper[finite_upper] @ np.maximum(v[finite_upper], 0.0) + data.lower[
            finite_lower
        ] @ np.minimum(v[finite_lower], 0.0)
        if support >= -eps:
            return False
        return np.linalg.norm(data.M.T @ v, np.inf) < eps

    def _is_dual_infeasible(self, data: _Stacked, delta_x: np.ndarray) -> bool:
        """A direction of unbounded descent: P d = 0, q'd < 0 and M d inside the recession cone"""
        eps = self.settings.eps_dual_inf
        norm = np.linalg.norm(delta_x, np.inf)
        if norm <= eps:
            return False
        d = delta_x / norm
        if np.linalg.norm(data.P @ d, np.inf) > eps or data.q @ d >= -eps:
            return False
        Md = data.M @ d
        finite_upper = data.upper < INFINITY
        finite_lower = data.lower > -INFINITY
        return not (np.any(Md[finite_upper] > eps) or np.any(Md[finite_lower] < -eps))

    # ---------------------------------------------------------------- polish
    def _guess_active(self, data: _Stacked, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        Mx = data.M @ x
        active = np.full(data.rows, INACTIVE)
        active[(y + (Mx - data.lower) < 0.0) & (data.lower > -INFINITY)] = LOWER
        active[(y + (Mx - data.upper) > 0.0) & (data.upper < INFINITY)] = UPPER
        active[data.kind == EQUALITY] = EQUALITY
        return active

    def _polish(
        self, data: _Stacked, x: np.ndarray, y: np.ndarray
    ) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        """Primal-dual active-set iterations on the reduced KKT system"""
        active = self._guess_active(data, x, y)
        seen = set()
        for _ in range(self.settings.polish_passes):
            key = active.tobytes()
            if key in seen:
                return None
            seen.add(key)

            solved = self._solve_reduced_kkt(data, active)
            if solved is None:
                return None
            x_new, y_new = solved
            if self._is_kkt_point(data, x_new, y_new, active):
                return x_new, y_new
            active = self._guess_active(data, x_new, y_new)
        return None

    def _solve_reduced_kkt(
        self, data: _Stacked, active: np.ndarray
    ) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        size = data.P.shape[0]
        rows = np.flatnonzero(active != INACTIVE)
        M_w = data.M[rows]
        target = np.where(active[rows] == UPPER, data.upper[rows], data.lower[rows])
        count = rows.shape[0]

        kkt = np.zeros((size + count, size + count))
        kkt[:size, :size] = data.P
        kkt[:size, size:] = M_w.T
        kkt[size:, :size] = M_w
        delta = self.settings.polish_delta
        regularised = kkt.copy()
        regularised[:size, :size] += delta * np.eye(size)
        regularised[size:, size:] -= delta * np.eye(count)
        rhs = np.concatenate((-data.q, target))

        try:
            factor = lu_factor(regularised, check_finite=False)
        except (LinAlgError, ValueError):
            return None
        solution = lu_solve(factor, rhs)
        for _ in range(self.settings.refine_iterations):
            solution = solution + lu_solve(factor, rhs - kkt @ solution)
        if not np.all(np.isfinite(solution)):
            return None

        y = np.zeros(data.rows)
        y[rows] = solution[size:]
        return solution[:size], y

    def _is_kkt_point(
        self, data: _Stacked, x: np.ndarray, y: np.ndarray, active: np.ndarray
    ) -> bool:
        Mx = data.M @ x
        scale = 1.0 + max(np.max(np.abs(Mx), initial=0.0), np.max(np.abs(data.q), initial=0.0))
        tol = 1e-9 * scale
        if np.any(Mx < data.lower - tol) or np.any(Mx > data.upper + tol):
            return False
        if np.any(y[active == LOWER] > tol) or np.any(y[active == UPPER] < -tol):
            return False
        stationarity = np.linalg.norm(data.P @ x + data.q + data.M.T @ y, np.inf)
        return stationarity <= 1e-8 * scale

    # --------------------------------------------------------------- results
    def _kkt_residual(self, data: _Stacked, x: np.ndarray, y: np.ndarray) -> float:
        Mx = data.M @ x
        stationarity = np.linalg.norm(data.P @ x + data.q + data.M.T @ y, np.inf)
        violation = max(
            np.max(data.lower - Mx, initial=0.0), np.max(Mx - data.upper, initial=0.0), 0.0
        )
        finite_upper = data.upper < INFINITY
        finite_lower = data.lower > -INFINITY
        upper_gap = np.where((y > 0.0) & finite_upper, y * (data.upper - Mx), 0.0)
        lower_gap = np.where((y < 0.0) & finite_lower, -y * (Mx - data.lower), 0.0)
        # A multiplier pushing against a missing bound is itself a violation.
        unbounded_side = np.where(
            ((y > 0.0) & ~finite_upper) | ((y < 0.0) & ~finite_lower), np.abs(y), 0.0
        )
        complementarity = max(
            np.max(np.abs(upper_gap), initial=0.0),
            np.max(np.abs(lower_gap), initial=0.0),
            np.max(unbounded_side, initial=0.0),
        )
        return float(max(stationarity, violation, complementarity))

    def _finish(
        self,
        problem: QPProblem,
        data: _Stacked,
        x: np.ndarray,
        y: np.ndarray,
        status: QPStatus,
        iterations: int,
    ) -> QPSolution:
        if status == QPStatus.OPTIMAL:
            x = np.clip(x, problem.lower, problem.upper)
        return QPSolution(
            x=x,
            status=status,
            kkt_residual=self._kkt_residual(data, x, y),
            duals=y,
            iterations=iterations,
            objective=problem.objective(x),
        )
