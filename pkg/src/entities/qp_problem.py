from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

SYMMETRY_TOLERANCE = 1e-10


class QPStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    MAX_ITER = "max_iter"


def _as_matrix(value, columns: int, name: str) -> np.ndarray:
    matrix = np.asarray(value, dtype=float)
    if matrix.size == 0:
        return np.zeros((0, columns))
    if matrix.ndim == 1:
        matrix = matrix.reshape(1, -1)
    if matrix.ndim != 2 or matrix.shape[1] != columns:
        raise ValueError(f"{name} must have {columns} columns, got shape {matrix.shape}")
    return matrix


def _as_vector(value, length: int, name: str) -> np.ndarray:
    vector = np.asarray(value, dtype=float).reshape(-1)
    if vector.shape != (length,):
        raise ValueError(f"{name} must have length {length}, got {vector.shape[0]}")
    return vector


@dataclass(frozen=True, eq=False)
class QPProblem:
    """
    Convex QP:  min 1/2 x'Qx + C'x  s.t.  Jeq x = nu,  A x <= B,  lower <= x <= upper.

    Empty equality or inequality blocks are allowed. Infinite bounds mean
    the variable is unbounded on that side.
    """

    Q: np.ndarray
    C: np.ndarray
    Jeq: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    nu: np.ndarray = field(default_factory=lambda: np.zeros(0))
    A: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    B: np.ndarray = field(default_factory=lambda: np.zeros(0))
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ValueError(f"Q must be square, got shape {Q.shape}")
        size = Q.shape[0]
        if np.max(np.abs(Q - Q.T), initial=0.0) > SYMMETRY_TOLERANCE:
            raise ValueError("Q must be symmetric")

        C = _as_vector(self.C, size, "C")
        Jeq = _as_matrix(self.Jeq, size, "Jeq")
        nu = _as_vector(self.nu, Jeq.shape[0], "nu")
        A = _as_matrix(self.A, size, "A")
        B = _as_vector(self.B, A.shape[0], "B")
        lower = np.full(size, -np.inf) if self.lower is None else _as_vector(self.lower, size, "lower")
        upper = np.full(size, np.inf) if self.upper is None else _as_vector(self.upper, size, "upper")
        if np.any(lower > upper):
            raise ValueError("lower must not exceed upper")
        for name, values in (("C", C), ("nu", nu), ("B", B), ("Jeq", Jeq), ("A", A)):
            if not np.all(np.isfinite(values)):
                raise ValueError(f"{name} must be finite")

        for name, values in (
            ("Q", Q), ("C", C), ("Jeq", Jeq), ("nu", nu), ("A", A), ("B", B),
            ("lower", lower), ("upper", upper),
        ):
            object.__setattr__(self, name, values)

    @property
    def size(self) -> int:
        return self.Q.shape[0]

    @property
    def n_eq(self) -> int:
        return self.Jeq.shape[0]

    @property
    def n_ineq(self) -> int:
        return self.A.shape[0]

    def objective(self, x: np.ndarray) -> float:
        return float(0.5 * x @ self.Q @ x + self.C @ x)

    def constraint_violation(self, x: np.ndarray) -> float:
        """Largest violation over equalities, inequalities and bounds"""
        violations = [0.0]
        if self.n_eq:
            violations.append(np.max(np.abs(self.Jeq @ x - self.nu)))
        if self.n_ineq:
            violations.append(np.max(self.A @ x - self.B))
        violations.append(np.max(self.lower - x))
        violations.append(np.max(x - self.upper))
        return float(max(violations))


@dataclass(frozen=True, eq=False)
class QPSolution:
    """
    Result of a QP solve.

    `duals` stacks the multipliers of the equality rows, inequality rows
    and bounds, in that order. Lower-side activity has a negative sign.
    """

    x: np.ndarray
    status: QPStatus
    kkt_residual: float
    duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0
    objective: float = float("nan")

    def __post_init__(self):
        object.__setattr__(self, "status", QPStatus(self.status))

    @property
    def is_optimal(self) -> bool:
        return self.status == QPStatus.OPTIMAL

    def __repr__(self) -> str:
        return (
            f"QPSolution(status={self.status.value}, iterations={self.iterations}, "
            f"kkt_residual={self.kkt_residual:.2e})"
        )
