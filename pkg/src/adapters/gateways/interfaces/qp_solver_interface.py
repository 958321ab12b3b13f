from abc import ABC, abstractmethod
from typing import Optional, Union

import numpy as np

from src.entities.qp_problem import QPProblem, QPSolution

WarmStart = Union[np.ndarray, QPSolution, None]


class QPSolverInterface(ABC):
    """
    QP solver interface that abstracts the optimisation backend.

    In Clean Architecture:
    - This is part of the Interface Adapters layer
    - It defines the contract the motion controllers solve against
    - It's implemented by concrete solver adapters
    - It keeps the controllers independent of a specific algorithm
    """

    @abstractmethod
    def solve(self, problem: QPProblem, warm_start: WarmStart = None) -> QPSolution:
        """Solve a convex QP, optionally warm-started from a previous point or solution"""
        pass

    def reset(self) -> None:
        """Drop any workspace carried between solves"""
        pass
