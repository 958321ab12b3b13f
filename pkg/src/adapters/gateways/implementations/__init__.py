from .admm_qp_solver import ADMMQPSolver, ADMMSettings

__all__ = ["ADMMQPSolver", "ADMMSettings"]
