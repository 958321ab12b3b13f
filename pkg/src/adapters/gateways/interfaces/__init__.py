from .qp_solver_interface import QPSolverInterface

__all__ = ["QPSolverInterface"]
