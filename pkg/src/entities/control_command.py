from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from src.entities.kinematic_model import BaseKind, KinematicModel, wheel_map


@dataclass(frozen=True, eq=False)
class ControlCommand:
    """
    Velocity command for one control period plus controller diagnostics.

    `base` is (v, omega) for a non-holonomic base and (v_x, v_y, omega) for
    an omnidirectional one, both in the base frame. Wheel speeds are only
    present for the non-holonomic case.
    """

    qd_arm: np.ndarray
    base: Tuple[float, ...] = (0.0, 0.0)
    wheels: Optional[Tuple[float, float]] = None
    slack: np.ndarray = field(default_factory=lambda: np.zeros(6))
    theta_eps: float = 0.0
    error_norm: float = 0.0
    manip: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "qd_arm", np.asarray(self.qd_arm, dtype=float).reshape(-1))
        object.__setattr__(self, "slack", np.asarray(self.slack, dtype=float).reshape(-1))
        object.__setattr__(self, "base", tuple(float(v) for v in self.base))
        if len(self.base) not in (2, 3):
            raise ValueError("Base command must be (v, omega) or (v_x, v_y, omega)")
        if self.wheels is not None and len(self.base) != 2:
            raise ValueError("Wheel speeds only apply to a non-holonomic base")

    @classmethod
    def from_joint_rates(
        cls,
        model: KinematicModel,
        qd: np.ndarray,
        slack: Optional[np.ndarray] = None,
        theta_eps: float = 0.0,
        error_norm: float = 0.0,
        manip: float = 0.0,
    ) -> "ControlCommand":
        """Partition joint rates (virtual base joints first) into a command"""
        qd = np.asarray(qd, dtype=float).reshape(-1)
        if qd.shape != (model.n,):
            raise ValueError(f"Expected {model.n} joint rates, got {qd.shape[0]}")
        qd_base, qd_arm = qd[: model.n_base], qd[model.n_base :]
        if model.base_kind == BaseKind.NONHOLONOMIC:
            theta_dot, d_dot = qd_base
            base = (d_dot, theta_dot)
            wheels = wheel_map((theta_dot, d_dot), model.wheel_radius, model.wheel_separation)
        else:
            base = tuple(qd_base)
            wheels = None
        return cls(
            qd_arm=qd_arm.copy(),
            base=base,
            wheels=wheels,
            slack=np.zeros(6) if slack is None else slack,
            theta_eps=theta_eps,
            error_norm=error_norm,
            manip=manip,
        )

    @classmethod
    def base_only(cls, model: KinematicModel, v: float, omega: float) -> "ControlCommand":
        """Drive the base with the arm frozen"""
        qd = np.zeros(model.n)
        if model.base_kind == BaseKind.NONHOLONOMIC:
            qd[0], qd[1] = omega, v
        else:
            qd[0], qd[2] = v, omega
        return cls.from_joint_rates(model, qd)

    @classmethod
    def arm_only(cls, model: KinematicModel, qd_arm: np.ndarray) -> "ControlCommand":
        qd = np.zeros(model.n)
        qd[model.n_base :] = qd_arm
        return cls.from_joint_rates(model, qd)

    def __repr__(self) -> str:
        return (
            f"ControlCommand(base={tuple(round(v, 4) for v in self.base)}, "
            f"|qd_arm|={np.linalg.norm(self.qd_arm):.4f}, error_norm={self.error_norm:.4f})"
        )
