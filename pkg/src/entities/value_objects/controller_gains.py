from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np


@dataclass(frozen=True, eq=False)
class ControllerGains:
    """
    ControllerGains value object that holds the tuning of the motion controller.

    This is a value object because:
    - It's immutable (frozen=True)
    - It validates itself during creation
    - It has no identity, only value

    Angles are in radians; base_vel_limits is (v_max m/s, w_max rad/s).
    The base joints are weighted lambda_base times the slack weight, and the
    linear part of the demanded end-effector twist is capped at
    max_linear_speed m/s.
    """

    k_eps: float = 0.5
    lambda_arm: float = 0.01
    lambda_base: float = 0.01
    eta: float = 1.0
    rho_i: float = float(np.radians(50.0))
    rho_s: float = float(np.radians(2.0))
    beta: float = 1.0
    slack_bound: np.ndarray = field(default_factory=lambda: np.full(6, 10.0))
    lambda_delta_cap: float = 1e4
    base_vel_limits: Tuple[float, float] = (1.0, 1.0)
    max_linear_speed: float = 1.0

    def __post_init__(self):
        """Validate the gains during object creation"""
        slack_bound = np.asarray(self.slack_bound, dtype=float).reshape(-1)
        if slack_bound.shape == (1,):
            slack_bound = np.full(6, slack_bound[0])
        if slack_bound.shape != (6,):
            raise ValueError("slack_bound must have 6 entries")
        object.__setattr__(self, "slack_bound", slack_bound)
        object.__setattr__(self, "base_vel_limits", tuple(float(v) for v in self.base_vel_limits))

        if not self.rho_s < self.rho_i:
            raise ValueError(f"rho_s must be < rho_i (got {self.rho_s} >= {self.rho_i})")
        if self.rho_s < 0:
            raise ValueError("rho_s must be non-negative")
        if self.eta <= 0:
            raise ValueError("eta must be > 0")
        if self.beta <= 0:
            raise ValueError("beta must be > 0")
        if self.k_eps < 0:
            raise ValueError("k_eps must be >= 0")
        if self.lambda_arm <= 0 or self.lambda_base <= 0 or self.lambda_delta_cap <= 0:
            raise ValueError("Cost weights must be positive")
        if np.any(slack_bound <= 0):
            raise ValueError("slack_bound entries must be positive")
        if len(self.base_vel_limits) != 2 or min(self.base_vel_limits) <= 0:
            raise ValueError("base_vel_limits must be two positive values")
        if self.max_linear_speed <= 0:
            raise ValueError("max_linear_speed must be > 0")

    @classmethod
    def defaults(cls) -> "ControllerGains":
        """eta = 1, rho_i = 50 deg, rho_s = 2 deg, k_eps = 0.5, beta = 1, arm and base weights 0.01"""
        return cls()

    def with_overrides(self, **overrides: Optional[float]) -> "ControllerGains":
        """Copy with the given fields replaced; None values are ignored"""
        unknown = set(overrides) - set(self.__dataclass_fields__)
        if unknown:
            raise ValueError(f"Unknown gain(s): {', '.join(sorted(unknown))}")
        changes = {key: value for key, value in overrides.items() if value is not None}
        return replace(self, **changes) if changes else self

    @property
    def v_max(self) -> float:
        return self.base_vel_limits[0]

    @property
    def w_max(self) -> float:
        return self.base_vel_limits[1]

    def to_dict(self) -> dict:
        return {
            "k_eps": self.k_eps,
            "lambda_arm": self.lambda_arm,
            "lambda_base": self.lambda_base,
            "eta": self.eta,
            "rho_i_deg": float(np.degrees(self.rho_i)),
            "rho_s_deg": float(np.degrees(self.rho_s)),
            "beta": self.beta,
            "slack_bound": self.slack_bound.tolist(),
            "lambda_delta_cap": self.lambda_delta_cap,
            "base_vel_limits": list(self.base_vel_limits),
            "max_linear_speed": self.max_linear_speed,
        }

    def __repr__(self) -> str:
        return (
            f"ControllerGains(k_eps={self.k_eps}, beta={self.beta}, eta={self.eta}, "
            f"rho_i={np.degrees(self.rho_i):.1f}deg, rho_s={np.degrees(self.rho_s):.1f}deg)"
        )
