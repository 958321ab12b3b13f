from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.application.dto.interfaces.request_interface import RequestInterface
from src.entities.kinematic_model import ManipulabilityVariant


class ExperimentName(str, Enum):
    EXP1A = "exp1a"
    EXP1B = "exp1b"
    EXP1C = "exp1c"
    SWEEP_KEPS = "sweep_keps"
    SWEEP_JM = "sweep_jm"
    PICKPLACE = "pickplace"
    CUSTOM = "custom"


class ControllerChoice(str, Enum):
    HOLISTIC = "holistic"
    SEQUENTIAL = "sequential"
    RRMC = "rrmc"
    BOTH = "both"


class RunConfig(BaseModel, RequestInterface):
    """
    Validated request of the `run` command.

    Gain overrides are given in the units of the command line (angles in
    degrees) and converted by `gain_overrides`.
    """

    model_config = ConfigDict(frozen=True, protected_namespaces=())

    model_path: str = Field(..., min_length=1, description="Model file path or bundled model name")
    experiment: ExperimentName = Field(..., description="Experiment to run")
    controller: ControllerChoice = Field(ControllerChoice.BOTH, description="Controller(s) to compare")
    seed: int = Field(0, ge=0, description="Seed of every random draw")
    output_dir: str = Field("./results", min_length=1, description="Artefact directory")
    keps: Optional[float] = Field(None, ge=0.0, description="Base-orientation gain")
    beta: Optional[float] = Field(None, gt=0.0, description="Servoing gain")
    eta: Optional[float] = Field(None, gt=0.0, description="Damper gain")
    rho_i: Optional[float] = Field(None, gt=0.0, description="Damper influence distance, degrees")
    rho_s: Optional[float] = Field(None, ge=0.0, description="Damper stop distance, degrees")
    jm: Optional[ManipulabilityVariant] = Field(None, description="Manipulability Jacobian variant")
    trials: Optional[int] = Field(None, ge=1, description="Trials per sweep cell or pick-and-place runs")
    budget: Optional[float] = Field(None, gt=0.0, description="Time budget per goal, seconds")
    threads: Optional[int] = Field(None, ge=1, description="Worker processes, capped by HOLISTIC_THREADS")
    tree_path: Optional[str] = Field(None, description="Tree file for the pick-and-place task")

    @field_validator("jm", mode="before")
    @classmethod
    def parse_variant(cls, value):
        if value is None or isinstance(value, ManipulabilityVariant):
            return value
        return ManipulabilityVariant.create(str(value))

    @model_validator(mode="after")
    def check_dampers(self) -> "RunConfig":
        if self.rho_i is not None and self.rho_s is not None and self.rho_s >= self.rho_i:
            raise ValueError("rho_s must be smaller than rho_i")
        return self

    @property
    def is_sweep(self) -> bool:
        return self.experiment in (ExperimentName.SWEEP_KEPS, ExperimentName.SWEEP_JM)

    def gain_overrides(self) -> dict:
        """Overrides for ControllerGains.with_overrides, angles in radians"""
        return {
            "k_eps": self.keps,
            "beta": self.beta,
            "eta": self.eta,
            "rho_i": None if self.rho_i is None else float(np.radians(self.rho_i)),
            "rho_s": None if self.rho_s is None else float(np.radians(self.rho_s)),
        }

    def to_dict(self) -> dict:
        return self.model_dump(mode="json")
