from .implementation.run_config_dto import ControllerChoice, ExperimentName, RunConfig
from .implementation.metrics_dto import (
    PickPlaceMetricsResponse,
    ScenarioResultResponse,
    SweepCellResponse,
)

__all__ = [
    "ControllerChoice",
    "ExperimentName",
    "RunConfig",
    "PickPlaceMetricsResponse",
    "ScenarioResultResponse",
    "SweepCellResponse",
]
