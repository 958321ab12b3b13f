from functools import partial
from typing import Callable

from src.adapters.gateways.implementations.admm_qp_solver import ADMMQPSolver, ADMMSettings
from src.adapters.gateways.interfaces.qp_solver_interface import QPSolverInterface
from src.adapters.gateways.model_file_repository import ModelFileRepository
from src.adapters.presenters.implementations.csv_artifact_writer import CSVArtifactWriter
from src.adapters.presenters.implementations.json_presenter import JSONPresenter
from src.adapters.presenters.interfaces.presenter_interface import (
    ArtifactWriterInterface,
    PresenterInterface,
)
from src.application.repositories.model_repository import ModelRepository
from src.config.app_config import app_config


class Container:
    """
    Dependency Injection Container.

    In Clean Architecture:
    - This wires up all the components
    - It's part of the Frameworks & Drivers layer
    - It creates the concrete implementations
    - It manages the dependency graph
    """

    def __init__(self, qp_max_iter: int = None):
        self.qp_max_iter = qp_max_iter or app_config.qp_max_iter
        self._model_repository: ModelRepository = None
        self._presenter: PresenterInterface = None

    @property
    def model_repository(self) -> ModelRepository:
        """Get model-file repository instance"""
        if self._model_repository is None:
            self._model_repository = ModelFileRepository()
        return self._model_repository

    @property
    def solver_factory(self) -> Callable[[], QPSolverInterface]:
        """Picklable factory of fresh QP solver workspaces"""
        return partial(ADMMQPSolver, ADMMSettings(max_iter=self.qp_max_iter))

    @property
    def presenter(self) -> PresenterInterface:
        """Get presenter instance"""
        if self._presenter is None:
            self._presenter = JSONPresenter()
        return self._presenter

    def artifact_writer(self, output_dir: str) -> ArtifactWriterInterface:
        """Get an artefact writer bound to an output directory"""
        return CSVArtifactWriter(output_dir)

    def reset(self):
        """Reset all dependencies (useful for testing)"""
        self._model_repository = None
        self._presenter = None


# Global container instance
container = Container()
