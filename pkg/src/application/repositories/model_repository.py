from abc import ABC, abstractmethod
from typing import List

from src.entities.kinematic_model import KinematicModel


class ModelRepository(ABC):
    """
    Repository interface for KinematicModel definitions.
    """

    @abstractmethod
    def parse(self, text: str, name: str = "model") -> KinematicModel:
        """Build a validated model from a model description"""
        pass

    @abstractmethod
    def load(self, path: str) -> KinematicModel:
        """Load and parse a model from a file"""
        pass

    @abstractmethod
    def list_bundled(self) -> List[str]:
        """Paths of the model files shipped with the application"""
        pass
