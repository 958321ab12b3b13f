from abc import ABC, abstractmethod

from py_trees import behaviour


class TreeRepository(ABC):
    """
    Repository interface for behaviour-tree definitions.
    """

    @abstractmethod
    def parse(self, text: str) -> behaviour.Behaviour:
        """Build a tree from a tree description and return its root"""
        pass

    @abstractmethod
    def load(self, path: str) -> behaviour.Behaviour:
        """Load and parse a tree from a file"""
        pass
