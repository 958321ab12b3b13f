from abc import ABC, abstractmethod
from typing import Any, Iterable, List


class ResponseInterface(ABC):
    """Result row DTO; the keys of `to_dict` are the artefact's column order"""

    @abstractmethod
    def to_dict(self) -> dict:
        pass

    @classmethod
    @abstractmethod
    def from_entity(cls, entity: Any) -> "ResponseInterface":
        """Create a response DTO from a result entity"""
        pass

    @classmethod
    def rows(cls, entities: Iterable[Any]) -> List[dict]:
        """Artefact rows for a batch of entities, in input order"""
        return [cls.from_entity(entity).to_dict() for entity in entities]
