from abc import ABC, abstractmethod


class RequestInterface(ABC):
    """Validated command-line request"""

    @abstractmethod
    def to_dict(self) -> dict:
        """JSON-safe view of the request, echoed into the run summary"""
        pass

    @abstractmethod
    def gain_overrides(self) -> dict:
        """Controller gain overrides in SI units; None keeps the default"""
        pass
