from enum import Enum


class TickStatus(str, Enum):
    """Result of ticking a behaviour"""

    RUNNING = "Running"
    SUCCESS = "Success"
    FAILURE = "Failure"

    def __str__(self) -> str:
        return self.value
