from .pose import Pose3, Twist
from .controller_gains import ControllerGains
from .tick_status import TickStatus

__all__ = [
    "Pose3",
    "Twist",
    "ControllerGains",
    "TickStatus",
]
