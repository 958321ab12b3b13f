"""
Behaviour-tree engine on top of py_trees.

Composites and decorators are py_trees classes; the builders here enforce
arity and single parenthood at construction time so ticking never meets a
malformed tree.
"""

from abc import abstractmethod
from enum import Enum
from typing import List, Optional, Sequence

from py_trees import behaviour, common, composites, decorators

from src.app_logs import get_logger
from src.application.behaviour_tree.blackboard import Blackboard
from src.application.exceptions import TreeConstructionException
from src.entities.value_objects.tick_status import TickStatus

logger = get_logger(__name__)

_TO_PY_TREES = {
    TickStatus.RUNNING: common.Status.RUNNING,
    TickStatus.SUCCESS: common.Status.SUCCESS,
    TickStatus.FAILURE: common.Status.FAILURE,
}
_FROM_PY_TREES = {value: key for key, value in _TO_PY_TREES.items()}


class NodeKind(str, Enum):
    SEQUENCE = "sequence"
    MEMORY_SEQUENCE = "memory_sequence"
    SELECTOR = "selector"
    SUCCESS_IS_RUNNING = "success_is_running"
    FAILURE_IS_RUNNING = "failure_is_running"
    INVERTER = "inverter"
    LEAF = "leaf"


COMPOSITE_KINDS = (NodeKind.SEQUENCE, NodeKind.MEMORY_SEQUENCE, NodeKind.SELECTOR)
DECORATOR_KINDS = (NodeKind.SUCCESS_IS_RUNNING, NodeKind.FAILURE_IS_RUNNING, NodeKind.INVERTER)


def to_py_trees(status: TickStatus) -> common.Status:
    return _TO_PY_TREES[TickStatus(status)]


def from_py_trees(status: common.Status) -> TickStatus:
    if status not in _FROM_PY_TREES:
        raise ValueError(f"Behaviour has not been ticked (status {status})")
    return _FROM_PY_TREES[status]


def _check_children(name: str, children: Sequence[behaviour.Behaviour]) -> List[behaviour.Behaviour]:
    children = list(children)
    if not children:
        raise TreeConstructionException(f"Composite '{name}' needs at least one child")
    seen = set()
    for child in children:
        if not isinstance(child, behaviour.Behaviour):
            raise TreeConstructionException(f"'{name}' child {child!r} is not a behaviour")
        if child.parent is not None or id(child) in seen:
            raise TreeConstructionException(
                f"Behaviour '{child.name}' already has a parent; a tree cannot share nodes"
            )
        seen.add(id(child))
    return children


def _check_child(name: str, child: behaviour.Behaviour) -> behaviour.Behaviour:
    if isinstance(child, (list, tuple)):
        if len(child) != 1:
            raise TreeConstructionException(
                f"Decorator '{name}' takes exactly one child, got {len(child)}"
            )
        child = child[0]
    return _check_children(name, [child])[0]


def sequence(name: str, children: Sequence[behaviour.Behaviour]) -> composites.Sequence:
    """Ticks children in order every tick; stops at the first non-success"""
    return composites.Sequence(name=name, memory=False, children=_check_children(name, children))


def memory_sequence(name: str, children: Sequence[behaviour.Behaviour]) -> composites.Sequence:
    """Resumes at the running child; succeeded children are not re-ticked within a pass"""
    return composites.Sequence(name=name, memory=True, children=_check_children(name, children))


def selector(name: str, children: Sequence[behaviour.Behaviour]) -> composites.Selector:
    return composites.Selector(name=name, memory=False, children=_check_children(name, children))


def inverter(name: str, child: behaviour.Behaviour) -> decorators.Inverter:
    return decorators.Inverter(name=name, child=_check_child(name, child))


def success_is_running(name: str, child: behaviour.Behaviour) -> decorators.SuccessIsRunning:
    return decorators.SuccessIsRunning(name=name, child=_check_child(name, child))


def failure_is_running(name: str, child: behaviour.Behaviour) -> decorators.FailureIsRunning:
    return decorators.FailureIsRunning(name=name, child=_check_child(name, child))


BUILDERS = {
    NodeKind.SEQUENCE: sequence,
    NodeKind.MEMORY_SEQUENCE: memory_sequence,
    NodeKind.SELECTOR: selector,
    NodeKind.SUCCESS_IS_RUNNING: success_is_running,
    NodeKind.FAILURE_IS_RUNNING: failure_is_running,
    NodeKind.INVERTER: inverter,
}


class Leaf(behaviour.Behaviour):
    """
    Base class of every leaf.

    Subclasses implement `run`. Exceptions never escape a tick: they are
    logged and turned into Failure. Each activation is recorded on the
    blackboard timeline in world time.
    """

    moves_robot = False

    def __init__(self, name: str):
        super().__init__(name=name)
        self.blackboard: Optional[Blackboard] = None
        self.tick_count = 0
        self._activation_start: Optional[float] = None

    def bind(self, blackboard: Blackboard) -> None:
        self.blackboard = blackboard

    def initialise(self) -> None:
        if self.blackboard is not None:
            self._activation_start = self.blackboard.world.time

    def update(self) -> common.Status:
        self.tick_count += 1
        try:
            status = TickStatus(self.run(self.blackboard))
        except Exception as exc:
            logger.warning(
                "Behaviour raised, returning Failure",
                behaviour=self.name,
                exception_type=type(exc).__name__,
                exception_message=str(exc),
            )
            status = TickStatus.FAILURE
        return to_py_trees(status)

    def terminate(self, new_status: common.Status) -> None:
        if self._activation_start is not None and self.blackboard is not None:
            self.blackboard.record_activation(
                self.name, self._activation_start, self.blackboard.world.time, self.moves_robot
            )
        self._activation_start = None

    @abstractmethod
    def run(self, blackboard: Optional[Blackboard]) -> TickStatus:
        """One tick of this behaviour"""
        pass


def bind(root: behaviour.Behaviour, blackboard: Optional[Blackboard]) -> None:
    for node in root.iterate():
        if isinstance(node, Leaf) and node.blackboard is not blackboard:
            node.bind(blackboard)


def tick(root: behaviour.Behaviour, blackboard: Optional[Blackboard] = None) -> TickStatus:
    """Propagate one tick from the root and return its status"""
    bind(root, blackboard)
    root.tick_once()
    return from_py_trees(root.status)
