import pytest
from py_trees import common

from src.application.behaviour_tree.nodes import (
    Leaf,
    failure_is_running,
    from_py_trees,
    inverter,
    memory_sequence,
    selector,
    sequence,
    success_is_running,
    tick,
    to_py_trees,
)
from src.application.exceptions import TreeConstructionException
from src.entities.value_objects.tick_status import TickStatus
from tests.leaf_doubles import AlwaysFailure, AlwaysRunning, AlwaysSuccess, ScriptedStatus

S, F, R = TickStatus.SUCCESS, TickStatus.FAILURE, TickStatus.RUNNING


class ExplodingLeaf(Leaf):
    def run(self, blackboard):
        raise RuntimeError("sensor offline")


def test_status_mapping():
    assert to_py_trees(S) == common.Status.SUCCESS
    assert from_py_trees(common.Status.RUNNING) == R
    with pytest.raises(ValueError):
        from_py_trees(common.Status.INVALID)


def test_sequence_returns_first_non_success():
    assert tick(sequence("s", [AlwaysSuccess("a"), AlwaysSuccess("b")])) == S
    assert tick(sequence("s", [AlwaysSuccess("a"), AlwaysFailure("b")])) == F
    assert tick(sequence("s", [AlwaysSuccess("a"), AlwaysRunning("b")])) == R


def test_selector_short_circuits_on_success():
    second = AlwaysSuccess("b")
    root = selector("sel", [AlwaysSuccess("a"), second])
    assert tick(root) == S
    assert second.tick_count == 0

    assert tick(selector("sel", [AlwaysFailure("a"), AlwaysFailure("b")])) == F
    assert tick(selector("sel", [AlwaysFailure("a"), AlwaysRunning("b")])) == R


def test_memory_sequence_starts_fresh_after_completion():
    first = ScriptedStatus("A", [S, F])
    second = AlwaysSuccess("B")
    root = memory_sequence("mem", [first, second])

    assert tick(root) == S
    assert (first.tick_count, second.tick_count) == (1, 1)
    assert tick(root) == F
    assert (first.tick_count, second.tick_count) == (2, 1)


def test_memory_sequence_never_reticks_succeeded_child():
    first = AlwaysSuccess("A")
    second = ScriptedStatus("B", [R, R, S])
    root = memory_sequence("mem", [first, second])
    assert [tick(root) for _ in range(3)] == [R, R, S]
    assert first.tick_count == 1
    assert second.tick_count == 3


def test_plain_sequence_reticks_every_child():
    first = AlwaysSuccess("A")
    root = sequence("seq", [first, ScriptedStatus("B", [R, R, S])])
    for _ in range(3):
        tick(root)
    assert first.tick_count == 3


def test_inverter():
    assert tick(inverter("inv", AlwaysSuccess("a"))) == F
    assert tick(inverter("inv", AlwaysFailure("a"))) == S


def test_success_is_running_repeats():
    leaf = AlwaysSuccess("a")
    root = success_is_running("repeat", leaf)
    assert [tick(root) for _ in range(3)] == [R, R, R]
    assert leaf.tick_count == 3
    assert tick(success_is_running("repeat", AlwaysFailure("b"))) == F


def test_failure_is_running_retries_until_success():
    leaf = ScriptedStatus("attempt", [F, F, S])
    root = failure_is_running("retry", leaf)
    assert [tick(root) for _ in range(3)] == [R, R, S]


@pytest.mark.parametrize("decorate", [inverter, success_is_running, failure_is_running])
def test_decorators_pass_running_through(decorate):
    assert tick(decorate("d", AlwaysRunning("a"))) == R


def test_decorator_arity():
    with pytest.raises(TreeConstructionException):
        inverter("inv", [AlwaysSuccess("a"), AlwaysSuccess("b")])
    assert tick(inverter("inv", [AlwaysFailure("a")])) == S


def test_composite_needs_children():
    with pytest.raises(TreeConstructionException):
        sequence("empty", [])
    with pytest.raises(TreeConstructionException):
        selector("bad", ["not a behaviour"])


def test_nodes_cannot_be_shared():
    leaf = AlwaysSuccess("a")
    sequence("first", [leaf])
    with pytest.raises(TreeConstructionException):
        sequence("second", [leaf])
    other = AlwaysSuccess("b")
    with pytest.raises(TreeConstructionException):
        selector("twice", [other, other])


def test_leaf_exception_becomes_failure():
    leaf = ExplodingLeaf("boom")
    assert tick(leaf) == F
    assert tick(selector("sel", [ExplodingLeaf("boom"), AlwaysSuccess("fallback")])) == S


def test_scripted_status_needs_statuses():
    with pytest.raises(ValueError):
        ScriptedStatus("empty", [])


def test_ticking_is_deterministic():
    def build():
        return selector(
            "root",
            [
                memory_sequence("task", [ScriptedStatus("a", [R, S, F]), ScriptedStatus("b", [S, R, S])]),
                failure_is_running("retry", ScriptedStatus("c", [F, S])),
            ],
        )

    first, second = build(), build()
    assert [tick(first) for _ in range(6)] == [tick(second) for _ in range(6)]
