import pytest
from py_trees import composites

from src.adapters.gateways.tree_file_repository import TreeFileRepository, build_tree_from_file
from src.application.behaviour_tree.leaves import LEAF_REGISTRY, MotionControl
from src.application.behaviour_tree.nodes import tick
from src.application.behaviour_tree.trees import build_pick_place_tree
from src.application.exceptions import TreeConstructionException, TreeFileException
from src.config.app_config import BUNDLED_TREES_DIR
from src.entities.value_objects.pose import Pose3
from src.entities.value_objects.tick_status import TickStatus
from tests.leaf_doubles import DOUBLES_REGISTRY, AlwaysSuccess, ScriptedStatus

BUNDLED_TREE = BUNDLED_TREES_DIR / "pick_place.tree"
POSES = {name: Pose3.identity() for name in ("init", "pickup", "dropoff")}
REGISTRY = {**LEAF_REGISTRY, **DOUBLES_REGISTRY}

SMALL = """
# retry until the scripted attempt succeeds
memory_sequence "Task"
  failure_is_running "Retry"
    leaf "Attempt" behaviour=scripted statuses=failure,success
  leaf "Done" behaviour=always_success  # trailing comment
"""


def shape(root):
    return [(type(node).__name__, node.name, getattr(node, "memory", None)) for node in root.iterate()]


def test_parse_small_tree():
    root = TreeFileRepository(REGISTRY).parse(SMALL)
    assert isinstance(root, composites.Sequence)
    assert root.memory
    attempt = root.children[0].decorated
    assert isinstance(attempt, ScriptedStatus)
    assert attempt.statuses == [TickStatus.FAILURE, TickStatus.SUCCESS]
    assert [tick(root) for _ in range(2)] == [TickStatus.RUNNING, TickStatus.SUCCESS]


def test_leaf_options_reach_the_factory():
    root = TreeFileRepository().parse('leaf "Track" behaviour=motion_control track=true\n')
    assert isinstance(root, MotionControl)
    assert root.track


def test_custom_registry():
    registry = {"noop": lambda name, options: AlwaysSuccess(name)}
    root = TreeFileRepository(registry).parse('selector "Root"\n  leaf "Noop" behaviour=noop\n')
    assert tick(root) == TickStatus.SUCCESS
    with pytest.raises(TreeFileException):
        TreeFileRepository(registry).parse('leaf "Open" behaviour=open_gripper\n')


def test_bundled_tree_matches_built_tree():
    loaded = TreeFileRepository().load(str(BUNDLED_TREE))
    assert shape(loaded) == shape(build_pick_place_tree(POSES))


def test_build_tree_from_file_checks_poses():
    root = build_tree_from_file(str(BUNDLED_TREE), POSES)
    assert root.name == "Root"
    with pytest.raises(TreeConstructionException) as excinfo:
        build_tree_from_file(str(BUNDLED_TREE), {"init": Pose3.identity()})
    assert "dropoff" in str(excinfo.value)


@pytest.mark.parametrize(
    "text, line",
    [
        ('selector "Root"\n\tleaf "A" behaviour=always_success\n', 2),
        ('selector "Root"\n   leaf "A" behaviour=always_success\n', 2),
        ('selector\n', 1),
        ('parallel "Root"\n', 1),
        ('selector "Root"\n  leaf "A" behaviour\n', 2),
        ('selector "Root"\n  leaf "A" behaviour=always_success behaviour=always_failure\n', 2),
        ('  selector "Root"\n', 1),
        ('leaf "A" behaviour=always_success\nleaf "B" behaviour=always_success\n', 2),
        ('selector "Root"\n    leaf "A" behaviour=always_success\n', 2),
        ('selector "Root"\n  leaf "A" behaviour=always_success\n    leaf "B" behaviour=always_success\n', 3),
        ('selector "Root" memory=true\n  leaf "A" behaviour=always_success\n', 1),
        ('sequence "Root"\n  selector "Empty"\n', 2),
        ('inverter "Not"\n  leaf "A" behaviour=always_success\n  leaf "B" behaviour=always_success\n', 1),
        ('sequence "Root"\n  leaf "A"\n', 2),
        ('sequence "Root"\n  leaf "A" behaviour=teleport\n', 2),
        ('sequence "Root"\n\n  leaf "A" behaviour=scripted\n', 3),
        ('sequence "Root"\n  leaf "A" behaviour=distance_to_goal threshold=-1\n', 2),
        ('sequence "Root\n', 1),
    ],
)
def test_errors_carry_line_number(text, line):
    with pytest.raises(TreeFileException) as excinfo:
        TreeFileRepository(REGISTRY).parse(text)
    assert excinfo.value.line_number == line
    assert str(excinfo.value).startswith(f"line {line}:")


def test_empty_file():
    with pytest.raises(TreeFileException):
        TreeFileRepository().parse("# nothing here\n\n")


def test_missing_file(tmp_path):
    with pytest.raises(TreeFileException):
        TreeFileRepository().load(str(tmp_path / "absent.tree"))


def test_load_from_disk(tmp_path):
    path = tmp_path / "small.tree"
    path.write_text(SMALL)
    assert TreeFileRepository(REGISTRY).load(str(path)).name == "Task"


def test_default_registry_has_no_fixed_outcome_leaves():
    with pytest.raises(TreeFileException):
        TreeFileRepository().parse('leaf "A" behaviour=always_success\n')
