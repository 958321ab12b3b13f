import shlex
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple

from py_trees import behaviour

from src.app_logs import get_logger
from src.application.behaviour_tree.leaves import LEAF_REGISTRY
from src.application.behaviour_tree.nodes import (
    BUILDERS,
    COMPOSITE_KINDS,
    DECORATOR_KINDS,
    NodeKind,
)
from src.application.exceptions import TreeConstructionException, TreeFileException
from src.application.repositories.tree_repository import TreeRepository

logger = get_logger(__name__)

INDENT = 2


class _Node:
    def __init__(self, kind: NodeKind, name: str, options: Dict[str, str], line_number: int):
        self.kind = kind
        self.name = name
        self.options = options
        self.line_number = line_number
        self.children: List["_Node"] = []


def _parse_line(raw: str, line_number: int) -> Tuple[int, _Node]:
    stripped = raw.lstrip(" ")
    if stripped.startswith("\t"):
        raise TreeFileException("tabs are not allowed in indentation", line_number)
    indent = len(raw) - len(stripped)
    if indent % INDENT:
        raise TreeFileException(f"indentation must be a multiple of {INDENT} spaces", line_number)
    try:
        tokens = shlex.split(stripped, comments=True)
    except ValueError as exc:
        raise TreeFileException(f"cannot split line: {exc}", line_number) from exc
    if len(tokens) < 2:
        raise TreeFileException("expected '<kind> <name> [key=value ...]'", line_number)
    kind_token, name, *rest = tokens
    try:
        kind = NodeKind(kind_token.lower())
    except ValueError:
        raise TreeFileException(f"unknown node kind '{kind_token}'", line_number)
    options: Dict[str, str] = {}
    for token in rest:
        key, sep, value = token.partition("=")
        if not sep or not key or not value:
            raise TreeFileException(f"malformed option '{token}'", line_number)
        if key in options:
            raise TreeFileException(f"duplicate option '{key}'", line_number)
        options[key] = value
    return indent // INDENT, _Node(kind, name, options, line_number)


class TreeFileRepository(TreeRepository):
    """
    Indentation-based tree-file reader.

    One node per line, children indented two spaces deeper than their parent:
      selector "Root"
        memory_sequence "Task"
          leaf "Open Gripper" behaviour=open_gripper
          leaf "Move" behaviour=motion_control track=false
    Kinds are sequence, memory_sequence, selector, inverter,
    success_is_running, failure_is_running and leaf. Names with spaces are
    quoted. Leaf options other than `behaviour` go to the leaf factory.
    """

    def __init__(self, registry: Optional[dict] = None):
        self.registry = registry if registry is not None else LEAF_REGISTRY

    def load(self, path: str) -> behaviour.Behaviour:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise TreeFileException(f"cannot read tree file {path}: {exc}") from exc
        root = self.parse(text)
        logger.info("Tree loaded", path=str(path), root=root.name)
        return root

    def parse(self, text: str) -> behaviour.Behaviour:
        root: Optional[_Node] = None
        stack: List[_Node] = []
        for line_number, raw in enumerate(text.splitlines(), start=1):
            if not raw.strip() or raw.strip().startswith("#"):
                continue
            depth, node = _parse_line(raw.rstrip(), line_number)
            if root is None:
                if depth != 0:
                    raise TreeFileException("the root must not be indented", line_number)
                root = node
                stack = [node]
                continue
            if depth == 0:
                raise TreeFileException("a tree has exactly one root", line_number)
            if depth > len(stack):
                raise TreeFileException("indentation skips a level", line_number)
            del stack[depth:]
            parent = stack[-1]
            if parent.kind == NodeKind.LEAF:
                raise TreeFileException(f"leaf '{parent.name}' cannot have children", line_number)
            parent.children.append(node)
            stack.append(node)
        if root is None:
            raise TreeFileException("tree file is empty")
        return self._build(root)

    def _build(self, node: _Node) -> behaviour.Behaviour:
        if node.kind == NodeKind.LEAF:
            return self._leaf(node)
        if node.options:
            raise TreeFileException(f"'{node.kind.value}' takes no options", node.line_number)
        if not node.children:
            raise TreeFileException(f"'{node.name}' has no children", node.line_number)
        if node.kind in DECORATOR_KINDS and len(node.children) != 1:
            raise TreeFileException(
                f"decorator '{node.name}' takes exactly one child, got {len(node.children)}",
                node.line_number,
            )
        children = [self._build(child) for child in node.children]
        try:
            if node.kind in COMPOSITE_KINDS:
                return BUILDERS[node.kind](node.name, children)
            return BUILDERS[node.kind](node.name, children[0])
        except TreeConstructionException as exc:
            raise TreeFileException(str(exc), node.line_number) from exc

    def _leaf(self, node: _Node) -> behaviour.Behaviour:
        if node.children:
            raise TreeFileException(f"leaf '{node.name}' cannot have children", node.line_number)
        options = dict(node.options)
        behaviour_name = options.pop("behaviour", None)
        if behaviour_name is None:
            raise TreeFileException("leaf needs behaviour=<name>", node.line_number)
        creator = self.registry.get(behaviour_name)
        if creator is None:
            raise TreeFileException(f"unknown behaviour '{behaviour_name}'", node.line_number)
        try:
            return creator(node.name, options)
        except ValueError as exc:
            raise TreeFileException(f"behaviour '{behaviour_name}': {exc}", node.line_number) from exc


def build_tree_from_file(path: str, named_poses: Mapping[str, object]) -> behaviour.Behaviour:
    """Load a tree file and check that every pose it names is defined"""
    root = TreeFileRepository().load(path)
    referenced = {
        getattr(node, attribute)
        for node in root.iterate()
        for attribute in ("pose_name", "pickup_pose_name")
        if getattr(node, attribute, None) is not None
    }
    missing = sorted(referenced - set(named_poses))
    if missing:
        raise TreeConstructionException(f"Tree {path} names undefined pose(s): {', '.join(missing)}")
    return root
