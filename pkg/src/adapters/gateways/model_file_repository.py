import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.app_logs import get_logger
from src.application.exceptions import ModelParseException, ModelValidationException
from src.application.repositories.model_repository import ModelRepository
from src.config.app_config import BUNDLED_MODELS_DIR
from src.entities.kinematic_model import (
    BaseKind,
    FixedElement,
    JointDesc,
    JointKind,
    KinematicModel,
)
from src.entities.value_objects.pose import Pose3

logger = get_logger(__name__)

_PI_NUMBER = re.compile(
    r"^(?P<sign>[+-]?)(?:(?P<coef>[0-9.eE+-]+)\*)?pi(?:/(?P<div>[0-9.eE+-]+))?$"
)
_AXES = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}
_BASE_KINDS = {
    "nonholonomic": BaseKind.NONHOLONOMIC,
    "differential": BaseKind.NONHOLONOMIC,
    "omnidirectional": BaseKind.OMNIDIRECTIONAL,
    "omni": BaseKind.OMNIDIRECTIONAL,
}
_JOINT_KINDS = {"revolute": JointKind.REVOLUTE, "prismatic": JointKind.PRISMATIC}


def parse_number(token: str, line_number: int) -> float:
    """Float literal, or a multiple or fraction of pi (pi, -pi/2, 0.25*pi)"""
    try:
        return float(token)
    except ValueError:
        pass
    match = _PI_NUMBER.match(token)
    if match is None:
        raise ModelParseException(f"invalid number '{token}'", line_number)
    try:
        value = np.pi * float(match.group("coef") or 1.0)
        if match.group("div"):
            value /= float(match.group("div"))
    except (ValueError, ZeroDivisionError):
        raise ModelParseException(f"invalid number '{token}'", line_number)
    return -value if match.group("sign") == "-" else value


def _split_options(
    tokens: List[str], line_number: int
) -> Tuple[List[str], Dict[str, str]]:
    positional, options = [], {}
    for token in tokens:
        if "=" in token:
            key, _, value = token.partition("=")
            if not key or not value:
                raise ModelParseException(f"malformed option '{token}'", line_number)
            if key in options:
                raise ModelParseException(f"duplicate option '{key}'", line_number)
            options[key] = value
        else:
            positional.append(token)
    return positional, options


def _pose(tokens: List[str], directive: str, line_number: int) -> Pose3:
    if len(tokens) not in (3, 6):
        raise ModelParseException(
            f"'{directive}' expects tx ty tz [rx ry rz], got {len(tokens)} values", line_number
        )
    values = [parse_number(token, line_number) for token in tokens]
    rpy = values[3:] if len(values) == 6 else None
    return Pose3.from_xyz_rpy(values[:3], rpy)


class ModelFileRepository(ModelRepository):
    """
    Line-oriented model-file reader.

    Directives (one per line, `#` starts a comment):
      name <identifier>
      base nonholonomic|omnidirectional R=<m> W=<m> [vmax=<m/s>] [wmax=<rad/s>]
      mount tx ty tz [rx ry rz]
      fixed tx ty tz [rx ry rz]
      joint revolute|prismatic axis=x|y|z qmin=<v> qmax=<v> qdmax=<v>
      tool tx ty tz [rx ry rz]
      ready q1 ... qn
    Rotations are roll/pitch/yaw applied as Rz . Ry . Rx after the translation.
    """

    def __init__(self, models_dir: Optional[Path] = None):
        self.models_dir = Path(models_dir) if models_dir else BUNDLED_MODELS_DIR

    def load(self, path: str) -> KinematicModel:
        file_path = Path(path)
        if not file_path.is_file():
            candidate = self.models_dir / path
            if not candidate.is_file():
                candidate = self.models_dir / f"{path}.model"
            file_path = candidate
        try:
            text = file_path.read_text()
        except OSError as exc:
            raise ModelParseException(f"cannot read model file {path}: {exc}") from exc
        model = self.parse(text, name=file_path.stem)
        logger.info("Model loaded", path=str(file_path), name=model.name, n=model.n)
        return model

    def list_bundled(self) -> List[str]:
        return sorted(str(path) for path in self.models_dir.glob("*.model"))

    def parse(self, text: str, name: str = "model") -> KinematicModel:
        base_kind: Optional[BaseKind] = None
        wheel_radius, wheel_separation = 0.1, 0.5
        base_qd_max = (1.0, 1.0)
        mount = Pose3.identity()
        tool = Pose3.identity()
        elements = []
        ready = None
        seen = set()

        for line_number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            directive, *tokens = line.split()
            directive = directive.lower()

            if directive in ("name", "base", "mount", "tool", "ready"):
                if directive in seen:
                    raise ModelParseException(f"duplicate '{directive}' directive", line_number)
                seen.add(directive)

            if directive == "name":
                if len(tokens) != 1:
                    raise ModelParseException("'name' expects one identifier", line_number)
                name = tokens[0]
            elif directive == "base":
                positional, options = _split_options(tokens, line_number)
                if len(positional) != 1 or positional[0].lower() not in _BASE_KINDS:
                    raise ModelParseException(
                        "'base' expects nonholonomic or omnidirectional", line_number
                    )
                base_kind = _BASE_KINDS[positional[0].lower()]
                unknown = set(options) - {"R", "W", "vmax", "wmax"}
                if unknown:
                    raise ModelParseException(
                        f"unknown base option(s): {', '.join(sorted(unknown))}", line_number
                    )
                wheel_radius = parse_number(options.get("R", "0.1"), line_number)
                wheel_separation = parse_number(options.get("W", "0.5"), line_number)
                base_qd_max = (
                    parse_number(options.get("vmax", "1.0"), line_number),
                    parse_number(options.get("wmax", "1.0"), line_number),
                )
            elif directive == "mount":
                mount = _pose(tokens, directive, line_number)
            elif directive == "fixed":
                elements.append(FixedElement(_pose(tokens, directive, line_number)))
            elif directive == "tool":
                tool = _pose(tokens, directive, line_number)
            elif directive == "joint":
                joint_count = sum(isinstance(e, JointDesc) for e in elements)
                elements.append(self._joint(tokens, line_number, joint_count + 1))
            elif directive == "ready":
                if not tokens:
                    raise ModelParseException("'ready' expects joint values", line_number)
                ready = np.array([parse_number(token, line_number) for token in tokens])
            else:
                raise ModelParseException(f"unknown directive '{directive}'", line_number)

        try:
            return KinematicModel(
                base_kind=base_kind or BaseKind.NONHOLONOMIC,
                base_to_arm=mount,
                elements=tuple(elements),
                tool=tool,
                wheel_radius=wheel_radius,
                wheel_separation=wheel_separation,
                base_qd_max=base_qd_max,
                ready=ready,
                name=name,
            )
        except ValueError as exc:
            raise ModelValidationException(f"Invalid model '{name}': {exc}") from exc

    def _joint(self, tokens: List[str], line_number: int, index: int) -> JointDesc:
        positional, options = _split_options(tokens, line_number)
        if len(positional) != 1 or positional[0].lower() not in _JOINT_KINDS:
            raise ModelParseException("'joint' expects revolute or prismatic", line_number)
        missing = {"axis", "qmin", "qmax", "qdmax"} - set(options)
        if missing:
            raise ModelParseException(
                f"joint is missing option(s): {', '.join(sorted(missing))}", line_number
            )
        unknown = set(options) - {"axis", "qmin", "qmax", "qdmax", "name"}
        if unknown:
            raise ModelParseException(
                f"unknown joint option(s): {', '.join(sorted(unknown))}", line_number
            )
        axis = options["axis"].lower()
        if axis not in _AXES:
            raise ModelParseException(f"axis must be x, y or z, got '{axis}'", line_number)
        try:
            return JointDesc(
                kind=_JOINT_KINDS[positional[0].lower()],
                axis=np.array(_AXES[axis]),
                q_min=parse_number(options["qmin"], line_number),
                q_max=parse_number(options["qmax"], line_number),
                qd_max=parse_number(options["qdmax"], line_number),
                name=options.get("name", f"q{index}"),
            )
        except ValueError as exc:
            raise ModelValidationException(f"line {line_number}: {exc}") from exc
