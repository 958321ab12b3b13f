import json
import math
from pathlib import Path
from typing import Sequence

import pandas as pd

from src.adapters.presenters.interfaces.presenter_interface import ArtifactWriterInterface
from src.app_logs import get_logger

logger = get_logger(__name__)


def _json_safe(value):
    if isinstance(value, dict):
        return {key: _json_safe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(item) for item in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if hasattr(value, "item"):
        return _json_safe(value.item())
    return value


class CSVArtifactWriter(ArtifactWriterInterface):
    """
    Writes CSV tables and JSON summaries under one output directory.

    Output is a pure function of the data: no timestamps, fixed column order,
    so two runs with the same seed produce byte-identical files.
    """

    def __init__(self, output_dir: str):
        self.output_dir = Path(output_dir)

    def _path(self, name: str, suffix: str) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        return self.output_dir / f"{name}{suffix}"

    def write_rows(self, name: str, rows: Sequence[dict]) -> Path:
        return self.write_frame(name, pd.DataFrame(list(rows)))

    def write_frame(self, name: str, frame: pd.DataFrame) -> Path:
        path = self._path(name, ".csv")
        frame.to_csv(path, index=False, float_format="%.10g")
        logger.info("Artefact written", path=str(path), rows=len(frame))
        return path

    def write_json(self, name: str, data: dict) -> Path:
        path = self._path(name, ".json")
        path.write_text(json.dumps(_json_safe(data), indent=2, sort_keys=True) + "\n")
        logger.info("Artefact written", path=str(path))
        return path
