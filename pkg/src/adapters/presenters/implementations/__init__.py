from .json_presenter import JSONPresenter
from .csv_artifact_writer import CSVArtifactWriter

__all__ = ["JSONPresenter", "CSVArtifactWriter"]
