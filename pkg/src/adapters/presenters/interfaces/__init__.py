from .presenter_interface import ArtifactWriterInterface, PresenterInterface

__all__ = ["ArtifactWriterInterface", "PresenterInterface"]
