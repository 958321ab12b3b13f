import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

BUNDLED_MODELS_DIR = Path(__file__).resolve().parent / "models"
BUNDLED_TREES_DIR = Path(__file__).resolve().parent / "trees"


class AppConfig:
    """
    Application configuration for the mobile-manipulator controller.

    In Clean Architecture:
    - This is part of the Frameworks & Drivers layer
    - It handles environment-specific configuration
    - It centralizes all configuration values
    """

    def __init__(self):
        # Logging Configuration
        self.log_level = os.getenv("LOG_LEVEL", "INFO")
        self.log_format = os.getenv(
            "LOG_FORMAT",
            "%(levelname)s:%(message)s:%(pathname)s:%(funcName)s:%(lineno)d",
        )

        # Execution Configuration
        self.threads = max(1, int(os.getenv("HOLISTIC_THREADS", str(os.cpu_count() or 1))))
        self.model_path = os.getenv(
            "HOLISTIC_MODEL_PATH", str(BUNDLED_MODELS_DIR / "frankie.model")
        )
        self.output_dir = os.getenv("HOLISTIC_OUTPUT_DIR", "./results")

        # Control Configuration
        self.control_rate = float(os.getenv("HOLISTIC_CONTROL_RATE", "200"))
        self.tick_rate = float(os.getenv("HOLISTIC_TICK_RATE", "20"))
        self.qp_max_iter = int(os.getenv("HOLISTIC_QP_MAX_ITER", "4000"))
        self.budget = float(os.getenv("HOLISTIC_BUDGET", "30"))

    @property
    def control_dt(self) -> float:
        return 1.0 / self.control_rate

    def __str__(self) -> str:
        return (
            f"AppConfig(model_path={self.model_path}, threads={self.threads}, "
            f"log_level={self.log_level})"
        )


# Global application configuration instance
app_config = AppConfig()
