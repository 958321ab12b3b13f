import typer

from src.app_logs import configure_logging
from src.config.app_config import app_config
from src.adapters.routes.experiment_routes import experiment_router

configure_logging(app_config.log_level)


def create_application() -> typer.Typer:
    return experiment_router


app = create_application()

if __name__ == "__main__":
    app()
