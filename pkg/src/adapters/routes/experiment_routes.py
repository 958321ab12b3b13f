import json
from typing import Optional

import typer

from src.adapters.controllers.experiment_controller import ExperimentController
from src.adapters.di.container import container
from src.config.app_config import app_config

experiment_router = typer.Typer(
    name="holistic",
    help="Holistic mobile-manipulator controller: experiments and model tools.",
    no_args_is_help=True,
    add_completion=False,
)


def get_experiment_controller() -> ExperimentController:
    """Dependency injection for experiment controller"""
    return ExperimentController(container)


@experiment_router.command("run")
def run(
    experiment: str = typer.Option(..., "--experiment", help="exp1a|exp1b|exp1c|sweep_keps|sweep_jm|pickplace|custom"),
    model: str = typer.Option(app_config.model_path, "--model", help="Model file or bundled model name"),
    controller: str = typer.Option("both", "--controller", help="holistic|sequential|rrmc|both"),
    seed: int = typer.Option(0, "--seed"),
    out: str = typer.Option(app_config.output_dir, "--out", help="Artefact directory"),
    keps: Optional[float] = typer.Option(None, "--keps"),
    beta: Optional[float] = typer.Option(None, "--beta"),
    eta: Optional[float] = typer.Option(None, "--eta"),
    rho_i: Optional[float] = typer.Option(None, "--rho-i", help="Degrees"),
    rho_s: Optional[float] = typer.Option(None, "--rho-s", help="Degrees"),
    jm: Optional[str] = typer.Option(None, "--jm", help="arm_only|whole|zero"),
    trials: Optional[int] = typer.Option(None, "--trials"),
    budget: Optional[float] = typer.Option(None, "--budget", help="Seconds per goal"),
    threads: Optional[int] = typer.Option(None, "--threads"),
    tree: Optional[str] = typer.Option(None, "--tree", help="Tree file for pickplace"),
):
    """Run an experiment, write its artefacts and exit 0 only if every trend holds"""
    outcome = get_experiment_controller().run(
        {
            "model_path": model,
            "experiment": experiment,
            "controller": controller,
            "seed": seed,
            "output_dir": out,
            "keps": keps,
            "beta": beta,
            "eta": eta,
            "rho_i": rho_i,
            "rho_s": rho_s,
            "jm": jm,
            "trials": trials,
            "budget": budget,
            "threads": threads,
            "tree_path": tree,
        }
    )
    for line in outcome.verdicts:
        typer.echo(line, err=outcome.exit_code == 2)
    raise typer.Exit(code=outcome.exit_code)


@experiment_router.command("describe-model")
def describe_model(path: str = typer.Argument(app_config.model_path, help="Model file or bundled model name")):
    """Print the joint table of a model file"""
    controller = get_experiment_controller()
    try:
        typer.echo(json.dumps(controller.describe_model(path), indent=2))
    except Exception as e:
        error = controller.presenter.present_error(e)
        typer.echo(json.dumps(error, indent=2), err=True)
        raise typer.Exit(code=error["error"]["exit_code"])
