"""
Pick-and-place use cases.

In Clean Architecture:
- These use cases are part of the Application Business Rules layer
- They drive the pick-and-place behaviour tree inside the simulator
- They report task-level PickPlaceMetrics
"""

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from py_trees import behaviour

from src.app_logs import get_logger
from src.application.behaviour_tree.blackboard import Blackboard
from src.application.behaviour_tree.grasp_source import ScriptedGraspSource
from src.application.behaviour_tree.nodes import tick
from src.application.behaviour_tree.trees import build_pick_place_tree
from src.application.exceptions import ExperimentConfigurationException
from src.application.use_cases.experiment_use_cases import TrendCheck
from src.application.use_cases.motion_control_use_cases import ControllerFactory, ControllerKind
from src.entities.kinematic_model import KinematicModel
from src.entities.metrics import PickPlaceMetrics
from src.entities.value_objects.pose import Pose3
from src.entities.world_state import WorldObject, WorldState

logger = get_logger(__name__)

TreeBuilder = Callable[[Mapping[str, Pose3]], behaviour.Behaviour]


@dataclass(frozen=True)
class PickPlaceSettings:
    """Layout and pacing of the pick-and-place task; lengths in m, times in s"""

    objects_per_run: int = 10
    grasp_failure_probability: float = 0.115
    tick_rate: float = 20.0
    control_rate: float = 200.0
    pickup: Tuple[float, float, float] = (2.0, 0.0, 0.75)
    dropoff: Tuple[float, float, float] = (2.0, 3.0, 0.75)
    object_height: float = 0.5
    object_spread: float = 0.1
    max_sim_time: float = 1200.0
    max_wall_time: Optional[float] = None

    def __post_init__(self):
        if self.objects_per_run < 1:
            raise ValueError("objects_per_run must be >= 1")
        if not 0.0 <= self.grasp_failure_probability <= 1.0:
            raise ValueError("grasp_failure_probability must be in [0, 1]")
        if self.tick_rate <= 0 or self.control_rate < self.tick_rate:
            raise ValueError("Need 0 < tick_rate <= control_rate")
        if self.max_sim_time <= 0:
            raise ValueError("max_sim_time must be positive")


def pick_place_layout(model: KinematicModel, start: WorldState, settings: PickPlaceSettings) -> Dict[str, Pose3]:
    """Named poses; pickup and dropoff keep the start hand orientation"""
    rotation = model.fkine(start.configuration).rotation
    x, y, theta = start.base_pose
    return {
        "init": Pose3.planar(x, y, theta),
        "pickup": Pose3(rotation=rotation.copy(), translation=np.array(settings.pickup, dtype=float)),
        "dropoff": Pose3(rotation=rotation.copy(), translation=np.array(settings.dropoff, dtype=float)),
    }


def spawn_objects(rng: np.random.Generator, settings: PickPlaceSettings) -> List[WorldObject]:
    """Objects scattered under the pickup pose"""
    objects = []
    for index in range(settings.objects_per_run):
        offset = rng.uniform(-settings.object_spread, settings.object_spread, size=2)
        position = np.array(
            [settings.pickup[0] + offset[0], settings.pickup[1] + offset[1], settings.object_height]
        )
        objects.append(WorldObject(id=index, pose=Pose3.trans(*position)))
    return objects


class RunPickPlaceUseCase:
    """One run of the repeating pick-and-place tree until every object is placed"""

    def __init__(
        self,
        factory: ControllerFactory,
        settings: Optional[PickPlaceSettings] = None,
        tree_builder: TreeBuilder = build_pick_place_tree,
    ):
        self.factory = factory
        self.settings = settings or PickPlaceSettings()
        self.tree_builder = tree_builder

    def build_blackboard(self, seed: int) -> Blackboard:
        settings = self.settings
        model = self.factory.model
        objects = spawn_objects(np.random.default_rng([seed, 1]), settings)
        world = WorldState.create(model, objects=objects)
        return Blackboard(
            world=world,
            model=model,
            controller=self.factory.create(ControllerKind.HOLISTIC),
            gains=self.factory.gains,
            drive_settings=self.factory.sequential_settings,
            named_poses=pick_place_layout(model, world, settings),
            seed=seed,
            grasp_source=ScriptedGraspSource(settings.grasp_failure_probability),
            control_rate=settings.control_rate,
            tick_rate=settings.tick_rate,
        )

    def execute(self, seed: int = 0) -> PickPlaceMetrics:
        settings = self.settings
        bb = self.build_blackboard(seed)
        root = self.tree_builder(bb.named_poses)
        period = 1.0 / settings.tick_rate
        wall_start = time.monotonic()
        incomplete = False
        run_logger = logger.bind(seed=seed)
        run_logger.info("Pick-and-place run started", objects=settings.objects_per_run)

        while bb.stats.placements < settings.objects_per_run:
            tick_start = bb.world.time
            tick(root, bb)
            # A tick without motion still lasts one tick period.
            if bb.world.time < tick_start + period:
                bb.world = replace(bb.world, time=tick_start + period)
            wall_elapsed = time.monotonic() - wall_start
            if bb.world.time > settings.max_sim_time or (
                settings.max_wall_time is not None and wall_elapsed > settings.max_wall_time
            ):
                incomplete = True
                run_logger.warning(
                    "Pick-and-place run incomplete",
                    placements=bb.stats.placements,
                    sim_time=round(bb.world.time, 2),
                )
                break

        stats = bb.stats
        metrics = PickPlaceMetrics(
            objects=settings.objects_per_run,
            placements=stats.placements,
            attempts=stats.attempts,
            grasp_times=tuple(stats.grasp_times),
            pick_place_times=tuple(stats.pick_place_times),
            max_idle_gap=bb.max_idle_gap(),
            unrecovered_errors=stats.raised_errors - stats.recovered_errors,
            recovered_errors=stats.recovered_errors,
            incomplete=incomplete,
            sim_time=bb.world.time,
        )
        run_logger.info(
            "Pick-and-place run finished",
            placements=metrics.placements,
            attempts=metrics.attempts,
            sim_time=round(metrics.sim_time, 2),
        )
        return metrics


def run_pick_place_trial(
    args: Tuple[int, int, ControllerFactory, PickPlaceSettings, TreeBuilder]
) -> Tuple[int, PickPlaceMetrics]:
    index, seed, factory, settings, tree_builder = args
    return index, RunPickPlaceUseCase(factory, settings, tree_builder).execute(seed)


class RunPickPlaceSeriesUseCase:
    """Independent seeded runs, optionally on a process pool"""

    def __init__(
        self,
        factory: ControllerFactory,
        settings: Optional[PickPlaceSettings] = None,
        threads: int = 1,
        tree_builder: TreeBuilder = build_pick_place_tree,
    ):
        if threads < 1:
            raise ExperimentConfigurationException("threads must be >= 1")
        self.factory = factory
        self.settings = settings or PickPlaceSettings()
        self.threads = threads
        self.tree_builder = tree_builder

    def execute(self, seed: int = 0, n_runs: int = 10) -> List[PickPlaceMetrics]:
        if n_runs < 1:
            raise ExperimentConfigurationException("n_runs must be >= 1")
        jobs = [
            (index, seed * 1000 + index, self.factory, self.settings, self.tree_builder)
            for index in range(n_runs)
        ]
        if self.threads == 1:
            results = [run_pick_place_trial(job) for job in jobs]
        else:
            with ProcessPoolExecutor(max_workers=self.threads) as executor:
                results = list(executor.map(run_pick_place_trial, jobs))
        return [metrics for _, metrics in sorted(results, key=lambda item: item[0])]


def check_pick_place(
    runs: Sequence[PickPlaceMetrics], attempt_ratio: float = 1.4, max_idle_gap: float = 0.1
) -> List[TrendCheck]:
    objects = sum(run.objects for run in runs)
    placements = sum(run.placements for run in runs)
    attempts = sum(run.attempts for run in runs)
    unrecovered = sum(run.unrecovered_errors for run in runs)
    idle = max((run.max_idle_gap for run in runs), default=0.0)
    return [
        TrendCheck("every object placed", placements == objects, f"{placements}/{objects}"),
        TrendCheck(
            "grasp attempts within band",
            objects <= attempts <= attempt_ratio * objects,
            f"{attempts} attempts for {objects} objects",
        ),
        TrendCheck("no unrecovered errors", unrecovered == 0, f"{unrecovered} unrecovered"),
        TrendCheck("no idle gap between behaviours", idle <= max_idle_gap + 1e-9, f"max gap {idle:.3f} s"),
    ]
