"""Forward data generation with ground-truth laws, observation masks and measurement noise."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

import numpy as np

from config.logging_config import format_record, setup_logger
from constitutive.base import ConstitutiveModel
from fem.interpolation import interpolate_displacement
from fem.reactions import reaction_force
from fem.solver import EquilibriumSolution, continuation_solve
from helpers.decorators import log_execution_time
from helpers.exceptions import ConfigError
from experiments.setups import Experiment, build_setup
from models.options_model import ContinuationOptions, NewtonOptions

LOG = setup_logger(__name__)


class ObservationMask(str, Enum):
    FULL_FIELD = "full"
    BOUNDARY_ONLY = "boundary"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class Observation:
    """Displacement measurements of one experiment at reference points (n, dim)."""
    experiment: int
    points: np.ndarray
    displacements: np.ndarray


@dataclass(frozen=True)
class ReactionObservation:
    experiment: int
    tag: str
    value: float


@dataclass(eq=False)
class ObservationSet:
    displacements: List[Observation] = field(default_factory=list)
    reactions: List[ReactionObservation] = field(default_factory=list)

    def for_experiment(self, index: int) -> Optional[Observation]:
        return next((o for o in self.displacements if o.experiment == index), None)

    def reactions_for(self, index: int) -> List[ReactionObservation]:
        return [r for r in self.reactions if r.experiment == index]

    @property
    def n_points(self) -> int:
        return sum(o.points.shape[0] for o in self.displacements)


@dataclass(eq=False)
class SyntheticDataset:
    """
    @param experiments: Experiment instances the data was generated on.
    @param solutions: Ground-truth equilibrium per experiment (empty for loaded datasets).
    @param observations: Noisy displacement and reaction observations.
    @param ground_truth: Name of the generating law.
    @param noise_sigma: Noise level; absolute for displacements, relative for reactions.
    @param noise_seed: Seed of the noise generator.
    @param mask: Observation mask.
    @param setup_seed: Seed the setup geometries were built with.
    @param desk_scale: Resolution preset of the meshes.
    """
    experiments: List[Experiment]
    solutions: List[EquilibriumSolution]
    observations: ObservationSet
    ground_truth: str
    noise_sigma: float
    noise_seed: int
    mask: ObservationMask
    setup_seed: int = 0
    desk_scale: bool = True

    @property
    def setup_id(self) -> int:
        return self.experiments[0].setup_id


def observation_nodes(experiment: Experiment, mask: ObservationMask) -> np.ndarray:
    mesh = experiment.mesh
    if ObservationMask(mask) is ObservationMask.CUSTOM:
        raise ConfigError("Custom observations are taken at given points, not at mesh nodes")
    if ObservationMask(mask) is ObservationMask.FULL_FIELD:
        return np.arange(mesh.n_nodes)
    return mesh.boundary_nodes()


def solve_experiments(experiments: List[Experiment], model: ConstitutiveModel, threads: int = 1,
                      continuation: ContinuationOptions = ContinuationOptions(),
                      newton: NewtonOptions = NewtonOptions()) -> List[EquilibriumSolution]:
    """
    Continuation solve of every experiment. Results are returned in experiment order.

    :raises ContinuationFailure: from the first failing experiment.
    """
    def solve(experiment: Experiment) -> EquilibriumSolution:
        sol = continuation_solve(experiment.space, model, experiment.load_value, continuation, newton)
        LOG.debug(format_record("Solved experiment", experiment=experiment.index, load=experiment.load_value,
                                iters=sol.newton_iters))
        return sol

    if threads <= 1:
        return [solve(e) for e in experiments]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(solve, experiments))


def observe(experiments: List[Experiment], solutions: List[EquilibriumSolution], model: ConstitutiveModel,
            mask: ObservationMask, noise_sigma: float, seed: int,
            custom_points: Optional[np.ndarray] = None) -> ObservationSet:
    """
    Sample nodal displacements through the mask and reactions on every Dirichlet tag, then add noise:
    N(0, sigma^2) per displacement component and a relative N(0, sigma^2) factor per reaction.
    Noise is drawn once, experiment by experiment, from a single generator.
    """
    if noise_sigma < 0:
        raise ConfigError(f"Noise level must be non-negative, got {noise_sigma}")
    rng = np.random.default_rng(seed)
    out = ObservationSet()
    for experiment, solution in zip(experiments, solutions):
        space = experiment.space
        full = space.expand(solution.dof_vector, solution.load_scale)
        if ObservationMask(mask) is ObservationMask.CUSTOM:
            if custom_points is None:
                raise ConfigError("A custom observation mask needs observation points")
            points = np.asarray(custom_points, dtype=float)
            exact = interpolate_displacement(space, full, points)
        else:
            nodes = observation_nodes(experiment, mask)
            points, exact = space.mesh.nodes[nodes], space.nodal(full)[nodes]
        measured = exact + rng.normal(0.0, noise_sigma, exact.shape) if noise_sigma > 0 else exact.copy()
        out.displacements.append(Observation(experiment.index, points.copy(), measured))
        for tag in experiment.bc.dirichlet_tags():
            value = reaction_force(space, model, solution, tag)
            if noise_sigma > 0:
                value *= 1.0 + noise_sigma * rng.standard_normal()
            out.reactions.append(ReactionObservation(experiment.index, tag, float(value)))
    return out


@log_execution_time
def generate_synthetic(experiments: List[Experiment], ground_truth: ConstitutiveModel,
                       mask: ObservationMask = ObservationMask.FULL_FIELD, noise_sigma: float = 0.0,
                       seed: int = 0, threads: int = 1, setup_seed: int = 0,
                       desk_scale: bool = True, custom_points: Optional[np.ndarray] = None,
                       continuation: ContinuationOptions = ContinuationOptions(),
                       newton: NewtonOptions = NewtonOptions()) -> SyntheticDataset:
    """
    Solve every experiment with the ground-truth law and record noisy observations.

    :raises ContinuationFailure: when an experiment cannot be solved.
    """
    if not experiments:
        raise ConfigError("No experiments to generate data for")
    solutions = solve_experiments(experiments, ground_truth, threads, continuation, newton)
    observations = observe(experiments, solutions, ground_truth, mask, noise_sigma, seed, custom_points)
    LOG.info(format_record("Generated dataset", setup=experiments[0].setup_id, experiments=len(experiments),
                           points=observations.n_points, reactions=len(observations.reactions),
                           noise=float(noise_sigma), mask=ObservationMask(mask).value))
    return SyntheticDataset(experiments, solutions, observations, getattr(ground_truth, "kind", "custom"),
                            float(noise_sigma), seed, ObservationMask(mask), setup_seed, desk_scale)


def reaction_table(dataset: SyntheticDataset) -> Dict[int, Dict[str, float]]:
    table: Dict[int, Dict[str, float]] = {}
    for r in dataset.observations.reactions:
        table.setdefault(r.experiment, {})[r.tag] = r.value
    return table


def training_experiments(dataset: SyntheticDataset, h: Optional[float] = None) -> List[Experiment]:
    """
    Experiments the inverse problem is solved on. With h set, the setup is re-meshed at that size while
    the observations stay at their generating-mesh points and are interpolated from the training mesh.

    :raises PointOutsideMesh: when an observation point falls outside the re-meshed domain.
    """
    if h is None:
        return dataset.experiments
    loads = tuple(dict.fromkeys(e.load_value for e in dataset.experiments))
    experiments = build_setup(dataset.setup_id, dataset.desk_scale, dataset.setup_seed, h, loads)
    if len(experiments) != len(dataset.experiments):
        raise ConfigError(f"Re-meshed setup has {len(experiments)} experiments, dataset has "
                          f"{len(dataset.experiments)}")
    LOG.info(format_record("Training on re-meshed setup", setup=dataset.setup_id, h=float(h),
                           nodes=experiments[0].mesh.n_nodes))
    return experiments
