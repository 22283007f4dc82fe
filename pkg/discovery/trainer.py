"""Quasi-Newton training with equilibrium-failure rejection, multi-seed restarts and grid search."""

from dataclasses import dataclass, field
from itertools import product
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from config.consts import (DESK_GRID_ISOCHORIC, DESK_GRID_LAYERS, DESK_GRID_NEURONS, DESK_GRID_SIGMA_INIT,
                           DESK_GRID_SKIP, DESK_GRID_W_SCALE, GRID_ISOCHORIC, GRID_LAYERS, GRID_NEURONS,
                           GRID_SIGMA_INIT, GRID_SKIP, GRID_W_SCALE, N_SEEDS)
from config.logging_config import format_record, setup_logger
from constitutive.base import ConstitutiveModel
from constitutive.initialization import init_model
from discovery.loss import DiscoveryProblem, LossBreakdown
from discovery.run_dir import RunDirectory
from fem.solver import EquilibriumSolution
from helpers.decorators import log_execution_time
from helpers.exceptions import SolveFailure, TrainingStalled
from models.architecture_model import HnnArchitecture
from models.options_model import BfgsOptions

LOG = setup_logger(__name__)

# curvature condition s.y > CURVATURE_TOL |s| |y|
CURVATURE_TOL = 1e-12


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    loss: float
    displacement_term: float
    reaction_term: float
    step: float
    rejections: int
    grad_norm: float
    newton_iters: Tuple[int, ...]


@dataclass(eq=False)
class TrainerState:
    """
    @param theta: Raw parameter vector.
    @param inverse_hessian: Dense BFGS inverse-Hessian approximation.
    @param loss: Loss at theta.
    @param gradient: Adjoint gradient at theta.
    @param warm_starts: Converged equilibrium of every experiment at theta.
    @param history: Accepted epochs, entry 0 is the initial point.
    @param epoch: Accepted epochs so far.
    @param rejections: Trial steps rejected because an equilibrium solve failed.
    """
    theta: np.ndarray
    inverse_hessian: np.ndarray
    loss: LossBreakdown
    gradient: np.ndarray
    warm_starts: List[EquilibriumSolution]
    history: List[EpochRecord] = field(default_factory=list)
    epoch: int = 0
    rejections: int = 0


@dataclass(eq=False)
class TrainingResult:
    model: ConstitutiveModel
    loss: LossBreakdown
    history: List[EpochRecord]
    status: str
    seed: Optional[int] = None
    warm_starts: List[EquilibriumSolution] = field(default_factory=list)

    @property
    def final_loss(self) -> float:
        return self.loss.total


def _record(epoch, loss: LossBreakdown, step, rejections, grad, solutions) -> EpochRecord:
    return EpochRecord(epoch, loss.total, loss.displacement_term, loss.reaction_term, float(step), rejections,
                       float(np.linalg.norm(grad)), tuple(s.newton_iters for s in solutions))


def bfgs_update(H: np.ndarray, s: np.ndarray, y: np.ndarray) -> Optional[np.ndarray]:
    """Inverse-Hessian BFGS update, None when the curvature condition fails."""
    sy = float(s @ y)
    if not sy > CURVATURE_TOL * np.linalg.norm(s) * np.linalg.norm(y):
        return None
    rho = 1.0 / sy
    V = np.eye(s.size) - rho * np.outer(s, y)
    return V @ H @ V.T + rho * np.outer(s, s)


def initial_state(model: ConstitutiveModel, problem: DiscoveryProblem) -> TrainerState:
    """
    Equilibria by load continuation and the gradient at the starting parameters.

    :raises TrainingStalled: when the starting model has no equilibrium for some experiment.
    """
    try:
        loss, solutions = problem.evaluate(model)
    except SolveFailure as e:
        raise TrainingStalled(f"No equilibrium at the initial parameters: {e}")
    grad = problem.gradient(model, solutions)
    g_norm = float(np.linalg.norm(grad))
    H = np.eye(model.n_params) * (1.0 / g_norm if g_norm > 1.0 else 1.0)
    state = TrainerState(model.parameter_vector().copy(), H, loss, grad, solutions)
    state.history.append(_record(0, loss, 0.0, 0, grad, solutions))
    return state


def _window_stop(history: List[EpochRecord], window: int, rel_improvement: float) -> bool:
    if len(history) <= window:
        return False
    old, new = history[-1 - window].loss, history[-1].loss
    if old <= 0.0:
        return True
    return (old - new) / old < rel_improvement


def _log_epoch(record: EpochRecord):
    LOG.info(format_record("Epoch", epoch=record.epoch, loss=record.loss, disp=record.displacement_term,
                           reac=record.reaction_term, step=record.step, rejections=record.rejections,
                           newton=record.newton_iters))


@log_execution_time
def bfgs_train(model: ConstitutiveModel, problem: DiscoveryProblem, options: BfgsOptions = BfgsOptions(),
               run_dir: Optional[RunDirectory] = None,
               callback: Optional[Callable[[TrainerState, ConstitutiveModel], None]] = None) -> TrainingResult:
    """
    BFGS over the raw parameters with an Armijo backtracking line search.
    A trial whose equilibrium solve fails is rejected and the step halved. Stops on a small gradient,
    on a relative improvement below rel_improvement over the last window epochs, or at max_epochs.

    :raises TrainingStalled: when no trial of a line search is accepted, whether the trials failed to
                             reach equilibrium or gave no sufficient decrease; the exception carries
                             the result reached so far (status "stalled").
    """
    state = initial_state(model, problem)
    current = model
    status = "max_epochs"
    if run_dir is not None:
        run_dir.append(state.history[0])
    LOG.info(format_record("Training started", params=model.n_params, loss=state.loss.total,
                           grad_norm=state.history[0].grad_norm))

    while state.epoch < options.max_epochs:
        g = state.gradient
        if float(np.linalg.norm(g)) <= options.grad_tol or state.loss.total == 0.0:
            status = "grad_tol"
            break
        p = -state.inverse_hessian @ g
        slope = float(g @ p)
        if not slope < 0.0:
            LOG.debug("Search direction is not a descent direction, resetting the inverse Hessian")
            state.inverse_hessian = np.eye(g.size)
            p, slope = -g, -float(g @ g)

        alpha, accepted, solve_failures = 1.0, None, 0
        for trial in range(options.max_trials):
            theta_t = state.theta + alpha * p
            model_t = current.with_parameters(theta_t)
            try:
                loss_t, sols_t = problem.evaluate(model_t, state.warm_starts)
            except SolveFailure as e:
                solve_failures += 1
                state.rejections += 1
                LOG.info(format_record("Trial rejected", epoch=state.epoch + 1, trial=trial, step=alpha,
                                       rejections=state.rejections, reason=str(e)))
                alpha *= 0.5
                continue
            if np.isfinite(loss_t.total) and loss_t.total <= state.loss.total + options.c1 * alpha * slope:
                accepted = (theta_t, model_t, loss_t, sols_t)
                break
            alpha *= 0.5

        if accepted is None:
            partial = TrainingResult(current, state.loss, state.history, "stalled",
                                     getattr(current, "seed", None), state.warm_starts)
            if run_dir is not None:
                run_dir.checkpoint(current, state.epoch, final=True, loss=state.loss.total.hex(), status="stalled")
            diagnostics = format_record("", epoch=state.epoch + 1, trials=options.max_trials,
                                        solve_failures=solve_failures,
                                        no_decrease=options.max_trials - solve_failures,
                                        loss=state.loss.total, slope=slope, last_step=2.0 * alpha)
            LOG.warning(f"Line search found no accepted step {diagnostics}")
            raise TrainingStalled(f"No accepted step {diagnostics}", partial_result=partial)

        theta_t, model_t, loss_t, sols_t = accepted
        grad_t = problem.gradient(model_t, sols_t)
        H = bfgs_update(state.inverse_hessian, theta_t - state.theta, grad_t - g)
        if H is None:
            LOG.debug(format_record("Curvature condition failed, update skipped", epoch=state.epoch + 1))
        else:
            state.inverse_hessian = H
        state.theta, state.loss, state.gradient, state.warm_starts = theta_t, loss_t, grad_t, sols_t
        state.epoch += 1
        current = model_t
        record = _record(state.epoch, loss_t, alpha, state.rejections, grad_t, sols_t)
        state.history.append(record)
        _log_epoch(record)
        if run_dir is not None:
            run_dir.append(record)
            if options.checkpoint_every and state.epoch % options.checkpoint_every == 0:
                run_dir.checkpoint(current, state.epoch, loss=loss_t.total.hex())
        if callback is not None:
            callback(state, current)
        if _window_stop(state.history, options.window, options.rel_improvement):
            status = "window"
            break

    if run_dir is not None:
        run_dir.checkpoint(current, state.epoch, final=True, loss=state.loss.total.hex(), status=status)
    LOG.info(format_record("Training finished", epochs=state.epoch, loss=state.loss.total, status=status,
                           rejections=state.rejections))
    return TrainingResult(current, state.loss, state.history, status, getattr(current, "seed", None),
                          state.warm_starts)


@dataclass(eq=False)
class SeedSummary:
    seed: int
    loss: float
    status: str
    result: Optional[TrainingResult] = None


@log_execution_time
def multi_seed_train(arch: HnnArchitecture, problem: DiscoveryProblem, n_seeds: int = N_SEEDS,
                     base_seed: int = 0, options: BfgsOptions = BfgsOptions(),
                     run_root=None) -> Tuple[TrainingResult, List[SeedSummary]]:
    """
    Train from n_seeds initialisations and keep the lowest training loss. Stalled seeds are
    reported and skipped.

    :return: (best result, per-seed summaries sorted by loss)
    :raises TrainingStalled: when every seed stalls.
    """
    summaries: List[SeedSummary] = []
    for seed in range(base_seed, base_seed + n_seeds):
        run_dir = RunDirectory(f"{run_root}/seed_{seed}") if run_root is not None else None
        try:
            result = bfgs_train(init_model(arch, seed), problem, options, run_dir)
            result.seed = seed
            summaries.append(SeedSummary(seed, result.final_loss, result.status, result))
        except TrainingStalled as e:
            LOG.warning(format_record("Seed stalled", seed=seed, reason=str(e)))
            summaries.append(SeedSummary(seed, float("inf"), "stalled"))
    summaries.sort(key=lambda s: (s.loss, s.seed))
    if summaries[0].result is None:
        raise TrainingStalled(f"All {n_seeds} seeds stalled")
    return summaries[0].result, summaries


@dataclass(frozen=True)
class ArchitectureGrid:
    layers: Sequence[int] = GRID_LAYERS
    neurons: Sequence[int] = GRID_NEURONS
    skip_connections: Sequence[bool] = GRID_SKIP
    isochoric_inputs: Sequence[bool] = GRID_ISOCHORIC
    sigma_init: Sequence[float] = GRID_SIGMA_INIT
    w_scale: Sequence[float] = GRID_W_SCALE

    @classmethod
    def preset(cls, name: str) -> "ArchitectureGrid":
        if name == "full":
            return cls()
        if name == "desk":
            return cls(DESK_GRID_LAYERS, DESK_GRID_NEURONS, DESK_GRID_SKIP, DESK_GRID_ISOCHORIC,
                       DESK_GRID_SIGMA_INIT, DESK_GRID_W_SCALE)
        raise ValueError(f"Unknown grid preset '{name}'")

    def candidates(self) -> List[HnnArchitecture]:
        out = []
        for L, n, skip, iso, sigma, w in product(self.layers, self.neurons, self.skip_connections,
                                                 self.isochoric_inputs, self.sigma_init, self.w_scale):
            if skip and L == 1:
                # skip connections only change networks with hidden-to-hidden layers
                continue
            out.append(HnnArchitecture.uniform(L, n, skip_connections=skip, isochoric_inputs=iso,
                                               sigma_init=sigma, w_scale=w))
        return out


@dataclass(eq=False)
class GridEntry:
    architecture: HnnArchitecture
    loss: float
    status: str
    result: Optional[TrainingResult] = None


def grid_search(grid: ArchitectureGrid, problem: DiscoveryProblem, n_seeds: int = 1, base_seed: int = 0,
                options: BfgsOptions = BfgsOptions(),
                candidates: Optional[List[HnnArchitecture]] = None) -> Tuple[GridEntry, List[GridEntry]]:
    """
    Train every candidate architecture and select the lowest training loss (no cross-validation).

    :return: (best entry, every entry in candidate order)
    :raises TrainingStalled: when no candidate could be trained.
    """
    entries: List[GridEntry] = []
    for arch in candidates if candidates is not None else grid.candidates():
        try:
            result, _ = multi_seed_train(arch, problem, n_seeds, base_seed, options)
            entries.append(GridEntry(arch, result.final_loss, result.status, result))
        except TrainingStalled as e:
            entries.append(GridEntry(arch, float("inf"), "stalled"))
            LOG.warning(format_record("Candidate stalled", architecture=arch.label(), reason=str(e)))
        LOG.info(format_record("Grid candidate", architecture=arch.label(), loss=entries[-1].loss,
                               status=entries[-1].status))
    trained = [e for e in entries if e.result is not None]
    if not trained:
        raise TrainingStalled("No grid candidate could be trained")
    return min(trained, key=lambda e: e.loss), entries
