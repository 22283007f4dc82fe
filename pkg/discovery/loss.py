"""Data misfit of the inverse problem and its discrete-adjoint gradient."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from config.logging_config import format_record, setup_logger
from constitutive.base import ConstitutiveModel
from experiments.setups import Experiment
from experiments.synthetic import ObservationSet
from fem.assembly import assembler
from fem.interpolation import interpolation_matrix
from fem.reactions import reaction_force, reaction_gradients
from fem.solver import EquilibriumSolution, continuation_solve, factorize, newton_solve
from helpers.exceptions import ConfigError, ContinuationFailure, SolveFailure
from models.options_model import ContinuationOptions, NewtonOptions

LOG = setup_logger(__name__)


@dataclass(frozen=True)
class LossBreakdown:
    """
    @param displacement_term: Sum of squared displacement misfits.
    @param reaction_term: Sum of squared reaction misfits.
    @param alpha_R: Reaction weight.
    @param total: displacement_term + alpha_R * reaction_term.
    @param per_experiment: Weighted total of every experiment.
    """
    displacement_term: float
    reaction_term: float
    alpha_R: float
    total: float
    per_experiment: np.ndarray


def alpha_r(observations: ObservationSet) -> float:
    """sum |d~|^2 / sum R~^2, zero when no reaction carries information."""
    d2 = sum(float(np.sum(o.displacements ** 2)) for o in observations.displacements)
    r2 = sum(r.value ** 2 for r in observations.reactions)
    return d2 / r2 if r2 > 0 else 0.0


def combine(displacement_terms: Sequence[float], reaction_terms: Sequence[float], alpha: float) -> LossBreakdown:
    d = np.asarray(displacement_terms, dtype=float)
    r = np.asarray(reaction_terms, dtype=float)
    return LossBreakdown(float(d.sum()), float(r.sum()), alpha, float(d.sum() + alpha * r.sum()), d + alpha * r)


@dataclass(eq=False)
class ExperimentData:
    experiment: Experiment
    targets: np.ndarray               # observed displacements, flattened point-major
    interpolation: sparse.csr_matrix  # full dofs -> predicted displacements
    reactions: List[Tuple[str, float]]


class DiscoveryProblem:
    """
    Experiments aligned with their observations. Owns the solver settings used by every
    loss evaluation; per-experiment solves may fan out to a thread pool.
    """

    def __init__(self, experiments: List[Experiment], observations: ObservationSet,
                 newton: NewtonOptions = NewtonOptions(), continuation: ContinuationOptions = ContinuationOptions(),
                 threads: int = 1, alpha: Optional[float] = None):
        if not experiments:
            raise ConfigError("The inverse problem needs at least one experiment")
        self.newton = newton
        self.continuation = continuation
        self.threads = threads
        self.alpha_R = alpha_r(observations) if alpha is None else alpha
        self.data: List[ExperimentData] = []
        for experiment in experiments:
            obs = observations.for_experiment(experiment.index)
            reactions = [(r.tag, r.value) for r in observations.reactions_for(experiment.index)]
            for tag, _ in reactions:
                if not experiment.bc.is_dirichlet(tag):
                    raise ConfigError(f"Reaction tag '{tag}' of experiment {experiment.index} is not Dirichlet")
            if obs is None:
                H = sparse.csr_matrix((0, experiment.space.n_dofs))
                targets = np.zeros(0)
            else:
                H = interpolation_matrix(experiment.space, obs.points)
                targets = obs.displacements.reshape(-1)
            self.data.append(ExperimentData(experiment, targets, H, reactions))

    @property
    def experiments(self) -> List[Experiment]:
        return [d.experiment for d in self.data]

    def _map(self, fn: Callable, items):
        if self.threads <= 1:
            return [fn(i) for i in items]
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return list(pool.map(fn, items))

    # equilibrium

    def solve(self, model: ConstitutiveModel,
              warm_starts: Optional[Sequence[Optional[EquilibriumSolution]]] = None) -> List[EquilibriumSolution]:
        """
        Newton from the warm start of every experiment, load continuation where none exists.

        :raises SolveFailure: naming the first experiment that did not converge.
        """
        warm = list(warm_starts) if warm_starts is not None else [None] * len(self.data)

        def solve_one(i: int):
            exp = self.data[i].experiment
            if warm[i] is None:
                try:
                    return continuation_solve(exp.space, model, exp.load_value, self.continuation, self.newton)
                except ContinuationFailure as e:
                    return EquilibriumSolution(np.zeros(exp.space.n_free), exp.load_value, False, 0, np.inf,
                                               message=str(e))
            return newton_solve(exp.space, model, warm[i].dof_vector, exp.load_value, self.newton)

        solutions = self._map(solve_one, range(len(self.data)))
        for i, sol in enumerate(solutions):
            if not sol.converged:
                raise SolveFailure(self.data[i].experiment.index, sol.message)
        return solutions

    # misfit

    def _terms(self, model: ConstitutiveModel, i: int, solution: EquilibriumSolution, with_gradients: bool):
        d = self.data[i]
        space = d.experiment.space
        full = space.expand(solution.dof_vector, solution.load_scale)
        misfit = d.interpolation @ full - d.targets
        disp = float(misfit @ misfit)
        react = 0.0
        grads = []
        for tag, observed in d.reactions:
            if with_gradients:
                R, dR_du, dR_dtheta = reaction_gradients(space, model, solution, tag)
                grads.append((R - observed, dR_du, dR_dtheta))
            else:
                R = reaction_force(space, model, solution, tag)
            react += (R - observed) ** 2
        return disp, react, misfit, grads

    def loss(self, model: ConstitutiveModel, solutions: Sequence[EquilibriumSolution]) -> LossBreakdown:
        terms = [self._terms(model, i, s, False) for i, s in enumerate(solutions)]
        return combine([t[0] for t in terms], [t[1] for t in terms], self.alpha_R)

    def evaluate(self, model: ConstitutiveModel, warm_starts=None) -> Tuple[LossBreakdown, List[EquilibriumSolution]]:
        """
        Solve all experiments and evaluate the misfit.

        :raises SolveFailure: when an experiment does not converge.
        """
        solutions = self.solve(model, warm_starts)
        return self.loss(model, solutions), solutions

    def gradient(self, model: ConstitutiveModel, solutions: Sequence[EquilibriumSolution]) -> np.ndarray:
        """
        Discrete-adjoint gradient over the raw parameters at converged states:
        K^T lam = dL/du, dL/dtheta = -lam^T dr/dtheta + alpha_R sum 2 (R - R~) dR/dtheta.
        """
        def one(i: int) -> np.ndarray:
            d = self.data[i]
            space = d.experiment.space
            solution = solutions[i]
            _, _, misfit, reactions = self._terms(model, i, solution, True)
            free = space.free_dofs
            rhs = 2.0 * (d.interpolation[:, free].T @ misfit)
            direct = np.zeros(model.n_params)
            for residual, dR_du, dR_dtheta in reactions:
                rhs = rhs + 2.0 * self.alpha_R * residual * dR_du
                direct += 2.0 * self.alpha_R * residual * dR_dtheta
            if not np.any(rhs):
                return direct
            asm = assembler(space)
            full = space.expand(solution.dof_vector, solution.load_scale)
            K = asm.tangent(model, full, solution.load_scale)[free][:, free]
            lam = factorize(K.T.tocsc()).solve(rhs)
            lam_full = np.zeros(space.n_dofs)
            lam_full[free] = lam
            return direct - asm.parameter_contraction(model, full, lam_full)

        parts = self._map(one, range(len(self.data)))
        grad = np.zeros(model.n_params)
        for part in parts:
            grad += part
        return grad


def evaluate_loss(model: ConstitutiveModel, problem: DiscoveryProblem, warm_starts=None):
    """(LossBreakdown, updated warm starts); raises SolveFailure."""
    return problem.evaluate(model, warm_starts)


def adjoint_gradient(model: ConstitutiveModel, problem: DiscoveryProblem, warm_starts) -> np.ndarray:
    """Gradient at the equilibria reached from the warm starts."""
    solutions = problem.solve(model, warm_starts)
    LOG.debug(format_record("Adjoint gradient", experiments=len(solutions)))
    return problem.gradient(model, solutions)
