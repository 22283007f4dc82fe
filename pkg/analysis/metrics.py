"""Variance-normalised errors of predicted displacement fields and reactions."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from config.logging_config import format_record, setup_logger
from constitutive.base import ConstitutiveModel
from experiments.setups import Experiment
from experiments.synthetic import solve_experiments
from fem.reactions import reaction_force
from fem.solver import EquilibriumSolution
from helpers.exceptions import DegenerateVariance

LOG = setup_logger(__name__)


@dataclass(frozen=True)
class MetricReport:
    """
    @param rmse: Root mean square of the pointwise error norms.
    @param variance: Mean squared distance of the reference vectors from their mean.
    @param vrmse: rmse / sqrt(variance).
    @param per_load: vRMSE of every load value.
    @param reaction_errors: Relative reaction error per (load, tag).
    """
    rmse: float
    variance: float
    vrmse: float
    per_load: Dict[float, float] = field(default_factory=dict)
    reaction_errors: Dict[Tuple[float, str], float] = field(default_factory=dict)


def displacement_variance(reference: np.ndarray) -> float:
    ref = np.asarray(reference, dtype=float).reshape(len(reference), -1)
    return float(np.mean(np.sum((ref - ref.mean(axis=0)) ** 2, axis=1)))


def vrmse(predicted, reference) -> MetricReport:
    """
    vRMSE of predicted against reference vectors (N, k): a perfect prediction scores 0 and
    the reference mean scores 1.

    :raises DegenerateVariance: when the reference vectors are all equal.
    """
    pred = np.asarray(predicted, dtype=float)
    ref = np.asarray(reference, dtype=float)
    if pred.shape != ref.shape or pred.shape[0] < 2:
        raise ValueError(f"Need two aligned sets of at least two vectors, got {pred.shape} and {ref.shape}")
    pred, ref = pred.reshape(len(pred), -1), ref.reshape(len(ref), -1)
    variance = displacement_variance(ref)
    if variance == 0.0:
        raise DegenerateVariance("Reference displacements have zero variance")
    rmse = float(np.sqrt(np.mean(np.sum((pred - ref) ** 2, axis=1))))
    return MetricReport(rmse, variance, rmse / np.sqrt(variance))


def normalized_errors(predicted, reference) -> np.ndarray:
    """Pointwise error norms divided by the reference standard deviation sqrt(Var)."""
    pred = np.asarray(predicted, dtype=float).reshape(len(predicted), -1)
    ref = np.asarray(reference, dtype=float).reshape(len(reference), -1)
    variance = displacement_variance(ref)
    if variance == 0.0:
        raise DegenerateVariance("Reference displacements have zero variance")
    return np.linalg.norm(pred - ref, axis=1) / np.sqrt(variance)


def normalized_reaction_errors(predicted, reference) -> np.ndarray:
    """Reaction errors divided by the standard deviation of the reference reactions."""
    pred, ref = np.asarray(predicted, dtype=float), np.asarray(reference, dtype=float)
    std = float(np.std(ref))
    if std == 0.0:
        raise DegenerateVariance("Reference reactions have zero variance")
    return np.abs(pred - ref) / std


def boxplot_stats(values) -> Dict[str, float]:
    """
    Quartiles with linear interpolation, whiskers at the most extreme samples within 1.5 IQR.
    """
    v = np.sort(np.asarray(values, dtype=float).ravel())
    q1, median, q3 = np.percentile(v, [25.0, 50.0, 75.0])
    iqr = q3 - q1
    inside = v[(v >= q1 - 1.5 * iqr) & (v <= q3 + 1.5 * iqr)]
    return {"n": float(v.size), "q1": float(q1), "median": float(median), "q3": float(q3),
            "whisker_low": float(inside.min()), "whisker_high": float(inside.max()),
            "outliers": float(v.size - inside.size)}


@dataclass(eq=False)
class Evaluation:
    """Predicted and reference fields of every experiment of a test setup."""
    report: MetricReport
    loads: List[float]
    predicted: List[np.ndarray]
    reference: List[np.ndarray]
    reactions: List[Tuple[float, str, float, float]]
    predicted_solutions: List[EquilibriumSolution]
    reference_solutions: List[EquilibriumSolution]


def nodal_displacements(experiment: Experiment, solution: EquilibriumSolution) -> np.ndarray:
    space = experiment.space
    return space.nodal(space.expand(solution.dof_vector, solution.load_scale))


def evaluate_model(model: ConstitutiveModel, ground_truth: ConstitutiveModel, experiments: List[Experiment],
                   threads: int = 1, reference: Optional[List[EquilibriumSolution]] = None) -> Evaluation:
    """
    Forward-solve a test setup with the trained and the ground-truth law and compare nodal displacements
    (pooled and per load) and Dirichlet reactions.
    """
    predicted_solutions = solve_experiments(experiments, model, threads)
    reference_solutions = reference if reference is not None else solve_experiments(experiments, ground_truth,
                                                                                     threads)
    predicted, ref, loads, reactions = [], [], [], []
    per_load: Dict[float, float] = {}
    reaction_errors: Dict[Tuple[float, str], float] = {}
    for exp, p_sol, r_sol in zip(experiments, predicted_solutions, reference_solutions):
        p, r = nodal_displacements(exp, p_sol), nodal_displacements(exp, r_sol)
        predicted.append(p)
        ref.append(r)
        loads.append(exp.load_value)
        try:
            per_load[exp.load_value] = vrmse(p, r).vrmse
        except DegenerateVariance:
            per_load[exp.load_value] = float("nan")
        for tag in exp.bc.dirichlet_tags():
            rp = reaction_force(exp.space, model, p_sol, tag)
            rr = reaction_force(exp.space, ground_truth, r_sol, tag)
            reactions.append((exp.load_value, tag, rp, rr))
            reaction_errors[(exp.load_value, tag)] = abs(rp - rr) / abs(rr) if rr != 0 else float("nan")
    pooled = vrmse(np.concatenate(predicted), np.concatenate(ref))
    report = MetricReport(pooled.rmse, pooled.variance, pooled.vrmse, per_load, reaction_errors)
    LOG.info(format_record("Evaluated model", experiments=len(experiments), vrmse=report.vrmse,
                           rmse=report.rmse))
    return Evaluation(report, loads, predicted, ref, reactions, predicted_solutions, reference_solutions)
