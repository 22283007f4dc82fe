"""Debiased entropic optimal-transport divergence between principal-stretch clouds."""

from typing import Optional, Union

import numpy as np
import ot

from analysis.stretches import StretchCloud
from config.consts import SINKHORN_EPSILON_FACTOR, SINKHORN_MAX_ITERS, SINKHORN_MAX_SAMPLES, SINKHORN_TOL
from config.logging_config import format_record, setup_logger
from helpers.exceptions import NoConvergence

LOG = setup_logger(__name__)

# POT checks the column marginal every 10 sweeps and returns the plan of the next sweep
MARGINAL_SLACK = 10.0

Cloud = Union[StretchCloud, np.ndarray]


def _samples(cloud: Cloud) -> np.ndarray:
    x = cloud.samples if isinstance(cloud, StretchCloud) else np.asarray(cloud, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] == 0:
        raise ValueError("Empty stretch cloud")
    return x


def default_epsilon(x: Cloud, y: Cloud, factor: float = SINKHORN_EPSILON_FACTOR) -> float:
    """factor times the mean squared pairwise distance of the pooled cloud, 2(E|z|^2 - |Ez|^2)."""
    z = np.concatenate([_samples(x), _samples(y)])
    spread = 2.0 * (np.mean(np.sum(z * z, axis=1)) - np.sum(z.mean(axis=0) ** 2))
    if spread <= 0.0:
        # identical point masses, any positive scale gives zero divergence
        return factor
    return factor * float(spread)


def entropic_cost(x: np.ndarray, y: np.ndarray, epsilon: float, max_iters: int = SINKHORN_MAX_ITERS,
                  tol: float = SINKHORN_TOL) -> float:
    """
    Entropy-regularised transport cost <P, M> + epsilon KL(P | a b^T) with squared Euclidean cost and
    uniform weights, solved in the log domain.

    :raises NoConvergence: when the column marginal error is still above tolerance.
    """
    a = np.full(x.shape[0], 1.0 / x.shape[0])
    b = np.full(y.shape[0], 1.0 / y.shape[0])
    M = ot.dist(x, y, metric="sqeuclidean")
    plan, log = ot.sinkhorn(a, b, M, epsilon, method="sinkhorn_log", numItermax=max_iters, stopThr=tol,
                            log=True, warn=False)
    err = float(np.linalg.norm(plan.sum(axis=0) - b))
    if not err < MARGINAL_SLACK * tol:
        raise NoConvergence(err)
    # log P = -M/eps + log_u + log_v, so the entropic cost reduces to the dual potentials
    rows, cols = plan.sum(axis=1), plan.sum(axis=0)
    return float(epsilon * (np.dot(rows, log["log_u"] - np.log(a)) + np.dot(cols, log["log_v"] - np.log(b))))


def sinkhorn_divergence(cloud_a: Cloud, cloud_b: Cloud, epsilon: Optional[float] = None,
                        max_iters: int = SINKHORN_MAX_ITERS, tol: float = SINKHORN_TOL,
                        max_samples: Optional[int] = SINKHORN_MAX_SAMPLES, seed: int = 0) -> float:
    """
    S(A,B) - S(A,A)/2 - S(B,B)/2 over uniformly weighted stretch samples.

    @param epsilon: Regularisation; defaults to a fixed fraction of the pooled squared spread.
    @param max_samples: Clouds above this size are subsampled with the given seed first.
    """
    x, y = _samples(cloud_a), _samples(cloud_b)
    if x.shape[1] != y.shape[1]:
        raise ValueError(f"Stretch clouds of different dimension: {x.shape[1]} and {y.shape[1]}")
    if max_samples is not None:
        x = StretchCloud(x, np.ones(len(x))).subsample(max_samples, seed).samples
        y = StretchCloud(y, np.ones(len(y))).subsample(max_samples, seed + 1).samples
    eps = default_epsilon(x, y) if epsilon is None else float(epsilon)
    if eps <= 0.0:
        raise ValueError(f"epsilon must be positive, got {eps}")
    s_ab = entropic_cost(x, y, eps, max_iters, tol)
    s_aa = entropic_cost(x, x, eps, max_iters, tol)
    s_bb = entropic_cost(y, y, eps, max_iters, tol)
    divergence = max(s_ab - 0.5 * (s_aa + s_bb), 0.0)
    LOG.info(format_record("Sinkhorn divergence", n_a=len(x), n_b=len(y), epsilon=eps, divergence=divergence))
    return divergence
