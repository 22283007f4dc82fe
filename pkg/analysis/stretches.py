from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from experiments.setups import Experiment
from fem.assembly import assembler
from fem.solver import EquilibriumSolution
from kinematics.tensors import principal_stretches


@dataclass(frozen=True, eq=False)
class StretchCloud:
    """
    Principal stretches, one sample per cell and experiment, descending per row.
    2D clouds hold the in-plane pair, 3D clouds the full triple. Weights are uniform.
    """
    samples: np.ndarray
    jacobians: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.samples.shape[0], 1.0 / self.samples.shape[0])

    def __len__(self) -> int:
        return self.samples.shape[0]

    def subsample(self, max_samples: int, seed: int = 0) -> "StretchCloud":
        """Seeded uniform subsample without replacement, in the original order."""
        if len(self) <= max_samples:
            return self
        index = np.sort(np.random.default_rng(seed).choice(len(self), size=max_samples, replace=False))
        return StretchCloud(self.samples[index], self.jacobians[index])


def _in_plane_stretches(F: np.ndarray) -> np.ndarray:
    F2 = F[:, :2, :2]
    C = np.einsum('nki,nkj->nij', F2, F2)
    return np.sqrt(np.clip(np.linalg.eigvalsh(C), 0.0, None))[:, ::-1]


def cell_stretches(experiment: Experiment, solution: EquilibriumSolution) -> StretchCloud:
    space = experiment.space
    F = assembler(space).deformation_gradients(space.expand(solution.dof_vector, solution.load_scale))
    J = np.linalg.det(F)
    if space.dim == 2:
        return StretchCloud(_in_plane_stretches(F), J)
    return StretchCloud(principal_stretches(F), J)


def stretch_cloud(experiments: List[Experiment], solutions: List[EquilibriumSolution],
                  max_samples: Optional[int] = None, seed: int = 0) -> StretchCloud:
    """Pooled principal-stretch samples of all experiments of a setup."""
    parts = [cell_stretches(e, s) for e, s in zip(experiments, solutions)]
    cloud = StretchCloud(np.concatenate([p.samples for p in parts]), np.concatenate([p.jacobians for p in parts]))
    return cloud.subsample(max_samples, seed) if max_samples is not None else cloud
