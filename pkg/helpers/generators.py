from typing import Generator

import numpy as np
from scipy.spatial.transform import Rotation


class RotationGenerator:
    def __init__(self, seed: int = 0):
        """
        Initialize a seeded stream of uniformly distributed rotations in SO(3).

        :param seed: Seed of the underlying generator.
        """
        self._rng = np.random.default_rng(seed)

    def __iter__(self):
        return self

    def __next__(self) -> np.ndarray:
        return Rotation.random(random_state=self._rng).as_matrix()


class DeformationGenerator:
    def __init__(self, seed: int = 0, amplitude: float = 0.3, min_jacobian: float = 0.2):
        """
        Initialize a seeded stream of deformation gradients F = I + H with det F above a floor.

        :param seed: Seed of the underlying generator.
        :param amplitude: Scale of the entries of H.
        :param min_jacobian: Draws with det F below this value are rejected.
        """
        self.amplitude = amplitude
        self.min_jacobian = min_jacobian
        self._rng = np.random.default_rng(seed)

    def __iter__(self):
        return self

    def __next__(self) -> np.ndarray:
        while True:
            F = np.eye(3) + self.amplitude * self._rng.uniform(-1.0, 1.0, size=(3, 3))
            if np.linalg.det(F) > self.min_jacobian:
                return F


def generate_hnn_params(arch, num_draws: int, base_seed: int = 0) -> Generator:
    """
    Generator that yields independently seeded HNN parameter draws for one architecture.

    :param arch: HnnArchitecture of the draws.
    :param num_draws: Number of draws.
    :param base_seed: Seed of the first draw; draw k uses base_seed + k.
    :return: Generator yielding HnnParams.
    """
    from constitutive.initialization import init_params

    for k in range(num_draws):
        yield init_params(arch, base_seed + k)
