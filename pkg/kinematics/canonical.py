from dataclasses import dataclass
from enum import Enum

import numpy as np

from kinematics.tensors import principal_stretches


class CanonicalKind(str, Enum):
    UNIAXIAL_TENSION = "uniaxial_tension"
    UNIAXIAL_COMPRESSION = "uniaxial_compression"
    BIAXIAL_TENSION = "biaxial_tension"
    BIAXIAL_COMPRESSION = "biaxial_compression"
    SIMPLE_SHEAR = "simple_shear"


@dataclass(frozen=True)
class CanonicalDeformation:
    kind: CanonicalKind
    delta: float

    def __post_init__(self):
        if not 0.0 <= self.delta <= 0.5:
            raise ValueError(f"delta must lie in [0, 0.5], got {self.delta}")


def canonical_deformation(c: CanonicalDeformation) -> np.ndarray:
    """
    Closed-form plane deformation gradient of a reference load case, embedded with F33 = 1.
    """
    d = float(c.delta)
    F = np.eye(3)
    if c.kind == CanonicalKind.UNIAXIAL_TENSION:
        F[0, 0] = 1.0 + d
    elif c.kind == CanonicalKind.UNIAXIAL_COMPRESSION:
        F[0, 0] = 1.0 / (1.0 + d)
    elif c.kind == CanonicalKind.BIAXIAL_TENSION:
        F[0, 0] = F[1, 1] = 1.0 + d
    elif c.kind == CanonicalKind.BIAXIAL_COMPRESSION:
        F[0, 0] = F[1, 1] = 1.0 / (1.0 + d)
    elif c.kind == CanonicalKind.SIMPLE_SHEAR:
        F[0, 1] = d
    else:
        raise ValueError(f"Unknown canonical deformation {c.kind}")
    return F


def canonical_curves(n_points: int = 51) -> dict:
    """
    In-plane principal-stretch curves (lambda1, lambda2) of every canonical deformation over delta in [0, 0.5].

    :param n_points: Samples per curve.
    :return: Mapping kind value -> array of shape (n_points, 3) with columns (delta, lambda1, lambda2).
    """
    if n_points < 2:
        raise ValueError("A curve needs at least two points")
    deltas = np.linspace(0.0, 0.5, n_points)
    curves = {}
    for kind in CanonicalKind:
        Fs = np.stack([canonical_deformation(CanonicalDeformation(kind, float(d)))[:2, :2] for d in deltas])
        stretches = np.linalg.svd(Fs, compute_uv=False)
        curves[kind.value] = np.column_stack([deltas, stretches[:, 0], stretches[:, 1]])
    return curves


def canonical_stretches(c: CanonicalDeformation) -> np.ndarray:
    """Principal stretches of the full 3x3 canonical deformation."""
    return principal_stretches(canonical_deformation(c))
