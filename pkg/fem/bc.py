"""Boundary-condition programs: one condition per boundary tag, scaled by the load factor."""

from dataclasses import dataclass
from typing import Callable, Dict, Iterator, Mapping, Optional, Tuple, Union

import numpy as np

from helpers.exceptions import ConfigError


@dataclass(frozen=True)
class DirichletVector:
    """
    Prescribed displacement. Either a constant vector scaled by the load factor, or a field
    field(points, load_scale) -> displacements for non-proportional programs such as torsion.
    """
    value: Optional[Tuple[float, ...]] = None
    field: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    label: str = ""

    def __post_init__(self):
        if (self.value is None) == (self.field is None):
            raise ConfigError("DirichletVector needs exactly one of value or field")

    def displacement(self, points: np.ndarray, load_scale: float) -> np.ndarray:
        if self.field is not None:
            return np.asarray(self.field(points, load_scale), dtype=float).reshape(points.shape)
        value = np.asarray(self.value, dtype=float)
        if value.shape != (points.shape[1],):
            raise ConfigError(f"Prescribed displacement {self.value} does not match dimension {points.shape[1]}")
        return load_scale * np.broadcast_to(value, points.shape)

    def describe(self) -> str:
        return f"dirichlet_vector({self.label or self.value})"


@dataclass(frozen=True)
class DirichletNormal:
    """d . n = load_scale * value on axis-aligned facets; tangential traction free."""
    value: float = 0.0

    def describe(self) -> str:
        return f"dirichlet_normal({self.value!r})"


@dataclass(frozen=True)
class Traction:
    """Dead traction h = load_scale * (vector + normal * N)."""
    vector: Optional[Tuple[float, ...]] = None
    normal: float = 0.0

    def describe(self) -> str:
        return f"traction({self.vector}, {self.normal!r})"


@dataclass(frozen=True)
class NormalSpring:
    """P N + k (N . d) N = load_scale * normal_traction * N."""
    stiffness: float
    normal_traction: float = 0.0

    def __post_init__(self):
        if self.stiffness < 0:
            raise ConfigError("Spring stiffness must be non-negative")

    def describe(self) -> str:
        return f"normal_spring({self.stiffness!r}, {self.normal_traction!r})"


@dataclass(frozen=True)
class FollowerPressure:
    """P N = -load_scale * (magnitude * cof(F) N + dead_load)."""
    magnitude: float
    dead_load: Optional[Tuple[float, ...]] = None

    def describe(self) -> str:
        return f"follower_pressure({self.magnitude!r}, {self.dead_load})"


@dataclass(frozen=True)
class Free:
    def describe(self) -> str:
        return "free"


Condition = Union[DirichletVector, DirichletNormal, Traction, NormalSpring, FollowerPressure, Free]
DIRICHLET = (DirichletVector, DirichletNormal)


class BcProgram(Mapping):
    """
    Mapping boundary tag -> condition. Tags of a mesh without an entry are traction free.
    """

    def __init__(self, conditions: Dict[str, Condition]):
        self._conditions = dict(conditions)
        if not any(isinstance(c, DIRICHLET) or (isinstance(c, NormalSpring) and c.stiffness > 0)
                   for c in self._conditions.values()):
            raise ConfigError("The boundary program does not remove rigid-body modes "
                              "(needs a Dirichlet or spring condition)")

    def __getitem__(self, tag: str) -> Condition:
        return self._conditions[tag]

    def __iter__(self) -> Iterator[str]:
        return iter(self._conditions)

    def __len__(self) -> int:
        return len(self._conditions)

    def condition(self, tag: str) -> Condition:
        return self._conditions.get(tag, Free())

    def is_dirichlet(self, tag: str) -> bool:
        return isinstance(self.condition(tag), DIRICHLET)

    def dirichlet_tags(self):
        return [t for t, c in self._conditions.items() if isinstance(c, DIRICHLET)]

    def check_mesh(self, tags):
        unknown = set(self._conditions) - set(tags)
        if unknown:
            raise ConfigError(f"Boundary program refers to tags {sorted(unknown)} absent from the mesh")

    def describe(self) -> Dict[str, str]:
        return {tag: c.describe() for tag, c in self._conditions.items()}
