"""Analytic hole shapes and outer masks used to carve structured grids."""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np


def _unit(v: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(v, axis=-1, keepdims=True)
    fallback = np.zeros_like(v)
    fallback[..., 0] = 1.0
    return np.where(norm > 0, v / np.where(norm > 0, norm, 1.0), fallback)


class Hole(ABC):
    """Region removed from the specimen. level < 0 inside, approximately a signed distance."""

    @abstractmethod
    def level(self, x: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def project(self, x: np.ndarray) -> np.ndarray:
        """Closest-point style projection of points onto the hole surface."""


@dataclass(frozen=True)
class Ball(Hole):
    """Circle in 2D, sphere in 3D."""
    center: Tuple[float, ...]
    radius: float

    def level(self, x):
        return np.linalg.norm(x - np.asarray(self.center), axis=-1) - self.radius

    def project(self, x):
        c = np.asarray(self.center)
        return c + self.radius * _unit(x - c)


@dataclass(frozen=True)
class Ellipse(Hole):
    center: Tuple[float, float]
    semi_axes: Tuple[float, float]

    def _scaled(self, x):
        return (x - np.asarray(self.center)) / np.asarray(self.semi_axes)

    def level(self, x):
        return (np.linalg.norm(self._scaled(x), axis=-1) - 1.0) * min(self.semi_axes)

    def project(self, x):
        return np.asarray(self.center) + _unit(self._scaled(x)) * np.asarray(self.semi_axes)


@dataclass(frozen=True)
class Cylinder(Hole):
    """Infinite circular cylinder around the line point + t * axis."""
    point: Tuple[float, float, float]
    axis: Tuple[float, float, float]
    radius: float

    def _split(self, x):
        p = np.asarray(self.point)
        a = np.asarray(self.axis, dtype=float)
        a = a / np.linalg.norm(a)
        rel = x - p
        along = (rel @ a)[..., None] * a
        return p + along, rel - along

    def level(self, x):
        _, perp = self._split(x)
        return np.linalg.norm(perp, axis=-1) - self.radius

    def project(self, x):
        foot, perp = self._split(x)
        return foot + self.radius * _unit(perp)


@dataclass(frozen=True)
class BoxUnion:
    """Union of axis-aligned boxes, used as an outer mask on the background grid."""
    boxes: Sequence[Tuple[Tuple[float, ...], Tuple[float, ...]]]

    def contains(self, x: np.ndarray, tol: float = 1e-12) -> np.ndarray:
        inside = np.zeros(x.shape[0], dtype=bool)
        for lower, upper in self.boxes:
            inside |= np.all((x >= np.asarray(lower) - tol) & (x <= np.asarray(upper) + tol), axis=1)
        return inside
