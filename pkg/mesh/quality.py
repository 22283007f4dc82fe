from dataclasses import dataclass
from itertools import combinations

import numpy as np

from mesh.mesh import Mesh, exterior_facets, signed_volumes

SLIVER_ANGLE_DEG = 5.0


@dataclass(frozen=True)
class MeshQualityReport:
    """
    @param min_volume: Smallest signed cell volume.
    @param max_volume: Largest signed cell volume.
    @param min_angle_deg: Smallest interior angle (2D) or dihedral angle (3D).
    @param inverted_cells: Indices of cells with non-positive volume.
    @param sliver_cells: Indices of cells whose smallest angle is below the sliver threshold.
    @param boundary_closed: Tagged facets coincide with the topological boundary.
    """
    min_volume: float
    max_volume: float
    min_angle_deg: float
    inverted_cells: np.ndarray
    sliver_cells: np.ndarray
    boundary_closed: bool

    @property
    def ok(self) -> bool:
        return self.inverted_cells.size == 0 and self.boundary_closed


def _triangle_angles(X: np.ndarray) -> np.ndarray:
    angles = []
    for k in range(3):
        a = X[:, (k + 1) % 3] - X[:, k]
        b = X[:, (k + 2) % 3] - X[:, k]
        cos = np.einsum('nd,nd->n', a, b) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
        angles.append(np.arccos(np.clip(cos, -1.0, 1.0)))
    return np.degrees(np.column_stack(angles))


def _dihedral_angles(X: np.ndarray) -> np.ndarray:
    normals = []
    for k in range(4):
        others = [j for j in range(4) if j != k]
        n = np.cross(X[:, others[1]] - X[:, others[0]], X[:, others[2]] - X[:, others[0]])
        # orient away from the opposite vertex
        flip = np.einsum('nd,nd->n', n, X[:, k] - X[:, others[0]]) > 0
        n[flip] *= -1.0
        normals.append(n / np.linalg.norm(n, axis=1, keepdims=True))
    angles = []
    for k, l in combinations(range(4), 2):
        cos = np.clip(np.einsum('nd,nd->n', normals[k], normals[l]), -1.0, 1.0)
        angles.append(np.pi - np.arccos(cos))
    return np.degrees(np.column_stack(angles))


def mesh_quality(mesh: Mesh) -> MeshQualityReport:
    """Volume range, angle quality and boundary closure of a mesh."""
    volumes = signed_volumes(mesh.nodes, mesh.cells)
    X = mesh.nodes[mesh.cells]
    with np.errstate(invalid="ignore", divide="ignore"):
        angles = _triangle_angles(X) if mesh.dim == 2 else _dihedral_angles(X)
    min_angles = np.nan_to_num(angles.min(axis=1), nan=0.0)
    facets, _ = exterior_facets(mesh.cells, mesh.dim)
    topological = {tuple(f) for f in np.sort(facets, axis=1)}
    tagged = {tuple(f) for f in np.sort(mesh.facets, axis=1)}
    return MeshQualityReport(min_volume=float(volumes.min()), max_volume=float(volumes.max()),
                             min_angle_deg=float(min_angles.min()),
                             inverted_cells=np.flatnonzero(volumes <= 0),
                             sliver_cells=np.flatnonzero(min_angles < SLIVER_ANGLE_DEG),
                             boundary_closed=topological == tagged and len(tagged) == mesh.facets.shape[0])
