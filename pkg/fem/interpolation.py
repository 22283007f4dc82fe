"""Point location and P1 interpolation of displacement fields."""

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree

from config.consts import BARYCENTRIC_SLACK
from fem.space import FeSpace
from helpers.exceptions import PointOutsideMesh
from mesh.mesh import Mesh

# candidate cells examined per point, nearest centroids first
CANDIDATES = 16


class PointLocator:
    """Finds the containing cell and barycentric coordinates of arbitrary points."""

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        X = mesh.nodes[mesh.cells]
        self._origin = X[:, 0, :]
        self._inverse = np.linalg.inv((X[:, 1:, :] - X[:, :1, :]).transpose(0, 2, 1))
        self._tree = cKDTree(X.mean(axis=1))

    def _barycentric(self, cells: np.ndarray, points: np.ndarray) -> np.ndarray:
        local = np.einsum('nij,nj->ni', self._inverse[cells], points - self._origin[cells])
        return np.column_stack([1.0 - local.sum(axis=1), local])

    def locate(self, points: np.ndarray):
        """
        :return: (cell index per point, barycentric coordinates (n, dim + 1))
        :raises PointOutsideMesh: for the first point no cell contains.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        k = min(CANDIDATES, self.mesh.n_cells)
        _, candidates = self._tree.query(points, k=k)
        candidates = candidates.reshape(points.shape[0], k)
        cells = np.full(points.shape[0], -1)
        bary = np.zeros((points.shape[0], self.mesh.dim + 1))
        best = np.full(points.shape[0], -np.inf)
        for j in range(k):
            lam = self._barycentric(candidates[:, j], points)
            worst = lam.min(axis=1)
            better = (worst > best) & (best < -BARYCENTRIC_SLACK)
            cells[better] = candidates[better, j]
            bary[better] = lam[better]
            best[better] = worst[better]
        outside = np.flatnonzero(best < -BARYCENTRIC_SLACK)
        if outside.size:
            # fall back to an exhaustive search for points the candidates missed
            for i in outside:
                lam = self._barycentric(np.arange(self.mesh.n_cells), np.repeat(points[i:i + 1], self.mesh.n_cells, 0))
                j = int(np.argmax(lam.min(axis=1)))
                if lam[j].min() < -BARYCENTRIC_SLACK:
                    raise PointOutsideMesh(int(i))
                cells[i], bary[i] = j, lam[j]
        return cells, bary


def interpolation_matrix(space: FeSpace, points: np.ndarray) -> sparse.csr_matrix:
    """
    Sparse operator mapping the full dof vector to displacements at points,
    rows ordered point-major: row = point * dim + component.
    """
    cells, bary = PointLocator(space.mesh).locate(points)
    dim = space.dim
    n = len(cells)
    nodes = space.mesh.cells[cells]
    rows = (np.arange(n)[:, None, None] * dim + np.arange(dim)[None, None, :])
    rows = np.broadcast_to(rows, (n, dim + 1, dim))
    cols = nodes[:, :, None] * dim + np.arange(dim)
    vals = np.broadcast_to(bary[:, :, None], (n, dim + 1, dim))
    return sparse.coo_matrix((vals.ravel(), (rows.ravel(), cols.ravel())), shape=(n * dim, space.n_dofs)).tocsr()


def interpolate_displacement(space: FeSpace, full: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Displacement at points from a full dof vector, shape (n, dim)."""
    return (interpolation_matrix(space, points) @ full).reshape(-1, space.dim)
