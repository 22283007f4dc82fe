"""Simplicial mesh with tagged boundary facets."""

import hashlib
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Dict, List, Tuple

import numpy as np

from helpers.exceptions import MalformedMeshFile


def signed_volumes(nodes: np.ndarray, cells: np.ndarray) -> np.ndarray:
    """Signed area (2D) or volume (3D) of every simplex."""
    dim = nodes.shape[1]
    X = nodes[cells]
    D = (X[:, 1:, :] - X[:, :1, :]).transpose(0, 2, 1)
    factor = 0.5 if dim == 2 else 1.0 / 6.0
    return factor * np.linalg.det(D)


def local_facets(dim: int) -> List[Tuple[int, ...]]:
    """Local vertex indices of the facets of a simplex; entry k is the facet opposite vertex k."""
    return [tuple(j for j in range(dim + 1) if j != k) for k in range(dim + 1)]


def facet_area_vectors(points: np.ndarray) -> np.ndarray:
    """
    Area-weighted normals of facets given by their vertex coordinates (K, dim, dim).
    2D: (t_y, -t_x) with t = x1 - x0. 3D: (x1 - x0) x (x2 - x0) / 2.
    """
    if points.shape[-1] == 2:
        t = points[:, 1] - points[:, 0]
        return np.column_stack([t[:, 1], -t[:, 0]])
    return 0.5 * np.cross(points[:, 1] - points[:, 0], points[:, 2] - points[:, 0])


def exterior_facets(cells: np.ndarray, dim: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Facets that belong to exactly one cell.

    :return: (facets (K, dim) in local order, owning cell index (K,))
    """
    lf = local_facets(dim)
    all_facets = np.concatenate([cells[:, list(f)] for f in lf])
    owners = np.tile(np.arange(cells.shape[0]), len(lf))
    keys = np.sort(all_facets, axis=1)
    _, index, counts = np.unique(keys, axis=0, return_index=True, return_counts=True)
    single = np.sort(index[counts == 1])
    return all_facets[single], owners[single]


@dataclass(frozen=True, eq=False)
class Mesh:
    """
    Triangles (dim 2) or tetrahedra (dim 3) with boundary facets carrying tag names.
    Boundary facets are stored in the node order whose area vector points outward.

    @param dim: 2 or 3.
    @param nodes: Coordinates, shape (N, dim).
    @param cells: Node indices, shape (M, dim + 1).
    @param facets: Boundary facet node indices, shape (K, dim).
    @param facet_tags: Tag name per boundary facet, shape (K,).
    """
    dim: int
    nodes: np.ndarray
    cells: np.ndarray
    facets: np.ndarray
    facet_tags: np.ndarray

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise MalformedMeshFile(f"Unsupported dimension {self.dim}")
        nodes = np.ascontiguousarray(self.nodes, dtype=float).reshape(-1, self.dim)
        cells = np.ascontiguousarray(self.cells, dtype=np.int64).reshape(-1, self.dim + 1)
        facets = np.ascontiguousarray(self.facets, dtype=np.int64).reshape(-1, self.dim)
        tags = np.asarray(self.facet_tags, dtype=object).reshape(-1)
        if tags.shape[0] != facets.shape[0]:
            raise MalformedMeshFile("Every boundary facet needs exactly one tag")
        for name, array in (("cells", cells), ("facets", facets)):
            if array.size and (array.min() < 0 or array.max() >= nodes.shape[0]):
                raise MalformedMeshFile(f"{name} reference nodes outside 0..{nodes.shape[0] - 1}", field=name)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "facet_tags", tags)
        object.__setattr__(self, "facets", facets)
        if facets.size:
            owners = self._find_owners(facets, cells)
            opposite = self._opposite_vertices(facets, cells, owners)
            area = facet_area_vectors(nodes[facets])
            inward = np.einsum('kd,kd->k', area, nodes[opposite] - nodes[facets[:, 0]]) > 0
            facets = facets.copy()
            facets[inward, 0], facets[inward, 1] = facets[inward, 1], facets[inward, 0].copy()
            object.__setattr__(self, "facets", facets)
            object.__setattr__(self, "_owners", owners)
        else:
            object.__setattr__(self, "_owners", np.zeros(0, dtype=np.int64))

    def _find_owners(self, facets: np.ndarray, cells: np.ndarray) -> np.ndarray:
        # -1 marks a facet shared by two cells
        lookup: Dict[tuple, int] = {}
        for f in local_facets(self.dim):
            keys = np.sort(cells[:, list(f)], axis=1)
            for cell_id, key in enumerate(map(tuple, keys)):
                lookup[key] = -1 if key in lookup else cell_id
        owners = np.empty(facets.shape[0], dtype=np.int64)
        for i, key in enumerate(map(tuple, np.sort(facets, axis=1))):
            if key not in lookup:
                raise MalformedMeshFile(f"Boundary facet {i} is not a facet of any cell", field="b")
            if lookup[key] < 0:
                raise MalformedMeshFile(f"Boundary facet {i} is shared by two cells", field="b")
            owners[i] = lookup[key]
        return owners

    @staticmethod
    def _opposite_vertices(facets, cells, owners) -> np.ndarray:
        owner_cells = cells[owners]
        mask = ~np.any(owner_cells[:, :, None] == facets[:, None, :], axis=2)
        return owner_cells[np.arange(len(owners)), np.argmax(mask, axis=1)]

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_cells(self) -> int:
        return self.cells.shape[0]

    @property
    def facet_cells(self) -> np.ndarray:
        """Index of the cell adjacent to each boundary facet."""
        return self._owners

    @cached_property
    def tags(self) -> List[str]:
        return sorted(set(self.facet_tags.tolist()))

    @cached_property
    def volumes(self) -> np.ndarray:
        return signed_volumes(self.nodes, self.cells)

    @cached_property
    def shape_gradients(self) -> np.ndarray:
        """Gradients of the P1 basis functions, shape (M, dim + 1, dim)."""
        X = self.nodes[self.cells]
        D = (X[:, 1:, :] - X[:, :1, :]).transpose(0, 2, 1)
        inv = np.linalg.inv(D)
        B = np.empty((self.n_cells, self.dim + 1, self.dim))
        B[:, 1:, :] = inv
        B[:, 0, :] = -inv.sum(axis=1)
        return B

    @cached_property
    def facet_area_vectors(self) -> np.ndarray:
        """Outward area-weighted normals of the boundary facets in the reference configuration."""
        return facet_area_vectors(self.nodes[self.facets])

    @property
    def facet_areas(self) -> np.ndarray:
        return np.linalg.norm(self.facet_area_vectors, axis=1)

    @property
    def facet_normals(self) -> np.ndarray:
        return self.facet_area_vectors / self.facet_areas[:, None]

    def facets_with_tag(self, tag: str) -> np.ndarray:
        return np.flatnonzero(self.facet_tags == tag)

    def boundary_nodes(self, tag: str = None) -> np.ndarray:
        facets = self.facets if tag is None else self.facets[self.facets_with_tag(tag)]
        return np.unique(facets)

    def edges(self) -> np.ndarray:
        pairs = np.concatenate([self.cells[:, [a, b]] for a, b in combinations(range(self.dim + 1), 2)])
        return np.unique(np.sort(pairs, axis=1), axis=0)

    def checksum(self) -> str:
        """SHA-256 of the canonical mesh file text."""
        from mesh.io import mesh_to_text
        return hashlib.sha256(mesh_to_text(self).encode("utf-8")).hexdigest()
