from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List

import numpy as np

from config.logging_config import setup_logger
from fem.bc import BcProgram, DirichletNormal, DirichletVector
from helpers.exceptions import ConfigError
from mesh.mesh import Mesh

LOG = setup_logger(__name__)

AXIS_ALIGNMENT_TOL = 1e-8


@dataclass(frozen=True)
class DirichletConstraint:
    """
    Scalar dof constraints contributed by one boundary tag.

    @param tag: Boundary tag.
    @param dofs: Global dof indices.
    @param nodes: Node of each dof.
    @param components: Displacement component of each dof.
    @param signs: Outward normal sign of each dof (normal constraints only, else 1).
    @param condition: The originating condition.
    """
    tag: str
    dofs: np.ndarray
    nodes: np.ndarray
    components: np.ndarray
    signs: np.ndarray
    condition: object


class FeSpace:
    """
    Vector P1 space on a mesh. Dofs are node-major: dof = node * dim + component.
    Dirichlet constraints are resolved once from the boundary program.
    """

    def __init__(self, mesh: Mesh, bc: BcProgram):
        bc.check_mesh(mesh.tags)
        self.mesh = mesh
        self.bc = bc
        self.dim = mesh.dim
        self.dofs_per_node = mesh.dim
        self.n_dofs = mesh.n_nodes * mesh.dim
        self.dirichlet_map: Dict[str, DirichletConstraint] = {}
        for tag in bc:
            condition = bc[tag]
            if isinstance(condition, DirichletVector):
                self.dirichlet_map[tag] = self._vector_constraint(tag, condition)
            elif isinstance(condition, DirichletNormal):
                self.dirichlet_map[tag] = self._normal_constraint(tag, condition)

        constrained = np.concatenate([c.dofs for c in self.dirichlet_map.values()]) \
            if self.dirichlet_map else np.zeros(0, dtype=np.int64)
        self.constrained_dofs = np.unique(constrained)
        mask = np.ones(self.n_dofs, dtype=bool)
        mask[self.constrained_dofs] = False
        self.free_dofs = np.flatnonzero(mask)
        self.free_dof_index = np.concatenate([self.free_dofs, self.constrained_dofs])

    def _vector_constraint(self, tag: str, condition: DirichletVector) -> DirichletConstraint:
        nodes = self.mesh.boundary_nodes(tag)
        node_rep = np.repeat(nodes, self.dim)
        comps = np.tile(np.arange(self.dim), nodes.size)
        return DirichletConstraint(tag, node_rep * self.dim + comps, node_rep, comps,
                                   np.ones(node_rep.size), condition)

    def _normal_constraint(self, tag: str, condition: DirichletNormal) -> DirichletConstraint:
        facet_ids = self.mesh.facets_with_tag(tag)
        normals = self.mesh.facet_normals[facet_ids]
        axes = np.argmax(np.abs(normals), axis=1)
        aligned = np.abs(normals[np.arange(len(axes)), axes])
        if np.any(aligned < 1.0 - AXIS_ALIGNMENT_TOL):
            raise ConfigError(f"Normal displacement constraint on tag '{tag}' needs axis-aligned facets")
        signs = np.sign(normals[np.arange(len(axes)), axes])
        facets = self.mesh.facets[facet_ids]
        nodes = facets.reshape(-1)
        comps = np.repeat(axes, self.dim)
        sgn = np.repeat(signs, self.dim)
        dofs, first = np.unique(nodes * self.dim + comps, return_index=True)
        return DirichletConstraint(tag, dofs, nodes[first], comps[first], sgn[first], condition)

    @cached_property
    def h(self) -> float:
        """Characteristic element size, (mean cell volume)^(1/dim)."""
        return float(np.mean(np.abs(self.mesh.volumes)) ** (1.0 / self.dim))

    @property
    def n_free(self) -> int:
        return self.free_dofs.size

    def dirichlet_values(self, load_scale: float) -> np.ndarray:
        """Values of the constrained dofs, aligned with constrained_dofs."""
        full = np.zeros(self.n_dofs)
        for constraint in self.dirichlet_map.values():
            condition = constraint.condition
            if isinstance(condition, DirichletVector):
                nodes = constraint.nodes[::self.dim]
                values = condition.displacement(self.mesh.nodes[nodes], load_scale).reshape(-1)
            else:
                values = constraint.signs * load_scale * condition.value
            full[constraint.dofs] = values
        return full[self.constrained_dofs]

    def expand(self, free_values: np.ndarray, load_scale: float) -> np.ndarray:
        """Full dof vector from free values and the Dirichlet lifting at a load factor."""
        full = np.zeros(self.n_dofs)
        full[self.free_dofs] = free_values
        full[self.constrained_dofs] = self.dirichlet_values(load_scale)
        return full

    def nodal(self, full: np.ndarray) -> np.ndarray:
        return full.reshape(self.mesh.n_nodes, self.dim)

    def constraint_tags(self) -> List[str]:
        return list(self.dirichlet_map)
