"""
Vectorized P1 assembly: internal forces, consistent tangent, boundary loads and springs,
and the parameter contraction used by the adjoint gradient.
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy import sparse

from constitutive.base import ConstitutiveModel
from constitutive.stress import stress_and_tangent
from fem.bc import FollowerPressure, NormalSpring, Traction
from fem.space import FeSpace
from helpers.exceptions import ConfigError, ElementInversion
from kinematics.tensors import (IDENTITY, determinant, invariant_first_derivatives, invariants)


def _skew(v: np.ndarray) -> np.ndarray:
    """Cross-product matrices [v]x for rows of v, shape (K, 3, 3)."""
    out = np.zeros(v.shape[:-1] + (3, 3))
    out[..., 0, 1], out[..., 0, 2] = -v[..., 2], v[..., 1]
    out[..., 1, 0], out[..., 1, 2] = v[..., 2], -v[..., 0]
    out[..., 2, 0], out[..., 2, 1] = -v[..., 1], v[..., 0]
    return out


@dataclass
class BoundaryGroup:
    """Facets of one tag carrying a Neumann-type condition."""
    tag: str
    condition: object
    facets: np.ndarray        # (K, dim) node indices
    dofs: np.ndarray          # (K, dim * dim) node-major facet dofs
    area_vectors: np.ndarray  # (K, dim)
    areas: np.ndarray
    normals: np.ndarray


def _load_density(values, dim: int, tag: str) -> np.ndarray:
    vector = np.asarray(values, dtype=float).reshape(-1)
    if vector.shape[0] != dim:
        raise ConfigError(f"Load vector {tuple(vector)} on tag '{tag}' does not match dimension {dim}")
    return vector


class Assembler:
    """Precomputed element data of one FeSpace."""

    def __init__(self, space: FeSpace):
        mesh = space.mesh
        self.space = space
        self.dim = dim = space.dim
        comps = np.arange(dim)
        self.cell_dofs = (mesh.cells[:, :, None] * dim + comps).reshape(mesh.n_cells, -1)
        self.B = mesh.shape_gradients
        self.vol = mesh.volumes
        if np.any(self.vol <= 0):
            raise ConfigError("Mesh contains cells with non-positive reference volume")
        self.groups: List[BoundaryGroup] = []
        for tag in space.bc:
            condition = space.bc[tag]
            if not isinstance(condition, (Traction, NormalSpring, FollowerPressure)):
                continue
            ids = mesh.facets_with_tag(tag)
            facets = mesh.facets[ids]
            self.groups.append(BoundaryGroup(
                tag, condition, facets, (facets[:, :, None] * dim + comps).reshape(len(ids), -1),
                mesh.facet_area_vectors[ids], mesh.facet_areas[ids], mesh.facet_normals[ids]))

    # kinematics

    def deformation_gradients(self, full: np.ndarray) -> np.ndarray:
        """F per cell, shape (M, 3, 3).

        :raises ElementInversion: for the first cell with J <= 0.
        """
        u = full[self.cell_dofs].reshape(self.cell_dofs.shape[0], self.dim + 1, self.dim)
        G = np.einsum('mai,maj->mij', u, self.B)
        F = np.broadcast_to(IDENTITY, (G.shape[0], 3, 3)).copy()
        F[:, :self.dim, :self.dim] += G
        J = determinant(F)
        bad = np.flatnonzero(~(J > 0))
        if bad.size:
            raise ElementInversion(int(bad[0]), float(J[bad[0]]))
        return F

    def _scatter(self, dofs: np.ndarray, values: np.ndarray) -> np.ndarray:
        return np.bincount(dofs.ravel(), weights=values.ravel(), minlength=self.space.n_dofs)

    def _sparse(self, dofs: np.ndarray, blocks: np.ndarray) -> sparse.csr_matrix:
        rows = np.broadcast_to(dofs[:, :, None], blocks.shape).ravel()
        cols = np.broadcast_to(dofs[:, None, :], blocks.shape).ravel()
        n = self.space.n_dofs
        return sparse.coo_matrix((blocks.ravel(), (rows, cols)), shape=(n, n)).tocsr()

    # volume terms

    def _element_forces(self, P: np.ndarray) -> np.ndarray:
        P2 = P[:, :self.dim, :self.dim]
        return np.einsum('mij,maj->mai', P2, self.B) * self.vol[:, None, None]

    def _element_stiffness(self, A: np.ndarray) -> np.ndarray:
        d = self.dim
        A2 = A[:, :d, :d, :d, :d]
        K = np.einsum('maj,mijkl,mbl->maibk', self.B, A2, self.B) * self.vol[:, None, None, None, None]
        n = (d + 1) * d
        return K.reshape(-1, n, n)

    # boundary terms

    def _group_load(self, group: BoundaryGroup, load_scale: float) -> np.ndarray:
        """Dead load density per facet, shape (K, dim)."""
        c = group.condition
        h = np.zeros((group.facets.shape[0], self.dim))
        if isinstance(c, Traction):
            if c.vector is not None:
                h += _load_density(c.vector, self.dim, group.tag)
            h += c.normal * group.normals
        elif isinstance(c, NormalSpring):
            h += c.normal_traction * group.normals
        elif isinstance(c, FollowerPressure) and c.dead_load is not None:
            h -= _load_density(c.dead_load, self.dim, group.tag)
        return load_scale * h

    def _spring_mass(self, group: BoundaryGroup) -> np.ndarray:
        """Exact facet mass matrices, shape (K, dim, dim)."""
        d = self.dim
        base = (np.ones((d, d)) + np.eye(d)) / (d * (d + 1))
        return group.areas[:, None, None] * base

    def _deformed_area_vectors(self, group: BoundaryGroup, full: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        x = self.space.mesh.nodes[group.facets] + full[group.dofs].reshape(group.facets.shape + (self.dim,))
        if self.dim == 2:
            t = x[:, 1] - x[:, 0]
            return np.column_stack([t[:, 1], -t[:, 0]]), x
        return 0.5 * np.cross(x[:, 1] - x[:, 0], x[:, 2] - x[:, 0]), x

    def _boundary_residual(self, full: np.ndarray, load_scale: float) -> np.ndarray:
        r = np.zeros(self.space.n_dofs)
        d = self.dim
        for group in self.groups:
            K = group.facets.shape[0]
            dead = self._group_load(group, load_scale)
            local = -np.repeat((dead * group.areas[:, None] / d)[:, None, :], d, axis=1)
            c = group.condition
            if isinstance(c, NormalSpring) and c.stiffness > 0:
                u = full[group.dofs].reshape(K, d, d)
                un = np.einsum('kbi,ki->kb', u, group.normals)
                Mu = np.einsum('kab,kb->ka', self._spring_mass(group), un)
                local = local + c.stiffness * Mu[:, :, None] * group.normals[:, None, :]
            elif isinstance(c, FollowerPressure):
                a, _ = self._deformed_area_vectors(group, full)
                local = local + load_scale * c.magnitude * np.repeat(a[:, None, :] / d, d, axis=1)
            r += self._scatter(group.dofs, local.reshape(K, -1))
        return r

    def _boundary_tangent_blocks(self, full: np.ndarray, load_scale: float):
        d = self.dim
        for group in self.groups:
            c = group.condition
            K = group.facets.shape[0]
            if isinstance(c, NormalSpring) and c.stiffness > 0:
                nn = np.einsum('ki,kj->kij', group.normals, group.normals)
                blocks = c.stiffness * np.einsum('kab,kij->kaibj', self._spring_mass(group), nn)
                yield group.dofs, blocks.reshape(K, d * d, d * d)
            elif isinstance(c, FollowerPressure) and c.magnitude != 0.0:
                # d a / d x_c for each facet node c, shape (K, dim(c), dim, dim)
                if d == 2:
                    R = np.array([[0.0, 1.0], [-1.0, 0.0]])
                    da = np.stack([np.broadcast_to(-R, (K, 2, 2)), np.broadcast_to(R, (K, 2, 2))], axis=1)
                else:
                    _, x = self._deformed_area_vectors(group, full)
                    e1, e2 = x[:, 1] - x[:, 0], x[:, 2] - x[:, 0]
                    da = np.stack([0.5 * _skew(e2 - e1), -0.5 * _skew(e2), 0.5 * _skew(e1)], axis=1)
                scale = load_scale * c.magnitude / d
                # every facet node a receives scale * a, so row blocks repeat over a
                blocks = scale * np.broadcast_to(da.transpose(0, 2, 1, 3)[:, None], (K, d, d, d, d))
                yield group.dofs, blocks.reshape(K, d * d, d * d)

    # public assembly

    def residual(self, model: ConstitutiveModel, full: np.ndarray, load_scale: float) -> np.ndarray:
        """Full residual vector r(u) = internal - external, length n_dofs."""
        F = self.deformation_gradients(full)
        P, _ = self._stress(model, F, tangent=False)
        r = self._scatter(self.cell_dofs, self._element_forces(P))
        return r + self._boundary_residual(full, load_scale)

    def residual_and_scale(self, model, full, load_scale) -> Tuple[np.ndarray, float]:
        """Residual plus the norm of the summed absolute element forces, the round-off reference."""
        F = self.deformation_gradients(full)
        P, _ = self._stress(model, F, tangent=False)
        fe = self._element_forces(P)
        r = self._scatter(self.cell_dofs, fe) + self._boundary_residual(full, load_scale)
        scale = float(np.linalg.norm(self._scatter(self.cell_dofs, np.abs(fe))))
        return r, scale

    def tangent(self, model: ConstitutiveModel, full: np.ndarray, load_scale: float) -> sparse.csr_matrix:
        """Full consistent tangent dr/du, n_dofs x n_dofs CSR."""
        F = self.deformation_gradients(full)
        _, A = self._stress(model, F, tangent=True)
        K = self._sparse(self.cell_dofs, self._element_stiffness(A))
        for dofs, blocks in self._boundary_tangent_blocks(full, load_scale):
            K = K + self._sparse(dofs, blocks)
        return K.tocsr()

    @staticmethod
    def _stress(model, F, tangent: bool):
        if tangent:
            return stress_and_tangent(model, F)
        state = invariants(F)
        g = model.energy(state.stacked()).dW_dInv
        dI = np.stack(invariant_first_derivatives(state), axis=1)
        return np.einsum('na,naij->nij', g, dI), None

    def potential_energy(self, model: ConstitutiveModel, full: np.ndarray, load_scale: float) -> float:
        """
        Total potential: stored energy minus dead-load work plus spring energy.

        :raises ConfigError: when a follower pressure makes the load non-conservative.
        """
        F = self.deformation_gradients(full)
        state = invariants(F)
        W = model.energy(state.stacked()).W
        total = float(np.dot(self.vol, W))
        d = self.dim
        for group in self.groups:
            c = group.condition
            if isinstance(c, FollowerPressure) and c.magnitude != 0.0:
                raise ConfigError("Follower pressure has no potential")
            K = group.facets.shape[0]
            u = full[group.dofs].reshape(K, d, d)
            dead = self._group_load(group, load_scale)
            total -= float(np.einsum('ki,k,kbi->', dead, group.areas / d, u))
            if isinstance(c, NormalSpring) and c.stiffness > 0:
                un = np.einsum('kbi,ki->kb', u, group.normals)
                total += 0.5 * c.stiffness * float(np.einsum('ka,kab,kb->', un, self._spring_mass(group), un))
        return total

    def parameter_contraction(self, model: ConstitutiveModel, full: np.ndarray, lam: np.ndarray) -> np.ndarray:
        """
        lam^T dr/dtheta for a full-length multiplier vector lam, shape (P,).
        Boundary terms do not depend on the material parameters.
        """
        F = self.deformation_gradients(full)
        state = invariants(F)
        _, dg = model.parameter_jacobians(state.stacked())
        dI = np.stack(invariant_first_derivatives(state), axis=1)
        lam_cells = lam[self.cell_dofs].reshape(self.cell_dofs.shape[0], self.dim + 1, self.dim)
        G = np.einsum('mai,maj->mij', lam_cells, self.B)
        s = np.einsum('maij,mij->ma', dI[:, :, :self.dim, :self.dim], G)
        return np.einsum('m,ma,map->p', self.vol, s, dg)


def assembler(space: FeSpace) -> Assembler:
    """Assembler cached on the space."""
    cached = getattr(space, "_assembler", None)
    if cached is None:
        cached = Assembler(space)
        space._assembler = cached
    return cached


def assemble_residual(space: FeSpace, model: ConstitutiveModel, free_values: np.ndarray,
                      load_scale: float) -> np.ndarray:
    """Residual restricted to the free dofs."""
    full = space.expand(free_values, load_scale)
    return assembler(space).residual(model, full, load_scale)[space.free_dofs]


def assemble_tangent(space: FeSpace, model: ConstitutiveModel, free_values: np.ndarray,
                     load_scale: float) -> sparse.csr_matrix:
    """Free-free block of the consistent tangent."""
    full = space.expand(free_values, load_scale)
    K = assembler(space).tangent(model, full, load_scale)
    return K[space.free_dofs][:, space.free_dofs].tocsr()


def potential_energy(space: FeSpace, model: ConstitutiveModel, free_values: np.ndarray,
                     load_scale: float) -> float:
    return assembler(space).potential_energy(model, space.expand(free_values, load_scale), load_scale)
