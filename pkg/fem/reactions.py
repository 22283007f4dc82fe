"""Reaction forces on Dirichlet boundaries and their sensitivities."""

from typing import Tuple

import numpy as np

from constitutive.base import ConstitutiveModel
from constitutive.stress import stress_and_tangent
from fem.assembly import assembler
from fem.solver import EquilibriumSolution
from fem.space import FeSpace
from helpers.exceptions import TagNotDirichlet
from kinematics.tensors import invariant_first_derivatives, invariants


def _tag_data(space: FeSpace, tag: str):
    if not space.bc.is_dirichlet(tag):
        raise TagNotDirichlet(tag)
    mesh = space.mesh
    ids = mesh.facets_with_tag(tag)
    N = np.zeros((ids.size, 3))
    N[:, :space.dim] = mesh.facet_normals[ids]
    return mesh.facet_cells[ids], N, mesh.facet_areas[ids]


def _owner_gradients(space: FeSpace, solution: EquilibriumSolution, owners: np.ndarray) -> np.ndarray:
    asm = assembler(space)
    full = space.expand(solution.dof_vector, solution.load_scale)
    return asm.deformation_gradients(full)[owners]


def reaction_vector(space: FeSpace, model: ConstitutiveModel, solution: EquilibriumSolution,
                    tag: str) -> np.ndarray:
    """Total reference traction sum_f A_f P N over the facets of a tag, shape (dim,)."""
    owners, N, areas = _tag_data(space, tag)
    P, _ = stress_and_tangent(model, _owner_gradients(space, solution, owners))
    return np.einsum('f,fij,fj->i', areas, P, N)[:space.dim]


def reaction_force(space: FeSpace, model: ConstitutiveModel, solution: EquilibriumSolution,
                   tag: str) -> float:
    """
    Normal reaction sum_f A_f N . (P N) on a Dirichlet tag.

    :raises TagNotDirichlet: when the tag carries no Dirichlet condition.
    """
    owners, N, areas = _tag_data(space, tag)
    P, _ = stress_and_tangent(model, _owner_gradients(space, solution, owners))
    return float(np.einsum('f,fi,fij,fj->', areas, N, P, N))


def reaction_gradients(space: FeSpace, model: ConstitutiveModel, solution: EquilibriumSolution,
                       tag: str) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    Reaction force with its derivatives.

    :return: (R, dR/du over the free dofs, dR/dtheta)
    """
    asm = assembler(space)
    owners, N, areas = _tag_data(space, tag)
    F = _owner_gradients(space, solution, owners)
    P, A = stress_and_tangent(model, F)
    R = float(np.einsum('f,fi,fij,fj->', areas, N, P, N))

    d = space.dim
    B = asm.B[owners]
    local = np.einsum('f,fi,fj,fijkl,fbl->fbk', areas, N, N, A[:, :, :, :d, :d], B)
    dR_du = np.bincount(asm.cell_dofs[owners].ravel(), weights=local.reshape(len(owners), -1).ravel(),
                        minlength=space.n_dofs)[space.free_dofs]

    state = invariants(F)
    _, dg = model.parameter_jacobians(state.stacked())
    dI = np.stack(invariant_first_derivatives(state), axis=1)
    nIn = np.einsum('fi,faij,fj->fa', N, dI, N)
    dR_dtheta = np.einsum('f,fa,fap->p', areas, nIn, dg)
    return R, dR_du, dR_dtheta
