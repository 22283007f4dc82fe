"""Piola stress, material tangent and parameter sensitivities of any constitutive model."""

import numpy as np

from constitutive.base import ConstitutiveModel
from kinematics.tensors import (invariant_first_derivatives, invariant_second_derivatives,
                                invariants)


def _flatten(F):
    F = np.asarray(F, dtype=float)
    return F.reshape(-1, 3, 3), F.shape[:-2]


def piola_stress(model: ConstitutiveModel, F) -> np.ndarray:
    """
    P = dW/dI1 2F + dW/dI2 2(I1 F - F F^T F) + dW/dJ cof F.

    :param F: Shape (3, 3) or (..., 3, 3).
    :return: Same shape as F.
    """
    flat, lead = _flatten(F)
    state = invariants(flat)
    g = model.energy(state.stacked()).dW_dInv
    dI = invariant_first_derivatives(state)
    P = sum(g[:, a, None, None] * dI[a] for a in range(3))
    return P.reshape(lead + (3, 3))


def material_tangent(model: ConstitutiveModel, F) -> np.ndarray:
    """
    A = dP/dF = sum_a g_a d2I_a + sum_ab H_ab dI_a (x) dI_b.

    :return: Shape lead + (3, 3, 3, 3).
    """
    flat, lead = _flatten(F)
    state = invariants(flat)
    ev = model.energy(state.stacked())
    dI = np.stack(invariant_first_derivatives(state), axis=1)
    d2I = invariant_second_derivatives(state)
    A = sum(ev.dW_dInv[:, a, None, None, None, None] * d2I[a] for a in range(3))
    A = A + np.einsum('nab,naij,nbkl->nijkl', ev.d2W_dInv2, dI, dI)
    return A.reshape(lead + (3, 3, 3, 3))


def stress_and_tangent(model: ConstitutiveModel, F: np.ndarray):
    """Piola stress and tangent of a batch (n, 3, 3) from a single energy evaluation."""
    state = invariants(F)
    ev = model.energy(state.stacked())
    dI = np.stack(invariant_first_derivatives(state), axis=1)
    d2I = invariant_second_derivatives(state)
    P = np.einsum('na,naij->nij', ev.dW_dInv, dI)
    A = sum(ev.dW_dInv[:, a, None, None, None, None] * d2I[a] for a in range(3))
    A = A + np.einsum('nab,naij,nbkl->nijkl', ev.d2W_dInv2, dI, dI)
    return P, A


def stress_param_gradient(model: ConstitutiveModel, F) -> np.ndarray:
    """
    dP/dtheta for every trainable parameter.

    :return: Shape lead + (P, 3, 3).
    """
    flat, lead = _flatten(F)
    state = invariants(flat)
    _, dg = model.parameter_jacobians(state.stacked())
    dI = np.stack(invariant_first_derivatives(state), axis=1)
    out = np.einsum('nap,naij->npij', dg, dI)
    return out.reshape(lead + out.shape[1:])


def energy_param_gradient(model: ConstitutiveModel, F) -> np.ndarray:
    """
    dW/dtheta for every trainable parameter.

    :return: Shape lead + (P,).
    """
    flat, lead = _flatten(F)
    state = invariants(flat)
    dW, _ = model.parameter_jacobians(state.stacked())
    return dW.reshape(lead + dW.shape[1:])


def strain_energy(model: ConstitutiveModel, F) -> np.ndarray:
    flat, lead = _flatten(F)
    return model.energy(invariants(flat).stacked()).W.reshape(lead)
