"""
Finite-deformation tensor algebra on batches of 3x3 matrices.

Every function accepts a single tensor of shape (3, 3) or a batch of shape (..., 3, 3)
and returns arrays with the matching leading shape.
"""

from dataclasses import dataclass

import numpy as np

from helpers.exceptions import NonPositiveJacobian

IDENTITY = np.eye(3)


def _as_tensor(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.shape[-2:] != (3, 3):
        raise ValueError(f"Expected trailing shape (3, 3), got {a.shape}")
    return a


def deformation_gradient(grad_d) -> np.ndarray:
    """
    F = I + grad d.

    :param grad_d: Displacement gradient(s), shape (..., 3, 3).
    :return: Deformation gradient(s) of the same shape.
    """
    grad_d = _as_tensor(grad_d)
    if not np.all(np.isfinite(grad_d)):
        raise ValueError("Displacement gradient contains non-finite entries")
    return IDENTITY + grad_d


def embed_plane_strain(tensor_2d) -> np.ndarray:
    """
    Embed in-plane 2x2 displacement gradients into 3x3 with zero out-of-plane entries,
    which yields F33 = 1 after deformation_gradient.
    """
    tensor_2d = np.asarray(tensor_2d, dtype=float)
    out = np.zeros(tensor_2d.shape[:-2] + (3, 3))
    out[..., :2, :2] = tensor_2d
    return out


def cofactor(F) -> np.ndarray:
    """cof F = det(F) F^{-T}, built column-wise from cross products so it stays defined for singular F."""
    F = _as_tensor(F)
    f0, f1, f2 = F[..., :, 0], F[..., :, 1], F[..., :, 2]
    return np.stack([np.cross(f1, f2), np.cross(f2, f0), np.cross(f0, f1)], axis=-1)


def determinant(F) -> np.ndarray:
    F = _as_tensor(F)
    return np.einsum('...i,...i->...', F[..., :, 0], np.cross(F[..., :, 1], F[..., :, 2]))


@dataclass(frozen=True)
class DeformationState:
    """
    Deformation gradient with its cofactor and the isotropic invariants.

    @param F: Deformation gradient(s).
    @param cofF: Cofactor(s) of F.
    @param J: det F, strictly positive.
    @param I1: |F|^2.
    @param I2: |cof F|^2.
    """
    F: np.ndarray
    cofF: np.ndarray
    J: np.ndarray
    I1: np.ndarray
    I2: np.ndarray

    def stacked(self) -> np.ndarray:
        """Invariants as an array of shape (..., 3) ordered (I1, I2, J)."""
        return np.stack([self.I1, self.I2, self.J], axis=-1)


def invariants(F) -> DeformationState:
    """
    Compute (I1, I2, J) of F.

    :raises NonPositiveJacobian: when det F <= 0 for any entry of the batch.
    """
    F = _as_tensor(F)
    cof = cofactor(F)
    J = np.einsum('...i,...i->...', F[..., :, 0], cof[..., :, 0])
    bad = ~(J > 0)
    if np.any(bad):
        flat = np.atleast_1d(J).reshape(-1)
        index = int(np.argmax(np.atleast_1d(bad).reshape(-1)))
        raise NonPositiveJacobian(float(flat[index]), index if F.ndim > 2 else None)
    I1 = np.einsum('...ij,...ij->...', F, F)
    I2 = np.einsum('...ij,...ij->...', cof, cof)
    return DeformationState(F=F, cofF=cof, J=J, I1=I1, I2=I2)


def isochoric_invariants(state: DeformationState):
    """
    Volume-normalised invariants.

    :return: (Ibar1, Ibar2, Ibar2^{3/2})
    """
    J = state.J
    ibar1 = J ** (-2.0 / 3.0) * state.I1
    ibar2 = J ** (-4.0 / 3.0) * state.I2
    return ibar1, ibar2, ibar2 ** 1.5


def principal_stretches(F) -> np.ndarray:
    """
    Singular values of F in descending order, as square roots of the eigenvalues of C = F^T F.

    :return: Array of shape (..., 3).
    """
    F = _as_tensor(F)
    C = np.einsum('...ki,...kj->...ij', F, F)
    eig = np.clip(np.linalg.eigvalsh(C), 0.0, None)
    return np.sqrt(eig)[..., ::-1]


def invariant_first_derivatives(state: DeformationState):
    """
    Derivatives of (I1, I2, J) with respect to F.

    :return: Tuple of three arrays, each of shape (..., 3, 3).
    """
    F = state.F
    FFtF = np.einsum('...ik,...jk,...jl->...il', F, F, F)
    dI1 = 2.0 * F
    dI2 = 2.0 * (state.I1[..., None, None] * F - FFtF)
    dJ = state.cofF
    return dI1, dI2, dJ


def invariant_second_derivatives(state: DeformationState):
    """
    Second derivatives of (I1, I2, J) with respect to F, indexed [..., i, J, k, L].

    :return: Tuple of three arrays, each of shape (..., 3, 3, 3, 3).
    """
    F = state.F
    cof = state.cofF
    lead = F.shape[:-2]
    eye = IDENTITY
    d2I1 = np.broadcast_to(2.0 * np.einsum('ik,jl->ijkl', eye, eye), lead + (3, 3, 3, 3)).copy()

    C = np.einsum('...ki,...kj->...ij', F, F)
    B = np.einsum('...ik,...jk->...ij', F, F)
    I1 = state.I1[..., None, None, None, None]
    d2I2 = 2.0 * (2.0 * np.einsum('...ij,...kl->...ijkl', F, F)
                  + I1 * np.einsum('ik,jl->ijkl', eye, eye)
                  - np.einsum('ik,...lj->...ijkl', eye, C)
                  - np.einsum('...il,...kj->...ijkl', F, F)
                  - np.einsum('...ik,jl->...ijkl', B, eye))

    J = state.J[..., None, None, None, None]
    d2J = (np.einsum('...ij,...kl->...ijkl', cof, cof) - np.einsum('...il,...kj->...ijkl', cof, cof)) / J
    return d2I1, d2I2, d2J
