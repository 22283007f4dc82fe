"""Shared types of the constitutive laws: energy evaluations, invariant transforms and the model interface."""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from config.consts import REFERENCE_IBAR2_POW32, REFERENCE_INVARIANTS
from helpers.exceptions import NonPositiveJacobian


@dataclass(frozen=True)
class EnergyEval:
    """
    Energy density and its derivatives with respect to the native invariants (I1, I2, J).

    @param W: Shape (n,).
    @param dW_dInv: Shape (n, 3).
    @param d2W_dInv2: Shape (n, 3, 3), symmetric.
    """
    W: np.ndarray
    dW_dInv: np.ndarray
    d2W_dInv2: np.ndarray


def as_invariants(inv) -> np.ndarray:
    """Validate a batch of (I1, I2, J) rows."""
    inv = np.atleast_2d(np.asarray(inv, dtype=float))
    if inv.shape[-1] != 3:
        raise ValueError(f"Invariants need 3 columns, got shape {inv.shape}")
    J = inv[:, 2]
    if np.any(~(J > 0)):
        index = int(np.argmax(~(J > 0)))
        raise NonPositiveJacobian(float(J[index]), index)
    return inv


def reference_invariants() -> np.ndarray:
    return np.array([REFERENCE_INVARIANTS])


def native_transform(inv: np.ndarray):
    """
    Shifted native inputs x = (I1 - 3, I2 - 3, J - 1).

    :return: (x, T, S) with T[n, k, a] = dx_k/dinv_a and S[n, k, a, b] = d2x_k/dinv_a dinv_b.
    """
    n = inv.shape[0]
    x = inv - np.array(REFERENCE_INVARIANTS)
    T = np.broadcast_to(np.eye(3), (n, 3, 3)).copy()
    S = np.zeros((n, 3, 3, 3))
    return x, T, S


def isochoric_transform(inv: np.ndarray, pow32: bool, shift: bool):
    """
    Inputs (Ibar1, Ibar2, J) or (Ibar1, Ibar2^{3/2}, J), optionally shifted by their reference values.

    :return: (x, T, S) as in native_transform.
    """
    I1, I2, J = inv[:, 0], inv[:, 1], inv[:, 2]
    n = inv.shape[0]
    T = np.zeros((n, 3, 3))
    S = np.zeros((n, 3, 3, 3))

    y1 = I1 * J ** (-2.0 / 3.0)
    T[:, 0, 0] = J ** (-2.0 / 3.0)
    T[:, 0, 2] = -2.0 / 3.0 * I1 * J ** (-5.0 / 3.0)
    S[:, 0, 0, 2] = S[:, 0, 2, 0] = -2.0 / 3.0 * J ** (-5.0 / 3.0)
    S[:, 0, 2, 2] = 10.0 / 9.0 * I1 * J ** (-8.0 / 3.0)

    if pow32:
        root = np.sqrt(I2)
        y2 = I2 * root / J ** 2
        T[:, 1, 1] = 1.5 * root / J ** 2
        T[:, 1, 2] = -2.0 * I2 * root / J ** 3
        S[:, 1, 1, 1] = 0.75 / (root * J ** 2)
        S[:, 1, 1, 2] = S[:, 1, 2, 1] = -3.0 * root / J ** 3
        S[:, 1, 2, 2] = 6.0 * I2 * root / J ** 4
    else:
        y2 = I2 * J ** (-4.0 / 3.0)
        T[:, 1, 1] = J ** (-4.0 / 3.0)
        T[:, 1, 2] = -4.0 / 3.0 * I2 * J ** (-7.0 / 3.0)
        S[:, 1, 1, 2] = S[:, 1, 2, 1] = -4.0 / 3.0 * J ** (-7.0 / 3.0)
        S[:, 1, 2, 2] = 28.0 / 9.0 * I2 * J ** (-10.0 / 3.0)

    T[:, 2, 2] = 1.0
    x = np.column_stack([y1, y2, J])
    if shift:
        x = x - np.array([3.0, REFERENCE_IBAR2_POW32 if pow32 else 3.0, 1.0])
    return x, T, S


def chain_to_native(W, g_x, H_x, T, S) -> EnergyEval:
    """Pull derivatives with respect to transformed inputs back to (I1, I2, J)."""
    g = np.einsum('nk,nka->na', g_x, T)
    H = np.einsum('nka,nkl,nlb->nab', T, H_x, T) + np.einsum('nk,nkab->nab', g_x, S)
    H = 0.5 * (H + H.transpose(0, 2, 1))
    return EnergyEval(W=W, dW_dInv=g, d2W_dInv2=H)


class ConstitutiveModel(ABC):
    """
    Common interface of analytic laws and neural networks.
    Trainable parameters are exposed as an unconstrained flat vector theta.
    """
    kind: str = ""

    @property
    @abstractmethod
    def energy_scale(self) -> float:
        """Typical stiffness of the law, used to scale solver tolerances."""

    @abstractmethod
    def energy(self, inv) -> EnergyEval:
        """Energy and its derivatives at a batch of invariants of shape (n, 3)."""

    @abstractmethod
    def parameter_vector(self) -> np.ndarray:
        """Current trainable parameters theta."""

    @abstractmethod
    def with_parameters(self, theta) -> "ConstitutiveModel":
        """Copy of the model with new trainable parameters."""

    @abstractmethod
    def parameter_names(self) -> List[str]:
        """One label per entry of theta."""

    @abstractmethod
    def parameter_jacobians(self, inv) -> Tuple[np.ndarray, np.ndarray]:
        """
        Mixed sensitivities at a batch of invariants.

        :return: (dW/dtheta of shape (n, P), d(dW/dInv)/dtheta of shape (n, 3, P)).
        """

    @property
    def n_params(self) -> int:
        return self.parameter_vector().size
