"""
Hyperelastic neural network: a positivity-constrained convex network on the strain invariants,
completed with a volumetric term and the stress-free and energy-free reference corrections.

Derivatives with respect to the inputs (first and second order) are propagated forward layer
by layer; mixed derivatives with respect to the parameters are obtained by a reverse sweep over
the same recursion.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from constitutive.activations import shifted_softplus, shifted_softplus_derivatives, softplus, softplus_grad
from constitutive.base import (ConstitutiveModel, EnergyEval, as_invariants, chain_to_native,
                               isochoric_transform, native_transform, reference_invariants)
from models.architecture_model import HnnArchitecture

# Coefficients of the stress-free condition 2 dW/dI1 + 4 dW/dI2 + dW/dJ = 0 at F = I
STRESS_FREE_WEIGHTS = np.array([2.0, 4.0, 1.0])


def parameter_layout(arch: HnnArchitecture) -> List[Tuple[str, Tuple[int, ...]]]:
    """
    Names and shapes of the raw parameters, in flattening order.
    """
    layout = []
    for i, width in enumerate(arch.neurons):
        if i == 0 or arch.skip_connections:
            layout += [(f"raw_wI.{i}", (width,)), (f"raw_wII.{i}", (width,)), (f"wJ.{i}", (width,))]
        layout.append((f"bias.{i}", (width,)))
    for i in range(arch.layers - 1):
        layout.append((f"raw_Wz.{i}", (arch.neurons[i + 1], arch.neurons[i])))
    layout.append(("raw_w_out", (arch.neurons[-1],)))
    layout.append(("raw_w_vol", ()))
    return layout


@dataclass(frozen=True, eq=False)
class HnnParams:
    """
    Unconstrained (raw) parameters of a network, keyed as in parameter_layout.
    """
    arch: HnnArchitecture
    values: Dict[str, np.ndarray]

    def to_vector(self) -> np.ndarray:
        return np.concatenate([np.asarray(self.values[name], dtype=float).reshape(-1)
                               for name, _ in parameter_layout(self.arch)])

    @classmethod
    def from_vector(cls, arch: HnnArchitecture, theta) -> "HnnParams":
        theta = np.asarray(theta, dtype=float)
        layout = parameter_layout(arch)
        size = sum(int(np.prod(shape)) for _, shape in layout)
        if theta.shape != (size,):
            raise ValueError(f"Expected {size} parameters, got shape {theta.shape}")
        values, offset = {}, 0
        for name, shape in layout:
            count = int(np.prod(shape))
            values[name] = theta[offset:offset + count].reshape(shape).copy()
            offset += count
        return cls(arch, values)

    @property
    def w_vol(self) -> float:
        return float(softplus(self.values["raw_w_vol"]))


@dataclass
class _Weights:
    A: List[Optional[np.ndarray]]
    bias: List[np.ndarray]
    Wz: List[np.ndarray]
    w_out: np.ndarray


@dataclass
class _LayerCache:
    z_prev: Optional[np.ndarray]
    zd_prev: Optional[np.ndarray]
    yd: np.ndarray
    s1: np.ndarray
    s2: np.ndarray
    z: np.ndarray
    zd: np.ndarray


def effective_weights(params: HnnParams) -> _Weights:
    """Map raw parameters to the positive weights used by the forward pass."""
    arch, v = params.arch, params.values
    A, bias, Wz = [], [], []
    for i in range(arch.layers):
        if f"raw_wI.{i}" in v:
            A.append(np.column_stack([softplus(v[f"raw_wI.{i}"]), softplus(v[f"raw_wII.{i}"]), v[f"wJ.{i}"]]))
        else:
            A.append(None)
        bias.append(np.asarray(v[f"bias.{i}"], dtype=float))
    for i in range(arch.layers - 1):
        Wz.append(softplus(v[f"raw_Wz.{i}"]) / arch.neurons[i])
    w_out = softplus(v["raw_w_out"]) / arch.neurons[-1]
    return _Weights(A, bias, Wz, w_out)


def _forward(weights: _Weights, scale: float, x: np.ndarray):
    n = x.shape[0]
    caches = []
    z_prev = zd_prev = zdd_prev = None
    for i, A in enumerate(weights.A):
        width = weights.bias[i].shape[0]
        y = np.tile(weights.bias[i], (n, 1))
        yd = np.zeros((n, 3, width))
        ydd = np.zeros((n, 3, 3, width))
        if A is not None:
            y += x @ A.T
            yd += A.T[None, :, :]
        if i > 0:
            Wz = weights.Wz[i - 1]
            y += z_prev @ Wz.T
            yd += zd_prev @ Wz.T
            ydd += zdd_prev @ Wz.T
        z = shifted_softplus(y)
        s1, s2 = shifted_softplus_derivatives(y)
        zd = s1[:, None, :] * yd
        zdd = s2[:, None, None, :] * yd[:, :, None, :] * yd[:, None, :, :] + s1[:, None, None, :] * ydd
        caches.append(_LayerCache(z_prev, zd_prev, yd, s1, s2, z, zd))
        z_prev, zd_prev, zdd_prev = z, zd, zdd
    w = weights.w_out
    return scale * (z_prev @ w), scale * (zd_prev @ w), scale * (zdd_prev @ w), caches


def _reverse(params: HnnParams, weights: _Weights, scale: float, x: np.ndarray, caches: List[_LayerCache],
             seed_w: np.ndarray, seed_g: np.ndarray) -> np.ndarray:
    """
    Per-point gradient of seed_w * W_base + seed_g . dW_base/dx with respect to the raw parameters.

    :param seed_w: Shape (n,).
    :param seed_g: Shape (n, 3), seeds on the derivatives with respect to the network inputs x.
    :return: Shape (n, P) in the flattening order of parameter_layout (raw_w_vol column is zero).
    """
    arch, v = params.arch, params.values
    n = x.shape[0]
    w = weights.w_out
    last = caches[-1]
    zbar = scale * seed_w[:, None] * w[None, :]
    zdbar = scale * seed_g[:, :, None] * w[None, None, :]
    grads = {"raw_w_out": scale * (seed_w[:, None] * last.z + np.einsum('na,naj->nj', seed_g, last.zd))
             * softplus_grad(v["raw_w_out"]) / arch.neurons[-1]}
    for i in reversed(range(arch.layers)):
        lc = caches[i]
        ydbar = lc.s1[:, None, :] * zdbar
        ybar = lc.s2 * np.einsum('naj,naj->nj', lc.yd, zdbar) + lc.s1 * zbar
        if weights.A[i] is not None:
            gA = ydbar.transpose(0, 2, 1) + ybar[:, :, None] * x[:, None, :]
            grads[f"raw_wI.{i}"] = gA[:, :, 0] * softplus_grad(v[f"raw_wI.{i}"])
            grads[f"raw_wII.{i}"] = gA[:, :, 1] * softplus_grad(v[f"raw_wII.{i}"])
            grads[f"wJ.{i}"] = gA[:, :, 2]
        grads[f"bias.{i}"] = ybar
        if i > 0:
            Wz = weights.Wz[i - 1]
            gWz = np.einsum('naj,nak->njk', ydbar, lc.zd_prev) + ybar[:, :, None] * lc.z_prev[:, None, :]
            grads[f"raw_Wz.{i - 1}"] = gWz * softplus_grad(v[f"raw_Wz.{i - 1}"]) / arch.neurons[i - 1]
            zdbar = ydbar @ Wz
            zbar = ybar @ Wz
    grads["raw_w_vol"] = np.zeros(n)
    return np.concatenate([grads[name].reshape(n, -1) for name, _ in parameter_layout(arch)], axis=1)


class HnnModel(ConstitutiveModel):
    """
    W = W_base(inv) - W_base(ref) + 1/2 w_vol (J - 1) log J + omega (J - 1),
    with omega chosen so that the reference configuration is stress free.
    omega and W_base(ref) are recomputed on every evaluation.
    """
    kind = "hnn"

    def __init__(self, arch: HnnArchitecture, params: HnnParams, seed: Optional[int] = None):
        if params.arch != arch:
            raise ValueError("Parameters belong to a different architecture")
        self.arch = arch
        self.params = params
        self.seed = seed
        self._weights = effective_weights(params)

    def __repr__(self):
        return f"HnnModel({self.arch.label()})"

    @property
    def energy_scale(self) -> float:
        return self.arch.w_scale

    def parameter_vector(self) -> np.ndarray:
        return self.params.to_vector()

    def parameter_names(self) -> List[str]:
        names = []
        for name, shape in parameter_layout(self.arch):
            count = int(np.prod(shape))
            names += [name] if count == 1 and shape == () else [f"{name}[{k}]" for k in range(count)]
        return names

    def with_parameters(self, theta) -> "HnnModel":
        return HnnModel(self.arch, HnnParams.from_vector(self.arch, theta), self.seed)

    def transform(self, inv: np.ndarray):
        if self.arch.isochoric_inputs:
            return isochoric_transform(inv, pow32=True, shift=True)
        return native_transform(inv)

    def base(self, inv: np.ndarray) -> Tuple[EnergyEval, tuple]:
        """W_base and its native-invariant derivatives, plus the data needed by the reverse sweep."""
        x, T, S = self.transform(inv)
        W, g_x, H_x, caches = _forward(self._weights, self.arch.w_scale, x)
        return chain_to_native(W, g_x, H_x, T, S), (x, T, caches)

    def _reference(self):
        ev, ctx = self.base(reference_invariants())
        omega = -float(STRESS_FREE_WEIGHTS @ ev.dW_dInv[0])
        return float(ev.W[0]), omega, ctx

    def energy(self, inv) -> EnergyEval:
        inv = as_invariants(inv)
        base, _ = self.base(inv)
        W0, omega, _ = self._reference()
        J = inv[:, 2]
        log_j = np.log(J)
        w_vol = self.params.w_vol
        W = base.W - W0 + 0.5 * w_vol * (J - 1.0) * log_j + omega * (J - 1.0)
        g = base.dW_dInv.copy()
        g[:, 2] += 0.5 * w_vol * (log_j + (J - 1.0) / J) + omega
        H = base.d2W_dInv2.copy()
        H[:, 2, 2] += 0.5 * w_vol * (1.0 / J + 1.0 / J ** 2)
        return EnergyEval(W=W, dW_dInv=g, d2W_dInv2=H)

    def parameter_jacobians(self, inv):
        inv = as_invariants(inv)
        n = inv.shape[0]
        x, T, S = self.transform(inv)
        _, _, _, caches = _forward(self._weights, self.arch.w_scale, x)
        xr, Tr, _ = self.transform(reference_invariants())
        _, _, _, caches_ref = _forward(self._weights, self.arch.w_scale, xr)

        zeros_w = np.zeros(n)
        dg = np.stack([_reverse(self.params, self._weights, self.arch.w_scale, x, caches, zeros_w, T[:, :, a])
                       for a in range(3)], axis=1)
        dW = _reverse(self.params, self._weights, self.arch.w_scale, x, caches, np.ones(n), np.zeros((n, 3)))

        d_omega = -_reverse(self.params, self._weights, self.arch.w_scale, xr, caches_ref, np.zeros(1),
                            (Tr[0] @ STRESS_FREE_WEIGHTS)[None, :])[0]
        d_W0 = _reverse(self.params, self._weights, self.arch.w_scale, xr, caches_ref, np.ones(1),
                        np.zeros((1, 3)))[0]

        J = inv[:, 2]
        log_j = np.log(J)
        raw_vol = self.params.values["raw_w_vol"]
        vol_grad = float(softplus_grad(raw_vol))
        dW = dW - d_W0[None, :] + (J - 1.0)[:, None] * d_omega[None, :]
        dW[:, -1] += vol_grad * 0.5 * (J - 1.0) * log_j
        dg[:, 2, :] += d_omega[None, :]
        dg[:, 2, -1] += vol_grad * 0.5 * (log_j + (J - 1.0) / J)
        return dW, dg


def pnn_forward(arch: HnnArchitecture, params: HnnParams, inv) -> EnergyEval:
    """Energy of the bare convex network (no reference corrections) with native-invariant derivatives."""
    return HnnModel(arch, params).base(as_invariants(inv))[0]


def hnn_energy(arch: HnnArchitecture, params: HnnParams, inv) -> EnergyEval:
    """Energy of the completed network."""
    return HnnModel(arch, params).energy(inv)
