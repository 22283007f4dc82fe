"""Closed-form hyperelastic laws: Neo-Hookean, Ishihara, Mooney-Rivlin and Fung."""

from enum import Enum
from typing import Dict, Iterable, List, Optional

import numpy as np

from config.consts import (FUNG_DEFAULTS, ISHIHARA_DEFAULTS, MOONEY_RIVLIN_DEFAULTS,
                           NEO_HOOKEAN_DEFAULTS)
from constitutive.base import (ConstitutiveModel, EnergyEval, as_invariants, chain_to_native,
                               isochoric_transform)
from helpers.exceptions import ConfigError


class AnalyticKind(str, Enum):
    NEO_HOOKEAN = "nh"
    ISHIHARA = "ih"
    MOONEY_RIVLIN = "mr"
    FUNG = "fu"


DEFAULT_COEFFICIENTS = {
    AnalyticKind.NEO_HOOKEAN: NEO_HOOKEAN_DEFAULTS,
    AnalyticKind.ISHIHARA: ISHIHARA_DEFAULTS,
    AnalyticKind.MOONEY_RIVLIN: MOONEY_RIVLIN_DEFAULTS,
    AnalyticKind.FUNG: FUNG_DEFAULTS,
}

# Coefficients that stay frozen when the law is calibrated
FROZEN = {AnalyticKind.NEO_HOOKEAN: ("C2",)}


def _mooney_rivlin_terms(inv: np.ndarray):
    """Basis energies of MR, W = C1 e1 + C2 e2 + K e3, all in native invariants."""
    I1, I2, J = inv[:, 0], inv[:, 1], inv[:, 2]
    n = inv.shape[0]
    log_j = np.log(J)
    e = np.column_stack([I1 - 3.0 - 2.0 * log_j, I2 - 3.0 - 4.0 * log_j, 0.5 * (J - 1.0) * log_j])
    de = np.zeros((n, 3, 3))
    de[:, 0, 0] = 1.0
    de[:, 2, 0] = -2.0 / J
    de[:, 1, 1] = 1.0
    de[:, 2, 1] = -4.0 / J
    de[:, 2, 2] = 0.5 * (log_j + (J - 1.0) / J)
    d2e = np.zeros((n, 3, 3, 3))
    d2e[:, 2, 2, 0] = 2.0 / J ** 2
    d2e[:, 2, 2, 1] = 4.0 / J ** 2
    d2e[:, 2, 2, 2] = 0.5 * (1.0 / J + 1.0 / J ** 2)
    return e, de, d2e


class AnalyticModel(ConstitutiveModel):
    """
    Closed-form law with named coefficients.
    Trainable coefficients are log-parametrised, theta_k = log(c_k), which keeps them positive.
    """

    def __init__(self, kind, params: Optional[Dict[str, float]] = None,
                 trainable: Optional[Iterable[str]] = None):
        try:
            self._kind = AnalyticKind(kind)
        except ValueError:
            raise ConfigError(f"Unknown analytic material '{kind}'")
        defaults = DEFAULT_COEFFICIENTS[self._kind]
        self.params = dict(defaults)
        if params:
            unknown = set(params) - set(defaults)
            if unknown:
                raise ConfigError(f"Unknown coefficients {sorted(unknown)} for material '{self._kind.value}'")
            self.params.update({k: float(v) for k, v in params.items()})
        if self._kind == AnalyticKind.NEO_HOOKEAN and self.params["C2"] != 0.0:
            raise ConfigError("The Neo-Hookean law has C2 = 0")
        for name, value in self.params.items():
            if name in FROZEN.get(self._kind, ()):
                continue
            if not value > 0:
                raise ConfigError(f"Coefficient {name} must be positive, got {value}")
        frozen = FROZEN.get(self._kind, ())
        self.trainable = tuple(trainable) if trainable is not None else tuple(
            k for k in self.params if k not in frozen)
        if any(t in frozen or t not in self.params for t in self.trainable):
            raise ConfigError(f"Invalid trainable coefficients {self.trainable}")

    @property
    def kind(self) -> str:
        return self._kind.value

    @property
    def energy_scale(self) -> float:
        return max(abs(v) for v in self.params.values())

    def __repr__(self):
        return f"AnalyticModel({self.kind}, {self.params})"

    def parameter_vector(self) -> np.ndarray:
        return np.log(np.array([self.params[k] for k in self.trainable], dtype=float))

    def parameter_names(self) -> List[str]:
        return [f"log_{k}" for k in self.trainable]

    def with_parameters(self, theta) -> "AnalyticModel":
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (len(self.trainable),):
            raise ValueError(f"Expected {len(self.trainable)} parameters, got shape {theta.shape}")
        params = dict(self.params)
        params.update({k: float(np.exp(t)) for k, t in zip(self.trainable, theta)})
        return AnalyticModel(self._kind, params, self.trainable)

    def _evaluate(self, inv: np.ndarray):
        """
        Energy, derivatives and coefficient sensitivities.

        :return: (EnergyEval, dW/dc of shape (n, nc), dg/dc of shape (n, 3, nc)) with columns ordered as self.params.
        """
        p = self.params
        n = inv.shape[0]
        names = tuple(p)
        if self._kind in (AnalyticKind.MOONEY_RIVLIN, AnalyticKind.NEO_HOOKEAN):
            e, de, d2e = _mooney_rivlin_terms(inv)
            c = np.array([p[k] for k in names])
            W = e @ c
            g = de @ c
            H = np.zeros((n, 3, 3))
            H[:, 2, 2] = d2e[:, 2, 2, :] @ c
            return EnergyEval(W, g, H), e, de

        x, T, S = isochoric_transform(inv, pow32=False, shift=False)
        y1, y2, J = x[:, 0], x[:, 1], x[:, 2]
        g_y = np.zeros((n, 3))
        H_y = np.zeros((n, 3, 3))
        if self._kind == AnalyticKind.ISHIHARA:
            C1, C2, C3, K = p["C1"], p["C2"], p["C3"], p["K"]
            a = y1 - 3.0
            W = C1 * a + C2 * (y2 - 3.0) + C3 * a ** 2 + K * (J - 1.0) ** 2
            g_y[:, 0] = C1 + 2.0 * C3 * a
            g_y[:, 1] = C2
            g_y[:, 2] = 2.0 * K * (J - 1.0)
            H_y[:, 0, 0] = 2.0 * C3
            H_y[:, 2, 2] = 2.0 * K
            dW_dc = np.column_stack([a, y2 - 3.0, a ** 2, (J - 1.0) ** 2])
            dgy_dc = np.zeros((n, 3, 4))
            dgy_dc[:, 0, 0] = 1.0
            dgy_dc[:, 1, 1] = 1.0
            dgy_dc[:, 0, 2] = 2.0 * a
            dgy_dc[:, 2, 3] = 2.0 * (J - 1.0)
        else:
            C, b, K = p["C"], p["b"], p["K"]
            a = y1 - 3.0
            ex = np.exp(b * a)
            em1 = np.expm1(b * a)
            log_j = np.log(J)
            W = C / (2.0 * b) * em1 + 0.25 * K * ((J - 1.0) ** 2 + log_j ** 2)
            g_y[:, 0] = 0.5 * C * ex
            g_y[:, 2] = 0.5 * K * ((J - 1.0) + log_j / J)
            H_y[:, 0, 0] = 0.5 * C * b * ex
            H_y[:, 2, 2] = 0.5 * K * (1.0 + (1.0 - log_j) / J ** 2)
            dW_dc = np.column_stack([em1 / (2.0 * b),
                                     -C / (2.0 * b ** 2) * em1 + C * a * ex / (2.0 * b),
                                     0.25 * ((J - 1.0) ** 2 + log_j ** 2)])
            dgy_dc = np.zeros((n, 3, 3))
            dgy_dc[:, 0, 0] = 0.5 * ex
            dgy_dc[:, 0, 1] = 0.5 * C * a * ex
            dgy_dc[:, 2, 2] = 0.5 * ((J - 1.0) + log_j / J)
        ev = chain_to_native(W, g_y, H_y, T, S)
        dg_dc = np.einsum('nkc,nka->nac', dgy_dc, T)
        return ev, dW_dc, dg_dc

    def energy(self, inv) -> EnergyEval:
        return self._evaluate(as_invariants(inv))[0]

    def parameter_jacobians(self, inv):
        inv = as_invariants(inv)
        _, dW_dc, dg_dc = self._evaluate(inv)
        names = list(self.params)
        cols = [names.index(k) for k in self.trainable]
        scale = np.array([self.params[k] for k in self.trainable])
        return dW_dc[:, cols] * scale, dg_dc[:, :, cols] * scale


def analytic_energy(model: AnalyticModel, inv) -> EnergyEval:
    """Closed-form energy and derivatives of an analytic law."""
    return model.energy(inv)


def default_model(name: str) -> AnalyticModel:
    """Ground-truth law with its default coefficients, by short name (nh, ih, mr, fu)."""
    return AnalyticModel(name)
