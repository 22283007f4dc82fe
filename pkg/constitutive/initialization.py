"""Seeded initialization of network parameters, its expected initial response, and the preset architectures."""

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

from constitutive.activations import softplus
from constitutive.hnn import HnnModel, HnnParams, parameter_layout
from helpers.exceptions import ConfigError
from models.architecture_model import HnnArchitecture

# Selected architectures per (dimension, material)
PRESETS = {
    (2, "ih"): dict(layers=2, width=5, skip_connections=False, isochoric_inputs=False, sigma_init=0.6, w_scale=1.0),
    (2, "mr"): dict(layers=1, width=5, skip_connections=False, isochoric_inputs=False, sigma_init=0.1, w_scale=10.0),
    (2, "fu"): dict(layers=1, width=5, skip_connections=False, isochoric_inputs=False, sigma_init=0.1, w_scale=10.0),
    (3, "ih"): dict(layers=1, width=5, skip_connections=False, isochoric_inputs=False, sigma_init=0.1, w_scale=10.0),
    (3, "mr"): dict(layers=1, width=5, skip_connections=False, isochoric_inputs=False, sigma_init=0.1, w_scale=10.0),
    (3, "fu"): dict(layers=2, width=5, skip_connections=False, isochoric_inputs=True, sigma_init=0.6, w_scale=1.0),
}


def init_params(arch: HnnArchitecture, seed: int) -> HnnParams:
    """
    Raw weights drawn i.i.d. from N(0, sigma_init^2) in layout order; biases and raw_w_vol are zero.
    """
    rng = np.random.default_rng(seed)
    values = {}
    for name, shape in parameter_layout(arch):
        if name.startswith("bias") or name == "raw_w_vol":
            values[name] = np.zeros(shape)
        else:
            values[name] = rng.normal(0.0, arch.sigma_init, size=shape)
    return HnnParams(arch, values)


def init_model(arch: HnnArchitecture, seed: int) -> HnnModel:
    return HnnModel(arch, init_params(arch, seed), seed=seed)


def mean_positive_weight(sigma: float, n_nodes: int = 80) -> float:
    """E[tau(sigma Z)] for a standard normal Z, by Gauss-Hermite quadrature."""
    nodes, weights = hermegauss(n_nodes)
    return float(np.sum(weights * softplus(sigma * nodes)) / np.sqrt(2.0 * np.pi))


def expected_initial_slope(arch: HnnArchitecture) -> float:
    """
    Expected dW/dI1 at the reference state right after initialization.
    With w = E[tau(sigma Z)] and gamma = w rho'(0) = w / 2 the expectation does not depend on the layer widths.
    """
    w_bar = mean_positive_weight(arch.sigma_init)
    gamma = 0.5 * w_bar
    L = arch.layers
    if arch.skip_connections:
        if np.isclose(gamma, 1.0):
            return arch.w_scale * w_bar * gamma * L
        return arch.w_scale * w_bar * gamma * (1.0 - gamma ** L) / (1.0 - gamma)
    return arch.w_scale * w_bar * gamma ** L


def preset_architecture(dim: int, material: str) -> HnnArchitecture:
    """Architecture selected for a ground-truth material in 2D or 3D."""
    try:
        preset = dict(PRESETS[(dim, material.lower())])
    except KeyError:
        raise ConfigError(f"No preset architecture for dim={dim} material='{material}'")
    return HnnArchitecture.uniform(preset.pop("layers"), preset.pop("width"), **preset)
