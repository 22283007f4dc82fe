import numpy as np
from scipy.special import expit

from config.consts import LOG_TWO


def softplus(x):
    """tau(x) = log(1 + e^x), evaluated without overflow."""
    return np.logaddexp(0.0, x)


def softplus_grad(x):
    return expit(x)


def shifted_softplus(x):
    """rho(x) = log(1 + e^x) - log 2, so that rho(0) = 0."""
    return np.logaddexp(0.0, x) - LOG_TWO


def shifted_softplus_derivatives(x):
    """
    First and second derivatives of rho from the sigmoid closed form.

    :return: (rho', rho'')
    """
    s = expit(x)
    return s, s * (1.0 - s)
