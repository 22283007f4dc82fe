import math

import numpy as np

from config.logging_config import setup_logger

LOG = setup_logger(__name__)


def assert_equals(actual_value: any, expected: any, description: str = None, tolerance: float = 1e-8):
    """
    Asserts that the actual value is approximately equal to the expected value, within a given tolerance.
    Raises an AssertionError if the values are not equal, including the provided description.

    :param actual_value: The actual value to check.
    :param expected: The expected value.
    :param description: A description of what is being checked (optional).
    :param tolerance: Relative tolerance for floating point comparisons (default is 1e-8).
    """

    if description:
        LOG.debug(f"Checking {description}: expected {expected}, got {actual_value}.")

    if isinstance(actual_value, float) and isinstance(expected, float):
        # Apply tolerance for floating point comparisons
        if math.isclose(actual_value, expected, rel_tol=tolerance):
            return
        else:
            assert False, f"{description}: Expected value '{expected}', but got '{actual_value}'"

    assert actual_value == expected, (
        f"{description}: Expected value '{expected}', but got '{actual_value}'"
    )


def relative_error(actual, expected, floor: float = 1e-300) -> float:
    """
    Relative error in the max norm, ||actual - expected|| / max(||expected||, floor).
    """
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    scale = max(float(np.max(np.abs(expected))) if expected.size else 0.0, floor)
    return float(np.max(np.abs(actual - expected))) / scale if expected.size else 0.0


def assert_allclose_rel(actual, expected, rel: float, description: str = None, floor: float = 1e-300):
    """
    Asserts that two arrays agree to a relative tolerance measured against the largest expected entry.

    :param actual: Computed values.
    :param expected: Reference values.
    :param rel: Admissible relative error.
    :param description: A description of what is being checked (optional).
    :param floor: Lower bound of the normalising scale, so that all-zero references compare absolutely.
    """
    error = relative_error(actual, expected, floor)
    if description:
        LOG.debug(f"Checking {description}: relative error {error:.3e} (limit {rel:.1e}).")
    assert error <= rel, f"{description}: relative error {error:.3e} exceeds {rel:.1e}"


def assert_error_category(expected_category: str, error: Exception):
    """
    Asserts that a domain error carries the expected machine-readable category.
    """
    category = getattr(error, "category", None)
    LOG.debug(f"Check expected error category: {category}")
    assert category == expected_category, f"Expected category {expected_category}, got {category}: {error}"
