import pytest

from constitutive.analytic import default_model
from experiments.setups import build_setup
from experiments.synthetic import ObservationMask, generate_synthetic

# coarse plate-with-hole used by the inverse-problem and analysis tests
SMALL_SETUP_H = 1.0 / 6.0
SMALL_LOADS = (0.1, 0.2)


@pytest.fixture(scope="session")
def small_experiments():
    return build_setup(1, desk_scale=True, seed=0, h=SMALL_SETUP_H, loads=SMALL_LOADS)


@pytest.fixture(scope="session")
def small_dataset(small_experiments):
    """Noise-free full-field Mooney-Rivlin data on the coarse plate."""
    return generate_synthetic(small_experiments, default_model("mr"), ObservationMask.FULL_FIELD, 0.0, seed=0)
