from typing import Dict

import numpy as np
import pytest

from config.consts import SETUP_LOADS
from constitutive.analytic import default_model
from experiments.setups import build_setup, setup_definition, torsion_displacement
from experiments.synthetic import ObservationMask, observation_nodes, observe
from fem.solver import EquilibriumSolution
from helpers.assertions import assert_equals, assert_error_category
from helpers.exceptions import ConfigError

test_data_setups = [
    {"setup": 1, "geometries": 1, "experiments": 8, "dim": 2, "test_description": "plate with hole"},
    {"setup": 2, "geometries": 1, "experiments": 10, "dim": 2, "test_description": "plate with two ellipses"},
    {"setup": 3, "geometries": 10, "experiments": 40, "dim": 2, "test_description": "random holes"},
    {"setup": 4, "geometries": 1, "experiments": 5, "dim": 3, "test_description": "cube with spherical hole"},
    {"setup": 5, "geometries": 1, "experiments": 5, "dim": 3, "test_description": "tension torsion"},
    {"setup": 6, "geometries": 1, "experiments": 6, "dim": 3, "test_description": "bracket"},
]


@pytest.fixture(params=test_data_setups, ids=lambda param: f"{param.get('test_description')}")
def setup_case(request) -> Dict:
    return request.param


@pytest.mark.unit
def test_setup_definitions(setup_case):
    """
    Every family has its geometry count, its load list and a boundary program with support.
    """
    definition = setup_definition(setup_case["setup"])
    assert_equals(len(definition.geometries), setup_case["geometries"], "geometries")
    assert_equals(len(definition.geometries) * len(definition.load_values), setup_case["experiments"], "experiments")
    assert_equals(definition.load_values, SETUP_LOADS[setup_case["setup"]], "loads")
    assert_equals(definition.geometries[0].dim, setup_case["dim"], "dimension")
    assert len(definition.bc_program) > 0


@pytest.mark.unit
def test_desk_and_full_resolution_differ():
    assert setup_definition(1, desk_scale=False).h < setup_definition(1, desk_scale=True).h


@pytest.mark.unit
def test_unknown_setup():
    with pytest.raises(ConfigError) as error:
        setup_definition(7)
    assert_error_category("config", error.value)


@pytest.mark.unit
def test_experiments_share_one_space_per_geometry():
    """
    Experiments are geometry-major and loads of one geometry share its function space.
    """
    experiments = build_setup(1, h=0.1, loads=(0.1, 0.3))
    assert_equals([e.index for e in experiments], [0, 1], "indices")
    assert_equals([e.load_value for e in experiments], [0.1, 0.3], "loads")
    assert experiments[0].space is experiments[1].space


@pytest.mark.unit
def test_torsion_displacement():
    """
    The top face lifts by delta and turns by 2 pi delta / 5 around the z axis.
    """
    points = np.array([[0.5, 0.0, 1.0], [0.0, 0.5, 1.0]])
    assert np.allclose(torsion_displacement(points, 0.0), 0.0)
    delta = 0.25
    moved = points + torsion_displacement(points, delta)
    angle = 2.0 * np.pi * delta / 5.0
    assert np.allclose(moved[:, 2], 1.0 + delta)
    assert np.allclose(np.linalg.norm(moved[:, :2], axis=1), 0.5)
    assert_equals(float(np.arctan2(moved[0, 1], moved[0, 0])), angle, "rotation angle", 1e-12)


@pytest.fixture()
def zero_solutions():
    experiments = build_setup(1, h=0.1, loads=(0.1, 0.2))
    return experiments, [EquilibriumSolution(np.zeros(e.space.n_free), e.load_value, True, 0, 0.0)
                         for e in experiments]


@pytest.mark.unit
def test_observation_masks(zero_solutions):
    experiments, _ = zero_solutions
    full = observation_nodes(experiments[0], ObservationMask.FULL_FIELD)
    boundary = observation_nodes(experiments[0], ObservationMask.BOUNDARY_ONLY)
    assert_equals(full.size, experiments[0].mesh.n_nodes, "full-field nodes")
    assert 0 < boundary.size < full.size
    with pytest.raises(ConfigError):
        observation_nodes(experiments[0], ObservationMask.CUSTOM)


@pytest.mark.unit
def test_noise_is_reproducible_and_scaled(zero_solutions):
    """
    Noise comes from one seeded generator: same seed, same data; the sample deviation matches sigma.
    """
    experiments, solutions = zero_solutions
    model = default_model("mr")
    sigma = 0.05
    a = observe(experiments, solutions, model, ObservationMask.FULL_FIELD, sigma, seed=9)
    b = observe(experiments, solutions, model, ObservationMask.FULL_FIELD, sigma, seed=9)
    c = observe(experiments, solutions, model, ObservationMask.FULL_FIELD, sigma, seed=10)
    exact = np.concatenate([experiments[0].space.nodal(experiments[0].space.expand(s.dof_vector, s.load_scale))
                            for s in solutions])
    noisy = np.concatenate([o.displacements for o in a.displacements])
    assert np.array_equal(noisy, np.concatenate([o.displacements for o in b.displacements]))
    assert not np.array_equal(noisy, np.concatenate([o.displacements for o in c.displacements]))
    deviation = float(np.std(noisy - exact))
    assert 0.8 * sigma < deviation < 1.2 * sigma
    assert_equals(len(a.reactions), 2 * len(experiments[0].bc.dirichlet_tags()), "one reaction per Dirichlet tag")


@pytest.mark.unit
def test_noise_free_observations_are_exact(zero_solutions):
    experiments, solutions = zero_solutions
    observations = observe(experiments, solutions, default_model("mr"), ObservationMask.BOUNDARY_ONLY, 0.0, seed=0)
    nodes = observation_nodes(experiments[1], ObservationMask.BOUNDARY_ONLY)
    expected = experiments[1].space.nodal(experiments[1].space.expand(solutions[1].dof_vector, 0.2))[nodes]
    assert np.array_equal(observations.for_experiment(1).displacements, expected)


@pytest.mark.unit
def test_negative_noise_is_rejected(zero_solutions):
    experiments, solutions = zero_solutions
    with pytest.raises(ConfigError):
        observe(experiments, solutions, default_model("mr"), ObservationMask.FULL_FIELD, -1e-3, seed=0)
