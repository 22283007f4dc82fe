from dataclasses import replace

import numpy as np
import pytest

from constitutive.analytic import default_model
from constitutive.initialization import init_model
from constitutive.stress import piola_stress
from fem.assembly import assembler
from fem.bc import BcProgram, DirichletNormal
from fem.reactions import reaction_force, reaction_gradients, reaction_vector
from fem.solver import continuation_solve, newton_solve
from fem.space import FeSpace
from helpers.assertions import assert_allclose_rel, assert_equals
from helpers.exceptions import ContinuationFailure
from mesh.generators import box_mesh
from models.architecture_model import HnnArchitecture
from models.options_model import ContinuationOptions, NewtonOptions
from verification.suites import fem_suite

TIGHT = NewtonOptions(abs_tol=0.0, rel_tol=0.0, max_iter=30)


@pytest.fixture()
def plane_tension():
    """Unit square pulled to the right with roller supports on the left and bottom edges."""
    mesh = box_mesh((0.0, 0.0), (1.0, 1.0), (3, 3))
    return FeSpace(mesh, BcProgram({"left": DirichletNormal(0.0), "down": DirichletNormal(0.0),
                                    "right": DirichletNormal(1.0)}))


@pytest.mark.functional
def test_fem_property_suite_passes():
    """
    Homogeneous stretch of a cube: affine solution, analytic reaction, quadratic Newton and tangent.
    """
    report = fem_suite()
    assert report.passed, [(c.name, c.detail) for c in report.failures]


@pytest.mark.functional
@pytest.mark.parametrize("material", ["nh", "mr", "fu"])
def test_plane_tension_is_homogeneous(plane_tension, material):
    """
    Roller-supported tension gives one deformation gradient everywhere, a traction-free lateral
    direction and a reaction equal to P11 times the edge length.
    """
    model = default_model(material)
    solution = continuation_solve(plane_tension, model, 0.2, ContinuationOptions(n_steps=4), TIGHT)
    assert solution.converged
    assert_equals(solution.load_steps[-1], 0.2, "final load", 0.0)
    full = plane_tension.expand(solution.dof_vector, 0.2)
    F = assembler(plane_tension).deformation_gradients(full)
    assert_allclose_rel(F, np.broadcast_to(F[0], F.shape), 1e-9, "homogeneous deformation")
    assert_equals(float(F[0, 0, 0]), 1.2, "axial stretch", 1e-10)
    P = piola_stress(model, F[0])
    assert abs(P[1, 1]) < 1e-8 * abs(P[0, 0])
    assert_equals(reaction_force(plane_tension, model, solution, "right"), float(P[0, 0]), "reaction", 1e-8)
    assert_allclose_rel(reaction_vector(plane_tension, model, solution, "right"), np.array([P[0, 0], 0.0]),
                        1e-8, "reaction vector")
    assert_equals(reaction_force(plane_tension, model, solution, "left"), float(P[0, 0]), "opposite edge", 1e-8)


@pytest.mark.functional
def test_continuation_agrees_with_direct_solve(plane_tension):
    model = default_model("ih")
    ramped = continuation_solve(plane_tension, model, 0.15, ContinuationOptions(n_steps=3), TIGHT)
    direct = newton_solve(plane_tension, model, None, 0.15, TIGHT)
    assert direct.converged
    assert_allclose_rel(ramped.dof_vector, direct.dof_vector, 1e-9, "solutions")
    assert_equals(len(ramped.load_steps), 3, "continuation steps")


@pytest.mark.functional
def test_continuation_gives_up_after_bisections(plane_tension):
    """
    A Newton solver that may not iterate fails every step; continuation stops after the bisection budget.
    """
    no_iterations = NewtonOptions(abs_tol=0.0, rel_tol=0.0, max_iter=0)
    with pytest.raises(ContinuationFailure) as error:
        continuation_solve(plane_tension, default_model("mr"), 0.2, ContinuationOptions(n_steps=2, max_bisections=3),
                           no_iterations)
    assert_equals(error.value.last_load, 0.0, "last converged load")
    assert_equals(error.value.category, "solver", "category")


@pytest.mark.functional
def test_reaction_gradients_match_finite_differences(plane_tension):
    """
    dR/du and dR/dtheta of a network law agree with central differences.
    """
    model = init_model(HnnArchitecture.uniform(1, 4, sigma_init=0.6), 2)
    solution = newton_solve(plane_tension, model, None, 0.1, TIGHT)
    assert solution.converged
    R, dR_du, dR_dtheta = reaction_gradients(plane_tension, model, solution, "right")
    assert_equals(R, reaction_force(plane_tension, model, solution, "right"), "reaction", 1e-14)

    h = 1e-6
    u = solution.dof_vector
    fd_u = np.array([(reaction_force(plane_tension, model, replace(solution, dof_vector=u + h * e), "right")
                      - reaction_force(plane_tension, model, replace(solution, dof_vector=u - h * e), "right"))
                     / (2 * h) for e in np.eye(u.size)])
    assert_allclose_rel(dR_du, fd_u, 1e-6, "dR/du", floor=1e-3)

    theta = model.parameter_vector()
    fd_theta = np.array([(reaction_force(plane_tension, model.with_parameters(theta + h * e), solution, "right")
                          - reaction_force(plane_tension, model.with_parameters(theta - h * e), solution, "right"))
                         / (2 * h) for e in np.eye(theta.size)])
    assert_allclose_rel(dR_dtheta, fd_theta, 1e-6, "dR/dtheta", floor=1e-3)
