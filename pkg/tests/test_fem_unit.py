import numpy as np
import pytest

from constitutive.analytic import default_model
from fem.assembly import assemble_residual, assemble_tangent, potential_energy
from fem.bc import BcProgram, DirichletNormal, DirichletVector, FollowerPressure, Free, NormalSpring, Traction
from fem.interpolation import PointLocator, interpolate_displacement, interpolation_matrix
from fem.reactions import reaction_force
from fem.solution_io import load_solution, save_solution
from fem.solver import EquilibriumSolution
from fem.space import FeSpace
from helpers.assertions import assert_allclose_rel, assert_equals, assert_error_category
from helpers.exceptions import ConfigError, MalformedDataset, PointOutsideMesh, TagNotDirichlet
from mesh.generators import box_mesh, generate_mesh
from models.geometry_model import GeometrySpec


@pytest.fixture()
def square():
    return box_mesh((0.0, 0.0), (1.0, 1.0), (2, 2))


@pytest.fixture()
def clamped_space(square):
    return FeSpace(square, BcProgram({"left": DirichletVector(value=(0.0, 0.0)),
                                      "right": DirichletVector(value=(0.1, 0.0))}))


test_data_invalid_programs = [
    {"conditions": {"up": Traction(vector=(0.0, 1.0))}, "test_description": "no rigid-body support"},
    {"conditions": {"up": NormalSpring(0.0)}, "test_description": "spring without stiffness"},
    {"conditions": {"left": Free()}, "test_description": "only free tags"},
]


@pytest.mark.unit
@pytest.mark.parametrize("case", test_data_invalid_programs, ids=lambda c: c["test_description"])
def test_program_without_support_is_rejected(case):
    with pytest.raises(ConfigError) as error:
        BcProgram(case["conditions"])
    assert_error_category("config", error.value)


test_data_load_vectors = [
    {"condition": Traction(vector=(0.1, 0.0, 0.0)), "test_description": "3-vector traction on a plane mesh"},
    {"condition": Traction(vector=(0.1,)), "test_description": "1-vector traction"},
    {"condition": FollowerPressure(0.5, dead_load=(0.0, -0.2, 0.0)),
     "test_description": "3-vector dead load on a plane mesh"},
]


@pytest.mark.unit
@pytest.mark.parametrize("case", test_data_load_vectors, ids=lambda c: c["test_description"])
def test_load_vector_must_match_dimension(square, case):
    space = FeSpace(square, BcProgram({"left": DirichletVector(value=(0.0, 0.0)), "right": case["condition"]}))
    with pytest.raises(ConfigError) as error:
        assemble_residual(space, default_model("mr"), np.zeros(space.n_free), 1.0)
    assert_error_category("config", error.value)
    assert "right" in str(error.value)


@pytest.mark.unit
def test_dirichlet_vector_needs_exactly_one_source():
    with pytest.raises(ConfigError):
        DirichletVector()
    with pytest.raises(ConfigError):
        DirichletVector(value=(0.0, 0.0), field=lambda x, s: x)


@pytest.mark.unit
def test_program_with_unknown_tag(square):
    with pytest.raises(ConfigError):
        FeSpace(square, BcProgram({"hole": DirichletVector(value=(0.0, 0.0))}))


@pytest.mark.unit
def test_normal_constraint_needs_axis_aligned_facets():
    mesh = generate_mesh(GeometrySpec(setup_id=1, hole_radius=0.3), 0.1)
    with pytest.raises(ConfigError):
        FeSpace(mesh, BcProgram({"hole": DirichletNormal(0.0)}))


@pytest.mark.unit
def test_dof_bookkeeping(clamped_space):
    """
    Dofs are node-major; both components of the left and right nodes are constrained.
    """
    assert_equals(clamped_space.n_dofs, 18, "dofs")
    assert_equals(clamped_space.n_free, 6, "free dofs")
    full = clamped_space.expand(np.arange(6, dtype=float), 2.0)
    nodal = clamped_space.nodal(full)
    right = clamped_space.mesh.boundary_nodes("right")
    assert np.allclose(nodal[right], [0.2, 0.0])
    assert np.array_equal(full[clamped_space.free_dofs], np.arange(6, dtype=float))


@pytest.mark.unit
def test_normal_constraint_fixes_only_the_normal_component(square):
    space = FeSpace(square, BcProgram({"left": DirichletNormal(0.0), "right": DirichletNormal(0.5)}))
    constraint = space.dirichlet_map["right"]
    assert np.all(constraint.components == 0)
    assert_equals(constraint.dofs.size, 3, "one dof per right node")
    nodal = space.nodal(space.expand(np.zeros(space.n_free), 0.2))
    assert np.allclose(nodal[space.mesh.boundary_nodes("right"), 0], 0.1)


@pytest.mark.unit
def test_reference_state_has_zero_residual(clamped_space):
    r = assemble_residual(clamped_space, default_model("mr"), np.zeros(clamped_space.n_free), 0.0)
    assert np.allclose(r, 0.0, atol=1e-14)


@pytest.mark.unit
def test_tangent_matches_residual_differences(clamped_space):
    """
    The assembled tangent is the derivative of the assembled residual.
    """
    model = default_model("fu")
    u = 0.02 * np.random.default_rng(0).standard_normal(clamped_space.n_free)
    K = assemble_tangent(clamped_space, model, u, 0.5).toarray()
    h = 1e-7
    fd = np.column_stack([(assemble_residual(clamped_space, model, u + h * e, 0.5)
                           - assemble_residual(clamped_space, model, u - h * e, 0.5)) / (2 * h)
                          for e in np.eye(clamped_space.n_free)])
    assert_allclose_rel(K, fd, 1e-6, "tangent")
    assert_allclose_rel(K, K.T, 1e-12, "symmetry")


@pytest.mark.unit
def test_residual_is_gradient_of_potential(square):
    """
    With dead tractions and springs the residual is the gradient of the total potential.
    """
    space = FeSpace(square, BcProgram({"left": DirichletNormal(0.0), "down": NormalSpring(0.3),
                                       "right": Traction(vector=(0.2, 0.1), normal=0.05)}))
    model = default_model("ih")
    u = 0.03 * np.random.default_rng(1).standard_normal(space.n_free)
    r = assemble_residual(space, model, u, 1.0)
    h = 1e-6
    fd = np.array([(potential_energy(space, model, u + h * e, 1.0)
                    - potential_energy(space, model, u - h * e, 1.0)) / (2 * h) for e in np.eye(space.n_free)])
    assert_allclose_rel(r, fd, 1e-6, "residual against potential differences")


@pytest.mark.unit
def test_interpolation_is_exact_for_linear_fields():
    """
    P1 interpolation reproduces affine displacement fields anywhere inside the mesh.
    """
    mesh = box_mesh((0.0, 0.0, 0.0), (1.0, 1.0, 1.0), (3, 2, 2))
    space = FeSpace(mesh, BcProgram({"left": DirichletVector(value=(0.0, 0.0, 0.0))}))
    G = np.array([[0.1, 0.2, 0.0], [0.0, -0.1, 0.3], [0.05, 0.0, 0.1]])
    full = (mesh.nodes @ G.T).reshape(-1)
    points = np.random.default_rng(2).uniform(0.0, 1.0, size=(40, 3))
    assert np.allclose(interpolate_displacement(space, full, points), points @ G.T, atol=1e-12)
    H = interpolation_matrix(space, mesh.nodes[:5])
    assert np.allclose(H @ full, full[:15], atol=1e-12)


@pytest.mark.unit
def test_point_outside_mesh(square):
    points = np.array([[0.5, 0.5], [1.5, 0.5]])
    with pytest.raises(PointOutsideMesh) as error:
        PointLocator(square).locate(points)
    assert_equals(error.value.point_index, 1, "index of the outside point")


@pytest.mark.unit
def test_reaction_on_non_dirichlet_tag(clamped_space):
    solution = EquilibriumSolution(np.zeros(clamped_space.n_free), 1.0, True, 0, 0.0)
    with pytest.raises(TagNotDirichlet) as error:
        reaction_force(clamped_space, default_model("mr"), solution, "up")
    assert_equals(error.value.tag, "up", "tag")


@pytest.mark.unit
def test_solution_file_checks_mesh(tmp_path, clamped_space):
    """
    Solutions round-trip exactly and refuse to load on a different mesh.
    """
    values = np.random.default_rng(3).standard_normal(clamped_space.n_free)
    path = tmp_path / "exp.sol"
    save_solution(clamped_space, EquilibriumSolution(values, 0.3, True, 4, 1e-12), path)
    restored = load_solution(clamped_space, path)
    assert np.array_equal(restored.dof_vector, values)
    assert_equals(restored.load_scale, 0.3, "load", 0.0)

    other = FeSpace(box_mesh((0.0, 0.0), (1.0, 2.0), (2, 2)), clamped_space.bc)
    with pytest.raises(MalformedDataset):
        load_solution(other, path)
    path.write_text("solution 2\n", encoding="utf-8")
    with pytest.raises(MalformedDataset):
        load_solution(clamped_space, path)
