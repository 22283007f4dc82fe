from typing import Dict

import numpy as np
import pytest

from helpers.assertions import assert_equals, assert_error_category
from helpers.exceptions import ConfigError, MalformedMeshFile
from mesh.generators import box_mesh, generate_mesh
from mesh.io import load_mesh, mesh_to_text, parse_mesh, save_mesh
from mesh.quality import mesh_quality
from models.geometry_model import GeometrySpec

test_data_boxes = [
    {
        "lower": (0.0, 0.0), "upper": (2.0, 1.0), "counts": (4, 3),
        "tags": ["down", "left", "right", "up"], "measure": 2.0,
        "test_description": "2D rectangle",
    },
    {
        "lower": (0.0, 0.0, 0.0), "upper": (1.0, 1.0, 1.0), "counts": (2, 2, 2),
        "tags": ["back", "down", "front", "left", "right", "up"], "measure": 1.0,
        "test_description": "3D cube",
    },
]


@pytest.fixture(params=test_data_boxes, ids=lambda param: f"{param.get('test_description')}")
def box_case(request) -> Dict:
    return request.param


@pytest.mark.unit
def test_box_mesh_is_positive_and_fully_tagged(box_case):
    """
    Box meshes have positive cells, the exact measure and one tag per face.
    """
    mesh = box_mesh(box_case["lower"], box_case["upper"], box_case["counts"])
    assert_equals(mesh.tags, box_case["tags"], "facet tags")
    assert_equals(float(mesh.volumes.sum()), box_case["measure"], "measure", 1e-12)
    report = mesh_quality(mesh)
    assert report.ok, "mesh quality"
    assert_equals(report.inverted_cells.size, 0, "inverted cells")


@pytest.mark.unit
def test_box_mesh_facets_point_outward():
    """
    Facets tagged 'right' have outward normal +x, facets tagged 'left' have -x.
    """
    mesh = box_mesh((0.0, 0.0), (1.0, 1.0), (3, 3))
    normals = mesh.facet_normals
    assert np.allclose(normals[mesh.facets_with_tag("right")], [1.0, 0.0])
    assert np.allclose(normals[mesh.facets_with_tag("left")], [-1.0, 0.0])
    assert_equals(float(mesh.facet_areas[mesh.facets_with_tag("up")].sum()), 1.0, "length of the top edge", 1e-12)


@pytest.mark.unit
def test_shape_gradients_reproduce_linear_fields():
    """
    Gradients of P1 basis functions sum to zero and reproduce the gradient of a linear field exactly.
    """
    mesh = box_mesh((0.0, 0.0, 0.0), (1.0, 2.0, 1.0), (2, 3, 2))
    B = mesh.shape_gradients
    assert np.allclose(B.sum(axis=1), 0.0, atol=1e-12)
    a = np.array([0.3, -1.2, 2.0])
    values = mesh.nodes @ a
    grads = np.einsum('mk,mkd->md', values[mesh.cells], B)
    assert np.allclose(grads, a[None, :], atol=1e-12)


@pytest.mark.unit
def test_setup_mesh_is_deterministic():
    """
    Generating the same specimen twice yields byte-identical meshes.
    """
    spec = GeometrySpec(setup_id=1)
    assert_equals(generate_mesh(spec, 0.1).checksum(), generate_mesh(spec, 0.1).checksum(), "checksum")


@pytest.mark.unit
def test_setup_one_mesh_removes_quarter_hole():
    """
    Setup 1 is the unit square without a quarter disc at the origin.
    """
    mesh = generate_mesh(GeometrySpec(setup_id=1, hole_radius=0.3), 0.05)
    exact = 1.0 - np.pi * 0.3 ** 2 / 4.0
    assert abs(float(mesh.volumes.sum()) - exact) < 5e-3
    assert {"left", "right", "down", "up", "hole"} <= set(mesh.tags)
    assert mesh_quality(mesh).ok


@pytest.mark.unit
def test_random_hole_layouts_depend_on_geometry_index():
    a = generate_mesh(GeometrySpec(setup_id=3, seed=4, geometry_index=0), 1 / 16)
    b = generate_mesh(GeometrySpec(setup_id=3, seed=4, geometry_index=1), 1 / 16)
    c = generate_mesh(GeometrySpec(setup_id=3, seed=4, geometry_index=0), 1 / 16)
    assert a.checksum() != b.checksum()
    assert_equals(a.checksum(), c.checksum(), "same seed and index")


@pytest.mark.unit
def test_non_positive_mesh_size():
    with pytest.raises(ConfigError):
        generate_mesh(GeometrySpec(setup_id=2), 0.0)


@pytest.mark.unit
def test_mesh_file_round_trip_is_exact(tmp_path):
    """
    Coordinates survive a write and read bit for bit.
    """
    mesh = generate_mesh(GeometrySpec(setup_id=1), 0.1)
    path = tmp_path / "specimen.mesh"
    save_mesh(mesh, path)
    restored = load_mesh(path)
    assert np.array_equal(restored.nodes, mesh.nodes)
    assert np.array_equal(restored.cells, mesh.cells)
    assert_equals(list(restored.facet_tags), list(mesh.facet_tags), "tags")


VALID_TRIANGLE = "mesh 2 3 1 1\nv 0 0\nv 1 0\nv 0 1\nc 0 1 2\nb edge 0 1\n"

test_data_bad_meshes = [
    {"text": "", "line": 1, "field": "mesh", "test_description": "empty file"},
    {"text": "mesh 2 3 1\n", "line": 1, "field": "mesh", "test_description": "short header"},
    {"text": "mesh 4 3 1 0\n", "line": 1, "field": "mesh", "test_description": "dimension 4"},
    {"text": "mesh 2 3 1 0\nv 0 0\nv 1\n", "line": 3, "field": "v", "test_description": "vertex arity"},
    {"text": "mesh 2 3 1 0\nv 0 0\nv 1 x\n", "line": 3, "field": "v", "test_description": "bad coordinate"},
    {"text": "mesh 2 3 1 0\nv 0 0\nv 1 0\nv 0 1\nc 0 1 3\n", "line": 5, "field": "c",
     "test_description": "cell index out of range"},
    {"text": "mesh 2 3 1 0\nv 0 0\nv 1 0\nv 0 1\nq 0\n", "line": 5, "field": "q",
     "test_description": "unknown record"},
    {"text": "mesh 2 3 1 0\nv 0 0\nv 1 0\nc 0 1 2\n", "line": None, "field": "v",
     "test_description": "count mismatch"},
    {"text": "mesh 2 4 2 1\nv 0 0\nv 1 0\nv 0 1\nv 1 1\nc 0 1 2\nc 1 3 2\nb inner 1 2\n", "line": None,
     "field": "b", "test_description": "boundary facet shared by two cells"},
    {"text": "mesh 2 4 2 1\nv 0 0\nv 1 0\nv 0 1\nv 1 1\nc 0 1 2\nc 1 3 2\nb edge 0 3\n", "line": None,
     "field": "b", "test_description": "boundary facet of no cell"},
]


@pytest.mark.unit
@pytest.mark.parametrize("case", test_data_bad_meshes, ids=lambda c: c["test_description"])
def test_malformed_mesh_files(case):
    """
    Parse errors name the offending line and field.
    """
    with pytest.raises(MalformedMeshFile) as error:
        parse_mesh(case["text"])
    assert_equals(error.value.line, case["line"], "line")
    assert_equals(error.value.field, case["field"], "field")
    assert_error_category("data_format", error.value)


@pytest.mark.unit
def test_comments_are_ignored():
    mesh = parse_mesh("# triangle\n" + VALID_TRIANGLE.replace("c 0 1 2", "c 0 1 2  # one cell"))
    assert_equals(mesh.n_cells, 1, "cells")
    assert_equals(mesh.tags, ["edge"], "tags")
    assert_equals(mesh_to_text(mesh).splitlines()[0], "mesh 2 3 1 1", "header")


@pytest.mark.unit
def test_missing_mesh_file(tmp_path):
    with pytest.raises(MalformedMeshFile):
        load_mesh(tmp_path / "absent.mesh")
