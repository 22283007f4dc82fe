"""
Structured-grid mesh generators for the specimen families.

A background grid (right triangles in 2D, Kuhn tetrahedra in 3D) is snapped onto the analytic
hole surfaces, carved, and its exterior facets are tagged by plane membership.
"""

from dataclasses import dataclass, field
from itertools import permutations
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from config.consts import SETUP3_MAX_RETRIES, TAG_TOLERANCE
from config.logging_config import format_record, setup_logger
from helpers.exceptions import ConfigError, GeometryInfeasible
from mesh.mesh import Mesh, exterior_facets, signed_volumes
from mesh.shapes import Ball, BoxUnion, Cylinder, Ellipse, Hole
from models.geometry_model import GeometrySpec

LOG = setup_logger(__name__)

SNAP_FACTOR = 0.3
MIN_VOLUME_FACTOR = 1e-3


@dataclass(frozen=True)
class Plane:
    """Boundary facets on coordinate plane x[axis] = value with outward normal sign * e_axis."""
    tag: str
    axis: int
    value: float
    sign: int
    where: Optional[Callable[[np.ndarray], np.ndarray]] = None


@dataclass
class SpecimenLayout:
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    counts: Tuple[int, ...]
    holes: List[Hole] = field(default_factory=list)
    mask: Optional[BoxUnion] = None
    planes: List[Plane] = field(default_factory=list)
    required_tags: Tuple[str, ...] = ()


def structured_grid(lower: Sequence[float], upper: Sequence[float], counts: Sequence[int]):
    """
    Background simplicial grid of a box. Squares are split along one diagonal, cubes into six
    tetrahedra sharing the main diagonal, so neighbouring cells conform.

    :return: (nodes, cells) with positively oriented cells.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    counts = tuple(int(c) for c in counts)
    dim = len(counts)
    axes = [np.linspace(lower[d], upper[d], counts[d] + 1) for d in range(dim)]
    grids = np.meshgrid(*axes, indexing='ij')
    nodes = np.column_stack([g.ravel(order='F') for g in grids])
    strides = np.cumprod([1] + [c + 1 for c in counts[:-1]])
    base = np.meshgrid(*[np.arange(c) for c in counts], indexing='ij')
    base = [b.ravel(order='F') for b in base]

    def index(offset):
        return sum((base[d] + offset[d]) * strides[d] for d in range(dim))

    cells = []
    for perm in permutations(range(dim)):
        offset = [0] * dim
        verts = [index(offset)]
        for axis in perm:
            offset[axis] += 1
            verts.append(index(offset))
        cells.append(np.column_stack(verts))
    cells = np.concatenate(cells)
    negative = signed_volumes(nodes, cells) < 0
    cells[negative, 0], cells[negative, 1] = cells[negative, 1], cells[negative, 0].copy()
    return nodes, cells


def carve(nodes: np.ndarray, cells: np.ndarray, h: float, holes: Sequence[Hole] = (),
          mask: Optional[BoxUnion] = None):
    """
    Snap nodes close to hole surfaces, drop cells outside the material, project the remaining
    inside nodes onto the surfaces and remove collapsed cells.

    :return: (nodes, cells) with unused nodes removed.
    """
    dim = nodes.shape[1]
    nodes = nodes.copy()
    for hole in holes:
        near = np.abs(hole.level(nodes)) < SNAP_FACTOR * h
        nodes[near] = hole.project(nodes[near])

    centroids = nodes[cells].mean(axis=1)
    keep = np.ones(cells.shape[0], dtype=bool)
    if mask is not None:
        keep &= mask.contains(centroids)
    for hole in holes:
        keep &= hole.level(centroids) > 0
    cells = cells[keep]

    used = np.unique(cells)
    for hole in holes:
        inside = used[hole.level(nodes[used]) < 0]
        nodes[inside] = hole.project(nodes[inside])

    cells = cells[signed_volumes(nodes, cells) > MIN_VOLUME_FACTOR * h ** dim]
    used = np.unique(cells)
    remap = np.full(nodes.shape[0], -1, dtype=np.int64)
    remap[used] = np.arange(used.size)
    return nodes[used], remap[cells]


def tag_facets(mesh: Mesh, layout: SpecimenLayout, h: float) -> np.ndarray:
    """Tag each boundary facet: coordinate planes first, then hole surfaces, otherwise 'free'."""
    centroids = mesh.nodes[mesh.facets].mean(axis=1)
    normals = mesh.facet_normals
    tags = np.full(mesh.facets.shape[0], "free", dtype=object)
    for hole in layout.holes:
        tags[np.abs(hole.level(centroids)) < 0.5 * h] = "hole"
    scale = max(np.max(np.abs(layout.upper)), np.max(np.abs(layout.lower)), 1.0)
    for plane in layout.planes:
        hit = (np.abs(centroids[:, plane.axis] - plane.value) < TAG_TOLERANCE * scale) \
            & (normals[:, plane.axis] * plane.sign > 1.0 - 1e-8)
        if plane.where is not None:
            hit &= plane.where(centroids)
        tags[hit] = plane.tag
    return tags


def _counts(lower, upper, h) -> Tuple[int, ...]:
    return tuple(max(1, int(round((u - l) / h))) for l, u in zip(lower, upper))


def _box_planes(lower, upper, names) -> List[Plane]:
    planes = []
    for axis, (low_name, high_name) in enumerate(names):
        if low_name:
            planes.append(Plane(low_name, axis, lower[axis], -1))
        if high_name:
            planes.append(Plane(high_name, axis, upper[axis], 1))
    return planes


def random_holes(seed: int, geometry_index: int) -> List[Ball]:
    """One to three non-overlapping circular holes inside the unit square, reproducible from the seeds."""
    rng = np.random.default_rng([seed, geometry_index])
    count = int(rng.integers(1, 4))
    margin = 0.1
    for _ in range(SETUP3_MAX_RETRIES):
        holes = []
        for _ in range(count):
            r = float(rng.uniform(0.08, 0.18))
            c = rng.uniform(r + margin, 1.0 - r - margin, size=2)
            if any(np.linalg.norm(c - np.asarray(o.center)) < r + o.radius + margin for o in holes):
                break
            holes.append(Ball(tuple(float(v) for v in c), r))
        if len(holes) == count:
            return holes
    raise GeometryInfeasible(f"No admissible layout of {count} holes after {SETUP3_MAX_RETRIES} draws "
                             f"(seed={seed}, geometry={geometry_index})")


def specimen_layout(spec: GeometrySpec, h: float) -> SpecimenLayout:
    sid = spec.setup_id
    xy = (("left", "right"), ("down", "up"))
    xyz = (("left", "right"), ("front", "back"), ("down", "up"))
    if sid == 1:
        lower, upper = (0.0, 0.0), (1.0, 1.0)
        return SpecimenLayout(lower, upper, _counts(lower, upper, h), [Ball((0.0, 0.0), spec.hole_radius)],
                              planes=_box_planes(lower, upper, xy),
                              required_tags=("left", "right", "down", "up"))
    if sid == 2:
        lower, upper = (0.0, 0.0), (2.0, 2.0)
        holes = [Ellipse((0.6, 1.3), (0.35, 0.2)), Ellipse((1.4, 0.7), (0.35, 0.2))]
        return SpecimenLayout(lower, upper, _counts(lower, upper, h), holes,
                              planes=_box_planes(lower, upper, xy), required_tags=("down", "up"))
    if sid == 3:
        lower, upper = (0.0, 0.0), (1.0, 1.0)
        return SpecimenLayout(lower, upper, _counts(lower, upper, h), random_holes(spec.seed, spec.geometry_index),
                              planes=_box_planes(lower, upper, xy),
                              required_tags=("left", "right", "down", "up"))
    if sid == 4:
        lower, upper = (0.0, 0.0, 0.0), (1.0, 1.0, 1.0)
        return SpecimenLayout(lower, upper, _counts(lower, upper, h), [Ball((0.0, 0.0, 0.0), spec.sphere_radius)],
                              planes=_box_planes(lower, upper, xyz),
                              required_tags=("left", "right", "front", "back", "down", "up"))
    if sid == 5:
        lower, upper = (-0.5, -0.5, 0.0), (0.5, 0.5, 1.0)
        return SpecimenLayout(lower, upper, _counts(lower, upper, h),
                              [Cylinder((0.0, 0.0, 0.5), (1.0, 0.0, 0.4), 0.15)],
                              planes=_box_planes(lower, upper, ((None, None), (None, None), ("down", "up"))),
                              required_tags=("down", "up"))
    # Bracket: base slab with two upright arms and a vertical through-hole; grid aligned with the walls
    k = max(1, int(round(0.1 / h)))
    lower, upper = (0.0, 0.0, 0.0), (2.0, 1.0, 1.2)
    mask = BoxUnion([((0.0, 0.0, 0.0), (2.0, 1.0, 0.4)),
                     ((0.0, 0.0, 0.0), (0.3, 1.0, 1.2)),
                     ((1.7, 0.0, 0.0), (2.0, 1.0, 1.2))])
    above_base = lambda c: c[:, 2] > 0.4
    planes = [Plane("down", 2, 0.0, -1), Plane("front", 1, 0.0, -1),
              Plane("back", 0, 0.3, 1, above_base), Plane("back", 0, 1.7, -1, above_base)]
    return SpecimenLayout(lower, upper, (20 * k, 10 * k, 12 * k), [Cylinder((1.0, 0.5, 0.0), (0.0, 0.0, 1.0), 0.2)],
                          mask=mask, planes=planes, required_tags=("down", "front", "back", "hole"))


def generate_mesh(spec: GeometrySpec, h_target: float) -> Mesh:
    """
    Mesh of a specimen at a target element size. Deterministic for a fixed (spec, h_target).

    :raises GeometryInfeasible: when the layout cannot be realised or a required boundary is empty.
    """
    if not h_target > 0:
        raise ConfigError(f"Element size must be positive, got {h_target}")
    layout = specimen_layout(spec, h_target)
    h = max((u - l) / c for l, u, c in zip(layout.lower, layout.upper, layout.counts))
    nodes, cells = structured_grid(layout.lower, layout.upper, layout.counts)
    nodes, cells = carve(nodes, cells, h, layout.holes, layout.mask)
    if cells.shape[0] == 0:
        raise GeometryInfeasible(f"Setup {spec.setup_id} produced an empty mesh at h={h_target}")
    facets, _ = exterior_facets(cells, spec.dim)
    untagged = Mesh(spec.dim, nodes, cells, facets, np.full(facets.shape[0], "free", dtype=object))
    mesh = Mesh(spec.dim, nodes, cells, untagged.facets, tag_facets(untagged, layout, h))
    missing = [t for t in layout.required_tags if t not in mesh.tags]
    if missing:
        raise GeometryInfeasible(f"Setup {spec.setup_id} mesh has no facets tagged {missing}")
    LOG.info(format_record("Generated mesh", setup=spec.setup_id, nodes=mesh.n_nodes, cells=mesh.n_cells,
                           facets=mesh.facets.shape[0], h=float(h)))
    return mesh


def box_mesh(lower: Sequence[float], upper: Sequence[float], counts: Sequence[int]) -> Mesh:
    """Structured simplicial mesh of a box with its faces tagged left/right, (front/back,) down/up."""
    dim = len(counts)
    names = (("left", "right"), ("down", "up")) if dim == 2 else \
        (("left", "right"), ("front", "back"), ("down", "up"))
    layout = SpecimenLayout(tuple(lower), tuple(upper), tuple(counts), planes=_box_planes(lower, upper, names))
    nodes, cells = structured_grid(lower, upper, counts)
    facets, _ = exterior_facets(cells, dim)
    untagged = Mesh(dim, nodes, cells, facets, np.full(facets.shape[0], "free", dtype=object))
    h = max((u - l) / c for l, u, c in zip(lower, upper, counts))
    return Mesh(dim, nodes, cells, untagged.facets, tag_facets(untagged, layout, h))
