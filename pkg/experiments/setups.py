"""Specimen families: geometry, boundary program and load list of every setup."""

from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from config.consts import (DESK_MESH_SIZE, FULL_MESH_SIZE, SETUP3_GEOMETRIES, SETUP_LOADS, SPRING_FRONT,
                           SPRING_HOLE, SPRING_NORMAL)
from config.logging_config import format_record, setup_logger
from fem.bc import BcProgram, DirichletNormal, DirichletVector, FollowerPressure, NormalSpring
from fem.space import FeSpace
from helpers.exceptions import ConfigError
from mesh.generators import generate_mesh
from mesh.mesh import Mesh
from models.geometry_model import GeometrySpec

LOG = setup_logger(__name__)

TORSION_PER_DISPLACEMENT = 2.0 * np.pi / 5.0


def torsion_displacement(points: np.ndarray, delta: float) -> np.ndarray:
    """Top-face displacement of the tension-torsion specimen: rotation by 2 pi delta / 5 about z plus lift delta."""
    theta = TORSION_PER_DISPLACEMENT * delta
    x, y = points[:, 0], points[:, 1]
    c, s = np.cos(theta), np.sin(theta)
    return np.column_stack([(c - 1.0) * x - s * y, s * x + (c - 1.0) * y, np.full(x.shape, delta)])


def setup_bc(setup_id: int) -> BcProgram:
    """Boundary program of a setup. The experiment load value is the load factor."""
    if setup_id == 1:
        return BcProgram({"left": DirichletNormal(0.0), "down": DirichletNormal(0.0),
                          "up": DirichletNormal(1.0), "right": DirichletNormal(0.5)})
    if setup_id == 2:
        return BcProgram({"down": DirichletVector(value=(0.0, 0.0)), "up": DirichletVector(value=(0.0, 1.0))})
    if setup_id == 3:
        return BcProgram({"up": NormalSpring(SPRING_NORMAL), "down": NormalSpring(SPRING_NORMAL),
                          "left": NormalSpring(SPRING_NORMAL, 1.0), "right": NormalSpring(SPRING_NORMAL, 1.0)})
    if setup_id == 4:
        return BcProgram({"left": DirichletNormal(0.0), "down": DirichletNormal(0.0),
                          "front": DirichletNormal(0.0), "right": DirichletNormal(1.0),
                          "back": DirichletNormal(0.5), "up": DirichletNormal(0.25)})
    if setup_id == 5:
        return BcProgram({"down": DirichletVector(value=(0.0, 0.0, 0.0)),
                          "up": DirichletVector(field=torsion_displacement, label="tension_torsion")})
    if setup_id == 6:
        # forward direction is -y, towards the front face; the dead part pushes with F/5
        return BcProgram({"down": DirichletNormal(0.0), "front": NormalSpring(SPRING_FRONT),
                          "hole": NormalSpring(SPRING_HOLE),
                          "back": FollowerPressure(1.0, dead_load=(0.0, -0.2, 0.0))})
    raise ConfigError(f"Unknown setup {setup_id}")


@dataclass(frozen=True, eq=False)
class SetupDefinition:
    """
    @param setup_id: Specimen family.
    @param geometries: One geometry per specimen (ten for the random-hole family).
    @param bc_program: Boundary program shared by every load of the family.
    @param load_values: Load factors, one experiment per (geometry, load).
    @param h: Target element size.
    """
    setup_id: int
    geometries: List[GeometrySpec]
    bc_program: BcProgram
    load_values: tuple
    h: float


@dataclass(frozen=True, eq=False)
class Experiment:
    index: int
    setup_id: int
    geometry: GeometrySpec
    load_value: float
    space: FeSpace

    @property
    def mesh(self) -> Mesh:
        return self.space.mesh

    @property
    def bc(self) -> BcProgram:
        return self.space.bc


def mesh_size(setup_id: int, desk_scale: bool) -> float:
    return (DESK_MESH_SIZE if desk_scale else FULL_MESH_SIZE)[setup_id]


def setup_definition(setup_id: int, desk_scale: bool = True, seed: int = 0,
                     h: Optional[float] = None, loads: Optional[tuple] = None) -> SetupDefinition:
    if setup_id not in SETUP_LOADS:
        raise ConfigError(f"Unknown setup {setup_id}, expected 1 to 6")
    n_geometries = SETUP3_GEOMETRIES if setup_id == 3 else 1
    geometries = [GeometrySpec(setup_id=setup_id, seed=seed, geometry_index=g) for g in range(n_geometries)]
    return SetupDefinition(setup_id, geometries, setup_bc(setup_id),
                           tuple(loads if loads is not None else SETUP_LOADS[setup_id]),
                           h if h is not None else mesh_size(setup_id, desk_scale))


def instantiate(definition: SetupDefinition, meshes: Optional[Dict[int, Mesh]] = None) -> List[Experiment]:
    """
    Experiments of a setup definition, one per (geometry, load), geometry-major.
    Experiments on the same geometry share one FeSpace.

    :param meshes: Optional pre-built meshes keyed by geometry index.
    """
    experiments: List[Experiment] = []
    for spec in definition.geometries:
        mesh = (meshes or {}).get(spec.geometry_index) or generate_mesh(spec, definition.h)
        space = FeSpace(mesh, definition.bc_program)
        for load in definition.load_values:
            experiments.append(Experiment(len(experiments), definition.setup_id, spec, float(load), space))
    LOG.info(format_record("Built setup", setup=definition.setup_id, experiments=len(experiments),
                           h=float(definition.h)))
    return experiments


def build_setup(setup_id: int, desk_scale: bool = True, seed: int = 0, h: Optional[float] = None,
                loads: Optional[tuple] = None) -> List[Experiment]:
    """
    Experiment instances of a setup: meshes at the desk or full resolution, the setup boundary
    program and its load list.

    :raises GeometryInfeasible: when a geometry cannot be meshed.
    """
    return instantiate(setup_definition(setup_id, desk_scale, seed, h, loads))
