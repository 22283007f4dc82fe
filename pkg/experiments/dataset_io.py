"""
Dataset directories:

    dataset.json         meta, experiments, observations and reactions (doubles as float.hex)
    meshes/geom_<g>.mesh one mesh file per geometry
"""

import json
from pathlib import Path
from typing import Dict, List, Union

import numpy as np
from pydantic import ValidationError

from config.consts import DATASET_SCHEMA_VERSION
from config.logging_config import format_record, setup_logger
from experiments.setups import Experiment, setup_bc
from experiments.synthetic import (Observation, ObservationMask, ObservationSet, ReactionObservation,
                                   SyntheticDataset)
from fem.space import FeSpace
from helpers.exceptions import MalformedDataset, MalformedMeshFile
from mesh.io import load_mesh, save_mesh
from models.document_model import (DatasetDocument, DatasetMeta, ExperimentRecord, ObservationRecord,
                                   ReactionRecord)
from models.geometry_model import GeometrySpec

LOG = setup_logger(__name__)

DATASET_FILE = "dataset.json"


def _hex_rows(array: np.ndarray) -> List[List[str]]:
    return [[float(v).hex() for v in row] for row in np.asarray(array, dtype=float)]


def _unhex_rows(rows, field: str) -> np.ndarray:
    try:
        return np.array([[float.fromhex(v) for v in row] for row in rows], dtype=float)
    except (TypeError, ValueError) as e:
        raise MalformedDataset(f"Field '{field}' holds a value that is not a hex double: {e}")


def to_document(dataset: SyntheticDataset, mesh_files: Dict[int, str]) -> DatasetDocument:
    meta = DatasetMeta(setup_id=dataset.setup_id, ground_truth=dataset.ground_truth,
                       noise_sigma=float(dataset.noise_sigma).hex(), noise_seed=dataset.noise_seed,
                       mask=ObservationMask(dataset.mask).value, setup_seed=dataset.setup_seed,
                       desk_scale=dataset.desk_scale)
    experiments = [ExperimentRecord(index=e.index, setup_id=e.setup_id, geometry_index=e.geometry.geometry_index,
                                    load_value=float(e.load_value).hex(),
                                    mesh_file=mesh_files[e.geometry.geometry_index],
                                    mesh_checksum=e.mesh.checksum(), bc_program=e.bc.describe())
                   for e in dataset.experiments]
    observations = [ObservationRecord(experiment=o.experiment, points=_hex_rows(o.points),
                                      displacements=_hex_rows(o.displacements))
                    for o in dataset.observations.displacements]
    reactions = [ReactionRecord(experiment=r.experiment, tag=r.tag, value=float(r.value).hex())
                 for r in dataset.observations.reactions]
    return DatasetDocument(meta=meta, experiments=experiments, observations=observations, reactions=reactions)


def save_dataset(dataset: SyntheticDataset, directory: Union[str, Path]) -> Path:
    """Write the dataset and its meshes; returns the path of the dataset file."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    mesh_files: Dict[int, str] = {}
    for e in dataset.experiments:
        g = e.geometry.geometry_index
        if g not in mesh_files:
            mesh_files[g] = f"meshes/geom_{g}.mesh"
            save_mesh(e.mesh, directory / mesh_files[g])
    path = directory / DATASET_FILE
    path.write_text(to_document(dataset, mesh_files).model_dump_json(indent=1), encoding="utf-8")
    LOG.info(format_record("Saved dataset", path=str(path), experiments=len(dataset.experiments)))
    return path


def load_dataset(path: Union[str, Path]) -> SyntheticDataset:
    """
    Read a dataset directory (or its dataset.json). Meshes are checked against their recorded checksums
    and the boundary program is rebuilt from the setup id.

    :raises MalformedDataset: on schema, version, checksum or value errors.
    """
    path = Path(path)
    if path.is_dir():
        path = path / DATASET_FILE
    if not path.is_file():
        raise MalformedDataset(f"Dataset file {path} does not exist")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise MalformedDataset(f"Dataset {path} is not valid JSON: {e}")
    version = raw.get("meta", {}).get("schema_version") if isinstance(raw, dict) else None
    if version != DATASET_SCHEMA_VERSION:
        raise MalformedDataset(f"Unsupported dataset schema version {version}, expected {DATASET_SCHEMA_VERSION}")
    try:
        document = DatasetDocument.model_validate(raw)
    except ValidationError as e:
        raise MalformedDataset(f"Dataset {path} does not match the schema: {e}")
    return from_document(document, path.parent)


def from_document(document: DatasetDocument, root: Path) -> SyntheticDataset:
    meta = document.meta
    bc = setup_bc(meta.setup_id)
    spaces: Dict[str, FeSpace] = {}
    experiments: List[Experiment] = []
    for record in sorted(document.experiments, key=lambda r: r.index):
        if record.mesh_file not in spaces:
            try:
                mesh = load_mesh(root / record.mesh_file)
            except MalformedMeshFile as e:
                raise MalformedDataset(f"Mesh {record.mesh_file} is unreadable: {e}")
            if mesh.checksum() != record.mesh_checksum:
                raise MalformedDataset(f"Mesh {record.mesh_file} does not match its recorded checksum")
            spaces[record.mesh_file] = FeSpace(mesh, bc)
        try:
            load = float.fromhex(record.load_value)
        except ValueError as e:
            raise MalformedDataset(f"Experiment {record.index} load is not a hex double: {e}")
        geometry = GeometrySpec(setup_id=record.setup_id, seed=meta.setup_seed, geometry_index=record.geometry_index)
        experiments.append(Experiment(record.index, record.setup_id, geometry, load, spaces[record.mesh_file]))

    indices = {e.index for e in experiments}
    observations = ObservationSet()
    for o in document.observations:
        if o.experiment not in indices:
            raise MalformedDataset(f"Observation refers to unknown experiment {o.experiment}")
        points = _unhex_rows(o.points, "points")
        values = _unhex_rows(o.displacements, "displacements")
        if points.shape != values.shape:
            raise MalformedDataset(f"Experiment {o.experiment}: {points.shape[0]} points but "
                                   f"{values.shape[0]} displacement rows")
        observations.displacements.append(Observation(o.experiment, points, values))
    for r in document.reactions:
        if r.experiment not in indices:
            raise MalformedDataset(f"Reaction refers to unknown experiment {r.experiment}")
        try:
            observations.reactions.append(ReactionObservation(r.experiment, r.tag, float.fromhex(r.value)))
        except ValueError as e:
            raise MalformedDataset(f"Reaction value is not a hex double: {e}")

    try:
        sigma = float.fromhex(meta.noise_sigma)
        mask = ObservationMask(meta.mask)
    except ValueError as e:
        raise MalformedDataset(f"Invalid dataset metadata: {e}")
    return SyntheticDataset(experiments, [], observations, meta.ground_truth, sigma, meta.noise_seed, mask,
                            meta.setup_seed, meta.desk_scale)
