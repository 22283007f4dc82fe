from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from config.consts import CHECKPOINT_SCHEMA_VERSION, CREATED_BY, DATASET_SCHEMA_VERSION


class ArchitectureRecord(BaseModel):
    L: int
    n: List[int]
    skip: bool
    isochoric: bool
    W_scale: str
    sigma_init: str


class CheckpointDocument(BaseModel):
    """
    On-disk checkpoint. Doubles are stored as float.hex strings so that round-trips are exact.
    """
    schema_version: int = CHECKPOINT_SCHEMA_VERSION
    model_kind: str
    architecture: Optional[ArchitectureRecord] = None
    raw_params: Dict[str, List[str]] = Field(default_factory=dict)
    coefficients: Dict[str, str] = Field(default_factory=dict)
    trainable: List[str] = Field(default_factory=list)
    seed: Optional[int] = None
    created_by: str = CREATED_BY
    metadata: Dict[str, str] = Field(default_factory=dict)


class DatasetMeta(BaseModel):
    schema_version: int = DATASET_SCHEMA_VERSION
    setup_id: int
    ground_truth: str
    noise_sigma: str
    noise_seed: int
    mask: str
    setup_seed: int
    desk_scale: bool
    created_by: str = CREATED_BY


class ExperimentRecord(BaseModel):
    index: int
    setup_id: int
    geometry_index: int
    load_value: str
    mesh_file: str
    mesh_checksum: str
    bc_program: Dict[str, str]


class ObservationRecord(BaseModel):
    experiment: int
    points: List[List[str]]
    displacements: List[List[str]]


class ReactionRecord(BaseModel):
    experiment: int
    tag: str
    value: str


class DatasetDocument(BaseModel):
    meta: DatasetMeta
    experiments: List[ExperimentRecord]
    observations: List[ObservationRecord]
    reactions: List[ReactionRecord] = Field(default_factory=list)
