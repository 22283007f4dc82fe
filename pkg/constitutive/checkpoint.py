import json
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np
from pydantic import ValidationError

from config.consts import CHECKPOINT_SCHEMA_VERSION
from constitutive.analytic import AnalyticKind, AnalyticModel
from constitutive.base import ConstitutiveModel
from constitutive.hnn import HnnModel, HnnParams, parameter_layout
from helpers.exceptions import MalformedCheckpoint
from models.architecture_model import HnnArchitecture
from models.document_model import ArchitectureRecord, CheckpointDocument


def _hex(values) -> list:
    return [float(v).hex() for v in np.asarray(values, dtype=float).reshape(-1)]


def _unhex(values, field: str) -> np.ndarray:
    try:
        return np.array([float.fromhex(v) for v in values], dtype=float)
    except (TypeError, ValueError) as e:
        raise MalformedCheckpoint(f"Field '{field}' holds a value that is not a hex double: {e}")


def serialize_model(model: ConstitutiveModel, metadata: Optional[Dict[str, str]] = None) -> bytes:
    """
    Encode a model as a JSON checkpoint with hex-encoded doubles.

    @param model: Analytic law or network.
    @param metadata: Free-form provenance strings.
    @returns: UTF-8 bytes of the checkpoint document.
    """
    metadata = {k: str(v) for k, v in (metadata or {}).items()}
    if isinstance(model, HnnModel):
        arch = model.arch
        document = CheckpointDocument(
            model_kind=model.kind,
            architecture=ArchitectureRecord(L=arch.layers, n=list(arch.neurons), skip=arch.skip_connections,
                                            isochoric=arch.isochoric_inputs, W_scale=float(arch.w_scale).hex(),
                                            sigma_init=float(arch.sigma_init).hex()),
            raw_params={name: _hex(model.params.values[name]) for name, _ in parameter_layout(arch)},
            seed=model.seed,
            metadata=metadata)
    elif isinstance(model, AnalyticModel):
        document = CheckpointDocument(
            model_kind=model.kind,
            coefficients={k: float(v).hex() for k, v in model.params.items()},
            trainable=list(model.trainable),
            metadata=metadata)
    else:
        raise TypeError(f"Cannot serialize {type(model).__name__}")
    return document.model_dump_json(indent=2).encode("utf-8")


def deserialize_model(data: bytes) -> ConstitutiveModel:
    """
    Decode a checkpoint produced by serialize_model.

    :raises MalformedCheckpoint: on schema, version or shape mismatches.
    """
    try:
        document = CheckpointDocument.model_validate(json.loads(data.decode("utf-8")))
    except (ValidationError, ValueError, UnicodeDecodeError) as e:
        raise MalformedCheckpoint(f"Invalid checkpoint document: {e}")
    if document.schema_version != CHECKPOINT_SCHEMA_VERSION:
        raise MalformedCheckpoint(f"Unsupported checkpoint schema {document.schema_version}")

    if document.model_kind == HnnModel.kind:
        record = document.architecture
        if record is None:
            raise MalformedCheckpoint("Network checkpoint without architecture")
        try:
            arch = HnnArchitecture(layers=record.L, neurons=record.n, skip_connections=record.skip,
                                   isochoric_inputs=record.isochoric,
                                   w_scale=float.fromhex(record.W_scale),
                                   sigma_init=float.fromhex(record.sigma_init))
        except (ValidationError, ValueError) as e:
            raise MalformedCheckpoint(f"Invalid architecture: {e}")
        values = {}
        layout = parameter_layout(arch)
        expected = {name for name, _ in layout}
        if set(document.raw_params) != expected:
            raise MalformedCheckpoint(f"Parameter names {sorted(document.raw_params)} do not match the architecture")
        for name, shape in layout:
            flat = _unhex(document.raw_params[name], name)
            if flat.size != int(np.prod(shape)):
                raise MalformedCheckpoint(f"Parameter '{name}' has {flat.size} entries, expected {int(np.prod(shape))}")
            values[name] = flat.reshape(shape)
        return HnnModel(arch, HnnParams(arch, values), seed=document.seed)

    try:
        AnalyticKind(document.model_kind)
    except ValueError:
        raise MalformedCheckpoint(f"Unknown model kind '{document.model_kind}'")
    coefficients = {k: float(_unhex([v], k)[0]) for k, v in document.coefficients.items()}
    try:
        return AnalyticModel(document.model_kind, coefficients, document.trainable or None)
    except Exception as e:
        raise MalformedCheckpoint(f"Invalid analytic coefficients: {e}")


def save_checkpoint(model: ConstitutiveModel, path: Union[str, Path], metadata: Optional[Dict[str, str]] = None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(serialize_model(model, metadata))


def load_checkpoint(path: Union[str, Path]) -> ConstitutiveModel:
    path = Path(path)
    if not path.is_file():
        raise MalformedCheckpoint(f"Checkpoint {path} does not exist")
    return deserialize_model(path.read_bytes())


def checkpoint_metadata(path: Union[str, Path]) -> Dict[str, str]:
    try:
        return CheckpointDocument.model_validate_json(Path(path).read_bytes()).metadata
    except (ValidationError, OSError) as e:
        raise MalformedCheckpoint(f"Invalid checkpoint document: {e}")
