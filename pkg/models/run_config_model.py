from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from config.consts import N_SEEDS
from models.architecture_model import HnnArchitecture
from models.options_model import BfgsOptions, ContinuationOptions, NewtonOptions, SinkhornOptions


class RunConfig(BaseModel):
    """
    Fully resolved settings of one CLI invocation. The snapshot written into a run directory is
    this model dumped to YAML, and reading it back reproduces the run.

    @param setup: Specimen family, 1 to 6.
    @param material: Ground-truth law (nh, ih, mr, fu).
    @param desk: Use the coarse desk-scale meshes instead of the full resolution.
    @param h: Element size overriding the resolution preset.
    @param seed: Seed of geometries, noise and network initialisation.
    @param noise: Noise level of the observations.
    @param mask: Observation mask.
    @param n_seeds: Initialisations per architecture.
    @param grid: Architecture grid preset; exclusive with architecture.
    @param architecture: Explicit network shape.
    @param train_h: Element size of a re-meshed training setup; observations stay on the generating mesh.
    @param threads: Worker threads for per-experiment solves.
    @param out: Output path.
    """
    model_config = ConfigDict(frozen=True, extra='forbid')

    setup: Optional[int] = Field(default=None, ge=1, le=6)
    material: Literal['nh', 'ih', 'mr', 'fu'] = 'mr'
    desk: bool = True
    h: Optional[float] = Field(default=None, gt=0)
    seed: int = 0
    noise: float = Field(default=0.0, ge=0)
    mask: Literal['full', 'boundary'] = 'full'
    n_seeds: int = Field(default=N_SEEDS, ge=1)
    grid: Optional[Literal['full', 'desk']] = None
    architecture: Optional[HnnArchitecture] = None
    newton: NewtonOptions = NewtonOptions()
    continuation: ContinuationOptions = ContinuationOptions()
    bfgs: BfgsOptions = BfgsOptions()
    sinkhorn: SinkhornOptions = SinkhornOptions()
    train_h: Optional[float] = Field(default=None, gt=0)
    threads: int = Field(default=1, ge=1)
    out: Optional[str] = None

    @model_validator(mode='after')
    def check_model_source(self):
        if self.grid is not None and self.architecture is not None:
            raise ValueError('Give either an architecture or a grid preset, not both.')
        return self
