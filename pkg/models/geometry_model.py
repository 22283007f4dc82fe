from pydantic import BaseModel, ConfigDict, Field


class GeometrySpec(BaseModel):
    """
    Specimen description consumed by the mesh generators.

    @param setup_id: Specimen family, 1 to 6.
    @param seed: Seed of the random hole layout (Setup 3 only).
    @param geometry_index: Index of the random layout within a Setup 3 family.
    @param hole_radius: Radius of the Setup 1 hole.
    @param sphere_radius: Radius of the Setup 4 spherical hole.
    """
    model_config = ConfigDict(frozen=True)

    setup_id: int = Field(ge=1, le=6)
    seed: int = 0
    geometry_index: int = Field(default=0, ge=0)
    hole_radius: float = Field(default=0.1, gt=0, lt=1)
    sphere_radius: float = Field(default=0.5, gt=0, lt=1)

    @property
    def dim(self) -> int:
        return 2 if self.setup_id <= 3 else 3
