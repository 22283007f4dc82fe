from typing import List

from pydantic import BaseModel, ConfigDict, conlist, field_validator, model_validator


class HnnArchitecture(BaseModel):
    """
    Shape and scaling of a hyperelastic neural network.

    @param layers: Number of hidden layers L.
    @param neurons: Neurons per hidden layer, one entry per layer.
    @param skip_connections: Feed the invariants into every layer instead of the first only.
    @param isochoric_inputs: Use (Ibar1, Ibar2^{3/2}, J) instead of (I1, I2, J).
    @param w_scale: Output scale of the network (energy density units).
    @param sigma_init: Standard deviation of the raw weight initialization.
    """
    model_config = ConfigDict(frozen=True)

    layers: int
    neurons: conlist(item_type=int, min_length=1)
    skip_connections: bool = False
    isochoric_inputs: bool = False
    w_scale: float = 1.0
    sigma_init: float = 0.1

    @field_validator('layers')
    def check_layers(cls, layers):
        if layers < 1:
            raise ValueError('The network needs at least one hidden layer.')
        return layers

    @field_validator('neurons', mode='after')
    def check_neurons(cls, neurons: List[int]):
        if any(n < 1 for n in neurons):
            raise ValueError('Every layer needs at least one neuron.')
        return neurons

    @field_validator('w_scale', 'sigma_init')
    def check_positive(cls, value):
        if not value > 0:
            raise ValueError('Scales must be strictly positive.')
        return value

    @model_validator(mode='after')
    def check_layer_count(self):
        if len(self.neurons) != self.layers:
            raise ValueError(f'Expected {self.layers} neuron counts, got {len(self.neurons)}.')
        return self

    @classmethod
    def uniform(cls, layers: int, width: int, **kwargs) -> "HnnArchitecture":
        """Architecture with the same width in every layer."""
        return cls(layers=layers, neurons=[width] * layers, **kwargs)

    def label(self) -> str:
        """Short identifier used in grid reports and run directory names."""
        return (f"L{self.layers}-n{'x'.join(str(n) for n in self.neurons)}"
                f"-skip{int(self.skip_connections)}-iso{int(self.isochoric_inputs)}"
                f"-s{self.sigma_init:g}-W{self.w_scale:g}")
