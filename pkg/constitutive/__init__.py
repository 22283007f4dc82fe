from constitutive.analytic import AnalyticKind, AnalyticModel, analytic_energy, default_model
from constitutive.base import ConstitutiveModel, EnergyEval
from constitutive.checkpoint import deserialize_model, load_checkpoint, save_checkpoint, serialize_model
from constitutive.hnn import HnnModel, HnnParams, hnn_energy, parameter_layout, pnn_forward
from constitutive.initialization import (expected_initial_slope, init_model, init_params,
                                         preset_architecture)
from constitutive.stress import (energy_param_gradient, material_tangent, piola_stress,
                                 stress_param_gradient)
