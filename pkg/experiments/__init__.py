from experiments.dataset_io import load_dataset, save_dataset
from experiments.setups import (Experiment, SetupDefinition, build_setup, instantiate, setup_bc,
                                setup_definition)
from experiments.synthetic import (Observation, ObservationMask, ObservationSet, ReactionObservation,
                                   SyntheticDataset, generate_synthetic, observe, solve_experiments,
                                   training_experiments)
