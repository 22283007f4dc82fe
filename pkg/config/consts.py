""" Constant values used in the system specifying material defaults, solver limits and file schemas"""

import math

# Ground-truth material coefficients
ISHIHARA_DEFAULTS = {"C1": 0.5, "C2": 1.0, "C3": 3.0, "K": 1.5}
MOONEY_RIVLIN_DEFAULTS = {"C1": 1.0, "C2": 0.8, "K": 1.0}
NEO_HOOKEAN_DEFAULTS = {"C1": 1.0, "C2": 0.0, "K": 1.0}
FUNG_DEFAULTS = {"C": 1.0, "b": 3.0, "K": 1.5}

# Reference values of the invariants (I1, I2, J) at F = I
REFERENCE_INVARIANTS = (3.0, 3.0, 1.0)
REFERENCE_IBAR2_POW32 = 3.0 ** 1.5
LOG_TWO = math.log(2.0)

# Architecture grid candidate sets
GRID_LAYERS = (1, 2, 3)
GRID_NEURONS = (5, 10, 20)
GRID_SKIP = (False, True)
GRID_ISOCHORIC = (False, True)
GRID_SIGMA_INIT = (0.05, 0.1, 0.2, 0.5, 0.8)
GRID_W_SCALE = (1.0, 5.0, 10.0, 20.0)

# Reduced grid used by the desk-scale preset
DESK_GRID_LAYERS = (1, 2)
DESK_GRID_NEURONS = (5,)
DESK_GRID_SKIP = (False,)
DESK_GRID_ISOCHORIC = (False, True)
DESK_GRID_SIGMA_INIT = (0.1, 0.6)
DESK_GRID_W_SCALE = (1.0, 10.0)

# Newton solver defaults
NEWTON_ABS_TOL = 1e-11
NEWTON_REL_TOL = 1e-9
NEWTON_MAX_ITER = 25
NEWTON_MAX_HALVINGS = 8
CONTINUATION_MAX_BISECTIONS = 10
CONTINUATION_STEPS = 10

# BFGS training defaults
BFGS_ARMIJO_C1 = 1e-4
BFGS_MAX_TRIALS = 20
BFGS_WINDOW = 50
BFGS_REL_IMPROVEMENT = 1e-4
BFGS_MAX_EPOCHS = 2000
BFGS_CHECKPOINT_EVERY = 50
N_SEEDS = 5

# Data generation
NOISE_LEVELS = (1e-1, 1e-2, 1e-3, 1e-4, 0.0)
GRID_SEARCH_NOISE = 1e-3
SETUP3_GEOMETRIES = 10
SETUP3_MAX_RETRIES = 200

# Experiment load lists per setup
SETUP_LOADS = {
    1: (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8),
    2: (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0),
    3: (-0.1, 0.1, 0.2, 0.3),
    4: (0.1, 0.2, 0.3, 0.4, 0.5),
    5: (0.1, 0.2, 0.3, 0.4, 0.5),
    6: (0.01, 0.02, 0.03, 0.04, 0.05, 0.06),
}
SPRING_NORMAL = 0.01
SPRING_FRONT = 0.01
SPRING_HOLE = 0.1

# Target element sizes: full resolution and desk scale
FULL_MESH_SIZE = {1: 1 / 36, 2: 1 / 32, 3: 1 / 72, 4: 1 / 18, 5: 1 / 13, 6: 0.05}
DESK_MESH_SIZE = {1: 1 / 10, 2: 1 / 10, 3: 1 / 16, 4: 1 / 5, 5: 1 / 8, 6: 0.1}

# Analysis
SINKHORN_MAX_SAMPLES = 5000
SINKHORN_EPSILON_FACTOR = 0.01
SINKHORN_MAX_ITERS = 10000
SINKHORN_TOL = 1e-9

# Geometry tolerance used to classify boundary facets
TAG_TOLERANCE = 1e-9
BARYCENTRIC_SLACK = 1e-10

# File schemas
CHECKPOINT_SCHEMA_VERSION = 1
DATASET_SCHEMA_VERSION = 1
CREATED_BY = "hyperdisc"

# CLI
THREADS_ENV_VAR = "HYPERDISC_THREADS"
EXIT_CONFIG_ERROR = 2
EXIT_SOLVER_FAILURE = 3
EXIT_DATA_FORMAT = 4
EXIT_PROPERTY_FAILURE = 5
