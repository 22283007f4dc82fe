from discovery.loss import (DiscoveryProblem, LossBreakdown, adjoint_gradient, alpha_r, combine,
                            evaluate_loss)
from discovery.run_dir import RunDirectory
from discovery.trainer import (ArchitectureGrid, EpochRecord, GridEntry, SeedSummary, TrainerState,
                               TrainingResult, bfgs_train, grid_search, multi_seed_train)
