from pydantic import BaseModel, ConfigDict, field_validator

from config.consts import (BFGS_ARMIJO_C1, BFGS_CHECKPOINT_EVERY, BFGS_MAX_EPOCHS, BFGS_MAX_TRIALS,
                           BFGS_REL_IMPROVEMENT, BFGS_WINDOW, CONTINUATION_MAX_BISECTIONS,
                           CONTINUATION_STEPS, NEWTON_ABS_TOL, NEWTON_MAX_HALVINGS, NEWTON_MAX_ITER,
                           NEWTON_REL_TOL, SINKHORN_MAX_ITERS, SINKHORN_TOL)


class NewtonOptions(BaseModel):
    """
    Tolerances of the damped Newton solver.
    abs_tol is multiplied by the model energy scale and h^dim of the mesh.
    """
    model_config = ConfigDict(frozen=True)

    abs_tol: float = NEWTON_ABS_TOL
    rel_tol: float = NEWTON_REL_TOL
    max_iter: int = NEWTON_MAX_ITER
    max_halvings: int = NEWTON_MAX_HALVINGS

    @field_validator('abs_tol', 'rel_tol')
    def check_tolerance(cls, value):
        if value < 0:
            raise ValueError('Tolerances must be non-negative.')
        return value

    @field_validator('max_iter', 'max_halvings')
    def check_counts(cls, value):
        if value < 0:
            raise ValueError('Iteration limits must be non-negative.')
        return value


class ContinuationOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_steps: int = CONTINUATION_STEPS
    max_bisections: int = CONTINUATION_MAX_BISECTIONS

    @field_validator('n_steps')
    def check_steps(cls, value):
        if value < 1:
            raise ValueError('Continuation needs at least one step.')
        return value


class BfgsOptions(BaseModel):
    """
    Settings of the quasi-Newton trainer.

    @param c1: Armijo sufficient-decrease constant.
    @param max_trials: Step halvings per line search.
    @param window: Epochs over which the relative improvement is measured.
    @param rel_improvement: Stop when the loss improved less than this fraction over the window.
    @param max_epochs: Epoch cap.
    @param checkpoint_every: Checkpoint interval in epochs (0 disables periodic checkpoints).
    @param grad_tol: Stop when the gradient norm drops below this value.
    """
    model_config = ConfigDict(frozen=True)

    c1: float = BFGS_ARMIJO_C1
    max_trials: int = BFGS_MAX_TRIALS
    window: int = BFGS_WINDOW
    rel_improvement: float = BFGS_REL_IMPROVEMENT
    max_epochs: int = BFGS_MAX_EPOCHS
    checkpoint_every: int = BFGS_CHECKPOINT_EVERY
    grad_tol: float = 1e-14
    threads: int = 1

    @field_validator('c1')
    def check_c1(cls, value):
        if not 0 < value < 1:
            raise ValueError('c1 must lie in (0, 1).')
        return value

    @field_validator('max_trials', 'window', 'threads')
    def check_positive(cls, value):
        if value < 1:
            raise ValueError('Value must be at least 1.')
        return value

    @field_validator('max_epochs', 'checkpoint_every')
    def check_non_negative(cls, value):
        if value < 0:
            raise ValueError('Value must be non-negative.')
        return value


class SinkhornOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    epsilon: float | None = None
    max_iters: int = SINKHORN_MAX_ITERS
    tol: float = SINKHORN_TOL
    seed: int = 0
