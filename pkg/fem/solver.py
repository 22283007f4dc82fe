"""Damped Newton equilibrium solver and load continuation."""

from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np
from scipy.sparse.linalg import splu

from config.logging_config import format_record, setup_logger
from constitutive.base import ConstitutiveModel
from fem.assembly import assembler
from fem.space import FeSpace
from helpers.exceptions import ContinuationFailure, ElementInversion, NonPositiveJacobian
from models.options_model import ContinuationOptions, NewtonOptions

LOG = setup_logger(__name__)

# residuals below this multiple of eps times the internal force scale are at round-off level
ROUND_OFF_FACTOR = 1e3


@dataclass(frozen=True)
class EquilibriumSolution:
    """
    @param dof_vector: Free dof values.
    @param load_scale: Load factor the solution belongs to.
    @param converged: Newton reached the tolerance.
    @param newton_iters: Newton iterations spent (summed over continuation steps).
    @param residual_norm: Final free residual norm.
    @param residual_history: Residual norm after every iteration of the last solve.
    @param message: Failure description, empty on success.
    """
    dof_vector: np.ndarray
    load_scale: float
    converged: bool
    newton_iters: int
    residual_norm: float
    residual_history: Tuple[float, ...] = ()
    message: str = ""
    load_steps: Tuple[float, ...] = field(default=())


def factorize(K):
    """Sparse LU with a fill-reducing column ordering."""
    return splu(K.tocsc(), permc_spec="COLAMD")


def _free_residual(asm, model, space, u, load_scale):
    full = space.expand(u, load_scale)
    r, scale = asm.residual_and_scale(model, full, load_scale)
    return r[space.free_dofs], scale


def _free_tangent(asm, model, space, u, load_scale):
    K = asm.tangent(model, space.expand(u, load_scale), load_scale)
    free = space.free_dofs
    return K[free][:, free]


def newton_solve(space: FeSpace, model: ConstitutiveModel, initial: Optional[np.ndarray],
                 load_scale: float, options: NewtonOptions = NewtonOptions()) -> EquilibriumSolution:
    """
    Solve r(u) = 0 on the free dofs with a backtracking Newton method.
    Converged when |r| <= max(abs_tol * energy_scale * h^dim, rel_tol * |r0|); a non-converged
    result is returned with converged=False instead of raising.
    """
    asm = assembler(space)
    u = np.zeros(space.n_free) if initial is None else np.array(initial, dtype=float)
    abs_tol = options.abs_tol * model.energy_scale * space.h ** space.dim

    def failed(iters, norm, history, message):
        LOG.debug(format_record("Newton failed", load=load_scale, iters=iters, message=message))
        return EquilibriumSolution(u, load_scale, False, iters, norm, tuple(history), message)

    try:
        r, scale = _free_residual(asm, model, space, u, load_scale)
    except (ElementInversion, NonPositiveJacobian) as e:
        return failed(0, np.inf, [], f"initial guess inadmissible: {e}")
    norm = float(np.linalg.norm(r))
    tol = max(abs_tol, options.rel_tol * norm)
    history = [norm]
    eps = np.finfo(float).eps

    for it in range(options.max_iter + 1):
        if not np.isfinite(norm):
            return failed(it, norm, history, "non-finite residual")
        if norm <= max(tol, ROUND_OFF_FACTOR * eps * scale):
            return EquilibriumSolution(u, load_scale, True, it, norm, tuple(history))
        if it == options.max_iter:
            break
        try:
            du = factorize(_free_tangent(asm, model, space, u, load_scale)).solve(-r)
        except (RuntimeError, ValueError) as e:
            return failed(it, norm, history, f"linear solve failed: {e}")
        if not np.all(np.isfinite(du)):
            return failed(it, norm, history, "linear solve produced non-finite increment")

        step = 1.0
        for _ in range(options.max_halvings + 1):
            trial = u + step * du
            try:
                r_trial, scale_trial = _free_residual(asm, model, space, trial, load_scale)
                norm_trial = float(np.linalg.norm(r_trial))
            except (ElementInversion, NonPositiveJacobian):
                norm_trial = np.inf
            if norm_trial < norm:
                break
            step *= 0.5
        else:
            return failed(it + 1, norm, history, "line search found no residual decrease")
        u, r, norm, scale = trial, r_trial, norm_trial, scale_trial
        history.append(norm)
        LOG.debug(format_record("Newton iteration", iter=it + 1, residual=norm, step=step))

    return failed(options.max_iter, norm, history, f"no convergence in {options.max_iter} iterations")


def _predictor(asm, space: FeSpace, model, u, load, target) -> Optional[np.ndarray]:
    """First-order guess u - K_ff^-1 K_fc dg for a change of the prescribed values."""
    if space.constrained_dofs.size == 0:
        return None
    dg = space.dirichlet_values(target) - space.dirichlet_values(load)
    if not np.any(dg):
        return None
    try:
        K = asm.tangent(model, space.expand(u, load), load)
        free, fixed = space.free_dofs, space.constrained_dofs
        rhs = K[free][:, fixed] @ dg
        du = factorize(K[free][:, free]).solve(-rhs)
    except (ElementInversion, NonPositiveJacobian, RuntimeError, ValueError):
        return None
    guess = u + du
    return guess if np.all(np.isfinite(guess)) else None


def continuation_solve(space: FeSpace, model: ConstitutiveModel, final_load: float,
                       options: ContinuationOptions = ContinuationOptions(),
                       newton: NewtonOptions = NewtonOptions(),
                       initial: Optional[np.ndarray] = None) -> EquilibriumSolution:
    """
    Ramp the load factor from 0 to final_load in equal steps, each warm-started from the
    previous solution with a tangent predictor. A failed step is bisected.

    :raises ContinuationFailure: after max_bisections consecutive failures.
    """
    asm = assembler(space)
    u = np.zeros(space.n_free) if initial is None else np.array(initial, dtype=float)
    nominal = final_load / options.n_steps
    if nominal == 0.0:
        return newton_solve(space, model, u, final_load, newton)
    load, dt = 0.0, nominal
    bisections = 0
    total_iters = 0
    steps: List[float] = []
    last: Optional[EquilibriumSolution] = None
    end_tol = 1e-12 * abs(final_load)

    while abs(final_load - load) > end_tol:
        if abs(dt) > abs(final_load - load):
            dt = final_load - load
        target = load + dt
        if abs(final_load - target) <= end_tol:
            target = final_load
        guess = _predictor(asm, space, model, u, load, target)
        sol = newton_solve(space, model, u if guess is None else guess, target, newton)
        if not sol.converged and guess is not None:
            sol = newton_solve(space, model, u, target, newton)
        total_iters += sol.newton_iters
        if sol.converged:
            u, load, last = sol.dof_vector, target, sol
            steps.append(target)
            LOG.info(format_record("Continuation step", load=load, step=len(steps), newton=sol.newton_iters,
                                   residual=sol.residual_norm))
            bisections = 0
            dt = nominal if abs(2 * dt) >= abs(nominal) else 2 * dt
            continue
        bisections += 1
        LOG.info(format_record("Continuation bisection", load=load, target=target, bisections=bisections))
        if bisections > options.max_bisections:
            raise ContinuationFailure(load, sol.message)
        dt = 0.5 * dt

    return replace(last, newton_iters=total_iters, load_steps=tuple(steps))
