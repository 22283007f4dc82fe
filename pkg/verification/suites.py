"""
Property suites run by `verify properties`: structural admissibility of the network law,
finite-element exactness and derivative oracles of the inverse problem.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from config.logging_config import format_record, setup_logger
from constitutive.analytic import default_model
from constitutive.base import ConstitutiveModel, reference_invariants
from constitutive.hnn import HnnModel
from constitutive.initialization import expected_initial_slope, init_model
from constitutive.stress import material_tangent, piola_stress, strain_energy, stress_param_gradient
from discovery.loss import DiscoveryProblem, adjoint_gradient, evaluate_loss
from experiments.setups import build_setup
from experiments.synthetic import ObservationMask, generate_synthetic
from fem.assembly import assemble_residual, assemble_tangent
from fem.bc import BcProgram, DirichletVector
from fem.reactions import reaction_force
from fem.solver import newton_solve
from fem.space import FeSpace
from helpers.assertions import relative_error
from helpers.decorators import log_execution_time
from helpers.exceptions import PropertySuiteFailure
from helpers.generators import DeformationGenerator, RotationGenerator, generate_hnn_params
from mesh.generators import box_mesh
from models.architecture_model import HnnArchitecture
from models.options_model import NewtonOptions

LOG = setup_logger(__name__)

SUITES = ("constitutive", "fem", "adjoint")

# Newton settings that iterate down to the round-off floor
TIGHT_NEWTON = NewtonOptions(abs_tol=0.0, rel_tol=0.0, max_iter=30)


@dataclass(frozen=True)
class PropertyCheck:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class SuiteReport:
    suite: str
    checks: List[PropertyCheck] = field(default_factory=list)

    def add(self, name: str, passed: bool, detail: str = ""):
        self.checks.append(PropertyCheck(name, bool(passed), detail))
        LOG.info(format_record("Property check", suite=self.suite, check=name, passed=bool(passed), detail=detail))

    @property
    def failures(self) -> List[PropertyCheck]:
        return [c for c in self.checks if not c.passed]

    @property
    def passed(self) -> bool:
        return not self.failures


def suite_architectures() -> List[HnnArchitecture]:
    return [
        HnnArchitecture.uniform(1, 5, sigma_init=0.1, w_scale=10.0),
        HnnArchitecture.uniform(2, 5, sigma_init=0.6),
        HnnArchitecture.uniform(2, 5, skip_connections=True, sigma_init=0.6),
        HnnArchitecture.uniform(3, 3, skip_connections=True, sigma_init=0.3),
        HnnArchitecture.uniform(2, 8, sigma_init=0.3, w_scale=10.0),
        HnnArchitecture.uniform(2, 5, isochoric_inputs=True, sigma_init=0.6),
    ]


def _lifted_energy(model: ConstitutiveModel, A: np.ndarray, B: np.ndarray, t: np.ndarray) -> np.ndarray:
    """W with I1 <- |A|^2, I2 <- |B|^2 and J <- t for independent (A, B, t)."""
    inv = np.column_stack([np.einsum('nij,nij->n', A, A), np.einsum('nij,nij->n', B, B), t])
    return model.energy(inv).W


def _structural_checks(model: HnnModel, rotations: np.ndarray, deformations: np.ndarray,
                       rng: np.random.Generator, n_segments: int) -> Dict[str, float]:
    """Worst residual of every structural property for one parameter draw."""
    scale = model.energy_scale
    out: Dict[str, float] = {}
    out["normalisation"] = abs(float(model.energy(reference_invariants()).W[0])) / scale
    out["stress_free"] = float(np.max(np.abs(piola_stress(model, np.eye(3))))) / scale

    W = strain_energy(model, deformations)
    denom = np.maximum(np.abs(W), scale)
    out["objectivity"] = float(np.max(np.abs(strain_energy(model, rotations @ deformations) - W) / denom))
    out["isotropy"] = float(np.max(np.abs(strain_energy(model, deformations @ rotations) - W) / denom))

    if not model.arch.isochoric_inputs:
        A0, A1 = np.eye(3) + 0.5 * rng.standard_normal((2, n_segments, 3, 3))
        B0, B1 = np.eye(3) + 0.5 * rng.standard_normal((2, n_segments, 3, 3))
        t0, t1 = rng.uniform(0.1, 3.0, (2, n_segments))
        mid = _lifted_energy(model, 0.5 * (A0 + A1), 0.5 * (B0 + B1), 0.5 * (t0 + t1))
        ends = 0.5 * (_lifted_energy(model, A0, B0, t0) + _lifted_energy(model, A1, B1, t1))
        out["polyconvexity"] = max(float(np.max(mid - ends)), 0.0) / scale

        lam = np.geomspace(10.0, 1e3, 9)
        growth = strain_energy(model, lam[:, None, None] * np.eye(3)) / lam ** 2
        out["coercivity"] = 0.0 if np.all(growth > 0) else 1.0
    else:
        lam = np.geomspace(2.0, 1e3, 9)
        W_lam = strain_energy(model, lam[:, None, None] * np.eye(3))
        out["coercivity"] = 0.0 if np.all(np.diff(W_lam / lam) > 0) else 1.0

    eps = np.geomspace(1e-4, 0.05, 25)[::-1]
    W_eps = strain_energy(model, eps[:, None, None] * np.eye(3))
    decreasing = np.all(np.diff(W_eps) > 0)
    # grows at least like |log eps| as eps -> 0
    ratio = W_eps / np.abs(np.log(eps))
    out["compression_growth"] = 0.0 if decreasing and ratio[-1] > 0 and ratio[-1] >= 0.5 * ratio[-5] else 1.0
    return out


LIMITS = {"normalisation": 1e-12, "stress_free": 1e-10, "objectivity": 1e-12, "isotropy": 1e-12,
          "polyconvexity": 1e-10, "coercivity": 0.0, "compression_growth": 0.0}


def _initialisation_checks(report: SuiteReport, n_draws: int, seed: int):
    for skip in (False, True):
        for width in (5, 20):
            arch = HnnArchitecture.uniform(2, width, skip_connections=skip, sigma_init=0.6)
            slopes = np.array([HnnModel(arch, p).energy(reference_invariants()).dW_dInv[0, 0]
                               for p in generate_hnn_params(arch, n_draws, seed)])
            expected = expected_initial_slope(arch)
            se = float(np.std(slopes, ddof=1) / np.sqrt(n_draws))
            gap = abs(float(np.mean(slopes)) - expected)
            report.add(f"initial_slope[{arch.label()}]", gap <= 3.0 * se + 1e-12 * abs(expected),
                       f"mean={np.mean(slopes):.4e} expected={expected:.4e} se={se:.2e}")


def _derivative_checks(report: SuiteReport, n_samples: int, seed: int, h: float = 1e-6):
    rng = np.random.default_rng(seed)
    archs = suite_architectures()
    deformations = DeformationGenerator(seed, amplitude=0.2)
    worst_tangent, worst_param = 0.0, 0.0
    for k in range(n_samples):
        arch = archs[k % len(archs)]
        model = init_model(arch, int(rng.integers(1 << 31)))
        F = next(deformations)
        A = material_tangent(model, F)
        fd = np.zeros((3, 3, 3, 3))
        for i in range(3):
            for j in range(3):
                dF = np.zeros((3, 3))
                dF[i, j] = h
                fd[:, :, i, j] = (piola_stress(model, F + dF) - piola_stress(model, F - dF)) / (2.0 * h)
        worst_tangent = max(worst_tangent, relative_error(fd, A))

        theta = model.parameter_vector()
        dP = stress_param_gradient(model, F)
        fd_p = np.stack([(piola_stress(model.with_parameters(theta + h * e), F)
                          - piola_stress(model.with_parameters(theta - h * e), F)) / (2.0 * h)
                         for e in np.eye(theta.size)])
        worst_param = max(worst_param, relative_error(fd_p, dP))
    report.add("material_tangent_fd", worst_tangent < 1e-5, f"worst={worst_tangent:.2e}")
    report.add("stress_param_gradient_fd", worst_param < 1e-5, f"worst={worst_param:.2e}")


@log_execution_time
def constitutive_suite(n_draws: int = 100, n_samples: int = 1000, n_segments: int = 10000,
                       n_init_draws: int = 2000, n_derivative_samples: int = 50, seed: int = 0) -> SuiteReport:
    """
    Structural properties of random network draws, initial-slope statistics and derivative oracles.

    @param n_draws: Parameter draws spread over the suite architectures.
    @param n_samples: Random (R, F) pairs per draw for objectivity and isotropy.
    @param n_segments: Random segments per draw for midpoint polyconvexity.
    @param n_init_draws: Monte Carlo draws per architecture for the initial slope.
    """
    report = SuiteReport("constitutive")
    rng = np.random.default_rng(seed)
    rotation_stream, deformation_stream = RotationGenerator(seed), DeformationGenerator(seed + 1)
    rotations = np.stack([next(rotation_stream) for _ in range(n_samples)])
    deformations = np.stack([next(deformation_stream) for _ in range(n_samples)])
    archs = suite_architectures()
    worst = {name: 0.0 for name in LIMITS}
    per_arch = max(1, n_draws // len(archs))
    for arch in archs:
        for params in generate_hnn_params(arch, per_arch, int(rng.integers(1 << 31))):
            for name, value in _structural_checks(HnnModel(arch, params), rotations, deformations, rng,
                                                  n_segments).items():
                worst[name] = max(worst[name], value)
    for name, limit in LIMITS.items():
        report.add(name, worst[name] <= limit, f"worst={worst[name]:.2e} limit={limit:.0e}")
    _initialisation_checks(report, n_init_draws, seed)
    _derivative_checks(report, n_derivative_samples, seed)
    return report


def affine_field(F: np.ndarray) -> Callable[[np.ndarray, float], np.ndarray]:
    G = np.asarray(F, dtype=float) - np.eye(F.shape[0])

    def displacement(points: np.ndarray, load_scale: float) -> np.ndarray:
        return load_scale * points @ G.T

    return displacement


def homogeneous_stretch_space(stretch: float = 1.2, counts=(3, 3, 3)) -> FeSpace:
    """Unit cube with every face following the affine map of a uniaxial stretch."""
    F = np.diag([stretch, 1.0, 1.0])
    condition = DirichletVector(field=affine_field(F), label=f"uniaxial_{stretch:g}")
    mesh = box_mesh((0.0, 0.0, 0.0), (1.0, 1.0, 1.0), counts)
    return FeSpace(mesh, BcProgram({tag: condition for tag in mesh.tags if tag != "free"}))


def convergence_order(history) -> Optional[float]:
    """Order estimate log(r2/r1) / log(r1/r0) of the last three residuals above the round-off floor."""
    r = np.asarray(history, dtype=float)
    r = r[r > 1e-13 * r[0]]
    if r.size < 3:
        return None
    r0, r1, r2 = r[-3:]
    return float(np.log(r2 / r1) / np.log(r1 / r0))


@log_execution_time
def fem_suite(stretch: float = 1.2, seed: int = 0) -> SuiteReport:
    """Affine-solution exactness, analytic reaction, Newton order and tangent consistency."""
    report = SuiteReport("fem")
    model = default_model("mr")
    space = homogeneous_stretch_space(stretch)
    sol = newton_solve(space, model, None, 1.0, TIGHT_NEWTON)
    report.add("newton_converged", sol.converged, sol.message)
    F = np.diag([stretch, 1.0, 1.0])
    exact = space.mesh.nodes @ (F - np.eye(3)).T
    full = space.nodal(space.expand(sol.dof_vector, 1.0))
    err = relative_error(full, exact)
    report.add("affine_solution", err < 1e-10, f"rel={err:.2e}")

    reaction = reaction_force(space, model, sol, "right")
    analytic = float(piola_stress(model, F)[0, 0])
    err = abs(reaction - analytic) / abs(analytic)
    report.add("analytic_reaction", err < 1e-8, f"R={reaction:.10e} P11={analytic:.10e} rel={err:.2e}")
    report.add("tensile_reaction_positive", reaction > 0, f"R={reaction:.3e}")

    order = convergence_order(sol.residual_history)
    report.add("newton_order", order is None and sol.newton_iters <= 3 or (order or 0.0) > 1.5,
               f"order={order} iters={sol.newton_iters}")

    # consistent tangent on a perturbed state with free interior dofs
    rng = np.random.default_rng(seed)
    u = 0.02 * rng.standard_normal(space.n_free)
    K = assemble_tangent(space, model, u, 0.5).toarray()
    h = 1e-7
    fd = np.column_stack([(assemble_residual(space, model, u + h * e, 0.5)
                           - assemble_residual(space, model, u - h * e, 0.5)) / (2.0 * h)
                          for e in np.eye(space.n_free)])
    err = relative_error(fd, K)
    report.add("tangent_fd", err < 1e-6, f"rel={err:.2e}")
    return report


@log_execution_time
def adjoint_suite(n_points: int = 3, h_mesh: float = 1.0 / 6.0, seed: int = 0, step: float = 1e-5) -> SuiteReport:
    """
    Adjoint gradient against central differences of the full loss along random directions,
    on a coarse first setup with a 1x5 network at the initial and perturbed parameter states.
    """
    report = SuiteReport("adjoint")
    experiments = build_setup(1, desk_scale=True, seed=seed, h=h_mesh, loads=(0.1, 0.2))
    dataset = generate_synthetic(experiments, default_model("mr"), ObservationMask.BOUNDARY_ONLY, 1e-3, seed)
    problem = DiscoveryProblem(experiments, dataset.observations, newton=TIGHT_NEWTON)
    arch = HnnArchitecture.uniform(1, 5, sigma_init=0.1, w_scale=10.0)
    base = init_model(arch, seed)
    rng = np.random.default_rng(seed)
    worst = 0.0
    theta0 = base.parameter_vector()
    for k in range(n_points):
        theta = theta0 + (0.05 * k) * rng.standard_normal(theta0.size)
        model = base.with_parameters(theta)
        _, warm = evaluate_loss(model, problem)
        grad = adjoint_gradient(model, problem, warm)
        v = rng.standard_normal(theta.size)
        v /= np.linalg.norm(v)
        plus, _ = evaluate_loss(model.with_parameters(theta + step * v), problem, warm)
        minus, _ = evaluate_loss(model.with_parameters(theta - step * v), problem, warm)
        fd = (plus.total - minus.total) / (2.0 * step)
        err = abs(fd - grad @ v) / max(abs(fd), 1e-3 * np.linalg.norm(grad), 1e-300)
        worst = max(worst, err)
        LOG.debug(format_record("Adjoint check", point=k, fd=fd, adjoint=float(grad @ v), rel=err))
    report.add("adjoint_gradient_fd", worst < 1e-5, f"worst={worst:.2e} points={n_points}")
    return report


SUITE_RUNNERS = {"constitutive": constitutive_suite, "fem": fem_suite, "adjoint": adjoint_suite}


def run_suites(name: str = "all", settings: Optional[Dict[str, dict]] = None,
               on_report: Optional[Callable[[SuiteReport], None]] = None) -> List[SuiteReport]:
    """
    Run one suite or all of them.

    @param settings: Keyword arguments per suite name.
    @param on_report: Called with every report as soon as its suite finished.
    :raises PropertySuiteFailure: after all requested suites ran, if any check failed.
    """
    names = SUITES if name == "all" else (name,)
    reports = []
    for n in names:
        reports.append(SUITE_RUNNERS[n](**(settings or {}).get(n, {})))
        if on_report is not None:
            on_report(reports[-1])
    failed = [r for r in reports if not r.passed]
    if failed:
        raise PropertySuiteFailure("; ".join(
            f"suite {r.suite} failed: " + ", ".join(f"{c.name} ({c.detail})" for c in r.failures) for r in failed))
    return reports
