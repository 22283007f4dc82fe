from dataclasses import dataclass
from typing import Dict

import numpy as np
import pytest

import discovery.trainer as trainer
from discovery.loss import DiscoveryProblem, alpha_r, combine
from discovery.run_dir import HISTORY_COLUMNS, RunDirectory
from discovery.trainer import ArchitectureGrid, EpochRecord, _window_stop, bfgs_train, bfgs_update
from experiments.synthetic import Observation, ObservationSet, ReactionObservation
from constitutive.analytic import AnalyticModel, default_model
from constitutive.checkpoint import checkpoint_metadata, load_checkpoint
from helpers.assertions import assert_allclose_rel, assert_equals, assert_error_category
from helpers.exceptions import ConfigError, SolveFailure, TrainingStalled
from models.options_model import BfgsOptions


def _observations(displacements, reactions) -> ObservationSet:
    out = ObservationSet()
    for i, d in enumerate(displacements):
        d = np.asarray(d, dtype=float)
        out.displacements.append(Observation(i, np.zeros_like(d), d))
    out.reactions.extend(ReactionObservation(i, "up", v) for i, v in reactions)
    return out


test_data_alpha = [
    {
        "displacements": [[[3.0, 4.0]]], "reactions": [(0, 5.0)], "expected": 1.0,
        "test_description": "equal magnitudes",
    },
    {
        "displacements": [[[1.0, 0.0], [0.0, 1.0]], [[1.0, 1.0]]], "reactions": [(0, 2.0), (1, 0.0)],
        "expected": 1.0,
        "test_description": "two experiments",
    },
    {
        "displacements": [[[0.1, 0.0]]], "reactions": [(0, 10.0)], "expected": 1e-4,
        "test_description": "large reactions get a small weight",
    },
    {
        "displacements": [[[1.0, 0.0]]], "reactions": [], "expected": 0.0,
        "test_description": "no reactions",
    },
]


@pytest.fixture(params=test_data_alpha, ids=lambda param: f"{param.get('test_description')}")
def alpha_case(request) -> Dict:
    return request.param


@pytest.mark.unit
def test_alpha_r_balances_the_two_terms(alpha_case):
    """
    alpha_R = sum |d~|^2 / sum R~^2.
    """
    observations = _observations(alpha_case["displacements"], alpha_case["reactions"])
    assert_equals(alpha_r(observations), alpha_case["expected"], alpha_case["test_description"], 1e-12)


@pytest.mark.unit
def test_combine_weights_reactions():
    loss = combine([1.0, 2.0], [0.5, 0.25], 4.0)
    assert_equals(loss.displacement_term, 3.0, "displacement term")
    assert_equals(loss.reaction_term, 0.75, "reaction term")
    assert_equals(loss.total, 6.0, "total")
    assert np.allclose(loss.per_experiment, [3.0, 3.0])


@pytest.mark.unit
def test_bfgs_update_satisfies_secant_condition():
    """
    The updated inverse Hessian maps y to s and stays symmetric positive definite.
    """
    rng = np.random.default_rng(0)
    A = rng.standard_normal((5, 5))
    H = A @ A.T + 5.0 * np.eye(5)
    s = rng.standard_normal(5)
    y = s + 0.1 * rng.standard_normal(5)
    H_new = bfgs_update(H, s, y)
    assert_allclose_rel(H_new @ y, s, 1e-12, "secant condition")
    assert_allclose_rel(H_new, H_new.T, 1e-14, "symmetry")
    assert np.all(np.linalg.eigvalsh(H_new) > 0)


@pytest.mark.unit
def test_bfgs_update_skipped_without_curvature():
    s = np.array([1.0, 0.0])
    assert bfgs_update(np.eye(2), s, -s) is None
    assert bfgs_update(np.eye(2), s, np.array([0.0, 1.0])) is None


def _history(losses):
    return [EpochRecord(i, v, v, 0.0, 1.0, 0, 1.0, ()) for i, v in enumerate(losses)]


test_data_window = [
    {"losses": [1.0, 0.5], "window": 2, "stop": False, "test_description": "shorter than the window"},
    {"losses": [1.0, 0.9, 0.8], "window": 2, "stop": False, "test_description": "still improving"},
    {"losses": [1.0, 1.0, 0.99999], "window": 2, "stop": True, "test_description": "stagnating"},
    {"losses": [0.0, 0.0], "window": 1, "stop": True, "test_description": "zero loss"},
]


@pytest.mark.unit
@pytest.mark.parametrize("case", test_data_window, ids=lambda c: c["test_description"])
def test_window_stop(case):
    assert_equals(_window_stop(_history(case["losses"]), case["window"], 1e-4), case["stop"],
                  case["test_description"])


@pytest.mark.unit
def test_architecture_grid_sizes():
    """
    The full grid has 600 candidates once single-layer networks with skip connections are dropped.
    """
    full = ArchitectureGrid.preset("full").candidates()
    assert_equals(len(full), 600, "full grid")
    assert not any(a.layers == 1 and a.skip_connections for a in full)
    desk = ArchitectureGrid.preset("desk").candidates()
    assert_equals(len(desk), 16, "desk grid")
    assert_equals(len({a.label() for a in desk}), 16, "distinct labels")


@pytest.mark.unit
def test_unknown_grid_preset():
    with pytest.raises(ValueError):
        ArchitectureGrid.preset("huge")


@pytest.mark.unit
def test_problem_needs_experiments():
    with pytest.raises(ConfigError):
        DiscoveryProblem([], ObservationSet())


@pytest.mark.unit
def test_run_directory_writes_history_and_checkpoints(tmp_path):
    run_dir = RunDirectory(tmp_path / "run", {"seed": 3})
    run_dir.append(EpochRecord(0, 1.5, 1.0, 0.5, 0.0, 0, 2.0, (3, 4)))
    path = run_dir.checkpoint(default_model("mr"), 0, final=True, status="grad_tol")
    rows = (tmp_path / "run" / "history.csv").read_text(encoding="utf-8").splitlines()
    assert_equals(rows[0], ",".join(HISTORY_COLUMNS), "header")
    assert rows[1].startswith("0,1.5,1,0.5,")
    assert rows[1].endswith("3;4")
    assert_equals(path.name, "final.json", "final checkpoint")
    assert_equals(load_checkpoint(path).kind, "mr", "checkpoint model")
    assert (tmp_path / "run" / "config.yaml").is_file()


@dataclass(frozen=True)
class _StubSolution:
    theta: np.ndarray
    newton_iters: int = 1


class _QuadraticProblem:
    """
    Loss 0.5 |theta - target|^2 standing in for the equilibrium solves. A trial further than radius
    from the last accepted point raises SolveFailure; gradient_sign -1 reports an uphill gradient.
    """

    def __init__(self, target: np.ndarray, radius: float = np.inf, gradient_sign: float = 1.0):
        self.target = target
        self.radius = radius
        self.gradient_sign = gradient_sign

    def evaluate(self, model, warm_starts=None):
        theta = model.parameter_vector()
        if warm_starts is not None and np.linalg.norm(theta - warm_starts[0].theta) > self.radius:
            raise SolveFailure(0, "trial outside the Newton basin")
        misfit = 0.5 * float(np.sum((theta - self.target) ** 2))
        return combine([misfit], [0.0], 0.0), [_StubSolution(theta.copy())]

    def gradient(self, model, solutions):
        return self.gradient_sign * (model.parameter_vector() - self.target)


NH_TRUTH = AnalyticModel("nh", {"C1": 1.0, "K": 1.0})
NH_START = AnalyticModel("nh", {"C1": 1.5, "K": 0.7})

test_data_stalls = [
    {
        "radius": 0.0, "gradient_sign": 1.0, "solve_failures": 6, "rejections": 6,
        "test_description": "every trial fails to reach equilibrium",
    },
    {
        "radius": np.inf, "gradient_sign": -1.0, "solve_failures": 0, "rejections": 0,
        "test_description": "no sufficient decrease",
    },
]


@pytest.fixture(params=test_data_stalls, ids=lambda param: f"{param.get('test_description')}")
def stall_case(request) -> Dict:
    return request.param


@pytest.mark.unit
def test_line_search_without_accepted_step_stalls(tmp_path, stall_case):
    """
    No accepted trial raises TrainingStalled carrying the result reached so far, and the run
    directory still gets its final checkpoint.
    """
    problem = _QuadraticProblem(NH_TRUTH.parameter_vector(), stall_case["radius"], stall_case["gradient_sign"])
    run_dir = RunDirectory(tmp_path / "stalled")
    with pytest.raises(TrainingStalled) as error:
        bfgs_train(NH_START, problem, BfgsOptions(max_trials=6, max_epochs=5), run_dir)

    assert_error_category("solver", error.value)
    assert f"solve_failures={stall_case['solve_failures']}" in str(error.value)
    partial = error.value.partial_result
    assert partial is not None
    assert_equals(partial.status, "stalled", "partial status")
    assert_equals(len(partial.history), 1, "no accepted epoch")
    assert np.array_equal(partial.model.parameter_vector(), NH_START.parameter_vector())
    assert_equals(partial.final_loss, partial.history[0].loss, "loss of the starting point")
    final = tmp_path / "stalled" / "checkpoints" / "final.json"
    assert_equals(checkpoint_metadata(final)["status"], "stalled", "final checkpoint status")


@pytest.mark.unit
def test_failed_trial_is_rejected_and_halved():
    """
    A unit step that leaves the Newton basin is rejected, the halved step is accepted and training
    carries on to the minimiser.
    """
    problem = _QuadraticProblem(NH_TRUTH.parameter_vector(), radius=0.4)
    result = bfgs_train(NH_START, problem, BfgsOptions(max_epochs=10))
    assert_equals(result.history[1].step, 0.5, "accepted step")
    assert_equals(result.history[1].rejections, 1, "rejected trials")
    assert all(b.loss < a.loss for a, b in zip(result.history, result.history[1:]))
    assert_equals(result.status, "grad_tol", "status")
    assert result.final_loss < 1e-20


@pytest.mark.unit
def test_epochs_and_rejections_are_logged(monkeypatch):
    """
    Epoch records carry the loss split, step, rejection count and Newton iterations; rejected
    trials are reported as they happen.
    """
    lines = []
    monkeypatch.setattr(trainer.LOG, "info", lines.append)
    problem = _QuadraticProblem(NH_TRUTH.parameter_vector(), radius=0.4)
    bfgs_train(NH_START, problem, BfgsOptions(max_epochs=1))

    rejected = [line for line in lines if line.startswith("Trial rejected")]
    assert_equals(len(rejected), 1, "rejected trial lines")
    epochs = [line for line in lines if line.startswith("Epoch ")]
    assert_equals(len(epochs), 1, "epoch lines")
    for key in ("epoch=1", "loss=", "disp=", "reac=", "step=5.000000e-01", "rejections=1", "newton=1"):
        assert key in epochs[0], key
    assert hasattr(bfgs_train, "__wrapped__") and hasattr(trainer.multi_seed_train, "__wrapped__")
