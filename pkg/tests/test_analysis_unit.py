from typing import Dict

import numpy as np
import pytest

from analysis.export import export_plot_data, read_stretches, stretch_header, write_stretches
from analysis.metrics import boxplot_stats, normalized_errors, normalized_reaction_errors, vrmse
from analysis.sinkhorn import default_epsilon, sinkhorn_divergence
from analysis.stretches import StretchCloud
from helpers.assertions import assert_equals, assert_error_category
from helpers.exceptions import DegenerateVariance, MissingArtifacts, NoConvergence

REFERENCE = np.random.default_rng(1).standard_normal((40, 2))

test_data_vrmse = [
    {"predicted": REFERENCE, "expected": 0.0, "test_description": "perfect prediction"},
    {"predicted": np.broadcast_to(REFERENCE.mean(axis=0), REFERENCE.shape), "expected": 1.0,
     "test_description": "reference mean"},
]


@pytest.fixture(params=test_data_vrmse, ids=lambda param: f"{param.get('test_description')}")
def vrmse_case(request) -> Dict:
    return request.param


@pytest.mark.unit
def test_vrmse_anchors(vrmse_case):
    """
    vRMSE is 0 for a perfect prediction and 1 for predicting the mean of the reference.
    """
    report = vrmse(vrmse_case["predicted"], REFERENCE)
    assert_equals(report.vrmse + 1.0, vrmse_case["expected"] + 1.0, vrmse_case["test_description"], 1e-12)


@pytest.mark.unit
def test_vrmse_two_points():
    """
    Reference vectors (0,0) and (2,0): Var = 1; predicting (1,0) twice gives RMSE = 1 and vRMSE = 1.
    """
    report = vrmse([[1.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [2.0, 0.0]])
    assert_equals(report.variance, 1.0, "variance")
    assert_equals(report.rmse, 1.0, "rmse")
    assert_equals(report.vrmse, 1.0, "vrmse")


@pytest.mark.unit
def test_vrmse_ignores_a_common_translation():
    predicted = REFERENCE + 0.1 * np.random.default_rng(2).standard_normal(REFERENCE.shape)
    shift = np.array([5.0, -3.0])
    assert_equals(vrmse(predicted + shift, REFERENCE + shift).vrmse, vrmse(predicted, REFERENCE).vrmse,
                  "translated", 1e-10)


@pytest.mark.unit
def test_vrmse_rejects_constant_reference():
    with pytest.raises(DegenerateVariance) as error:
        vrmse(np.zeros((3, 2)), np.ones((3, 2)))
    assert_error_category("data_format", error.value)
    with pytest.raises(DegenerateVariance):
        normalized_reaction_errors([1.0, 2.0], [3.0, 3.0])


@pytest.mark.unit
def test_vrmse_rejects_misaligned_sets():
    with pytest.raises(ValueError):
        vrmse(np.zeros((3, 2)), np.zeros((4, 2)))


@pytest.mark.unit
def test_normalized_errors_match_vrmse():
    predicted = REFERENCE + 0.2
    errors = normalized_errors(predicted, REFERENCE)
    assert_equals(float(np.sqrt(np.mean(errors ** 2))), vrmse(predicted, REFERENCE).vrmse, "rms of errors", 1e-12)


@pytest.mark.unit
def test_boxplot_stats():
    values = np.append(np.arange(1.0, 10.0), 100.0)
    stats = boxplot_stats(values)
    q1, median, q3 = np.percentile(values, [25, 50, 75])
    assert_equals(stats["q1"], q1, "q1")
    assert_equals(stats["median"], median, "median")
    assert_equals(stats["q3"], q3, "q3")
    assert_equals(stats["whisker_low"], 1.0, "low whisker")
    assert_equals(stats["whisker_high"], 9.0, "high whisker")
    assert_equals(stats["outliers"], 1.0, "outliers")


@pytest.mark.unit
def test_sinkhorn_of_a_cloud_with_itself_vanishes():
    cloud = 1.0 + 0.1 * np.random.default_rng(3).standard_normal((30, 2))
    assert sinkhorn_divergence(cloud, cloud, 0.01) < 1e-12


@pytest.mark.unit
def test_sinkhorn_is_symmetric():
    rng = np.random.default_rng(4)
    a = 1.0 + 0.1 * rng.standard_normal((25, 2))
    b = 1.1 + 0.1 * rng.standard_normal((35, 2))
    forward, backward = sinkhorn_divergence(a, b, 0.01), sinkhorn_divergence(b, a, 0.01)
    assert forward > 0
    assert_equals(forward, backward, "symmetry", 1e-6)


@pytest.mark.unit
def test_sinkhorn_between_point_masses_is_squared_distance():
    a = np.array([[1.0, 1.0]])
    b = np.array([[1.3, 0.9]])
    assert_equals(sinkhorn_divergence(a, b), 0.1, "squared distance", 1e-8)


@pytest.mark.unit
def test_default_epsilon_scales_with_spread():
    """
    Two point masses at distance d have a pooled mean squared pairwise distance of d^2 / 2.
    """
    assert_equals(default_epsilon(np.zeros((1, 2)), np.array([[3.0, 4.0]])), 0.01 * 12.5, "epsilon", 1e-12)
    assert default_epsilon(np.ones((2, 2)), np.ones((3, 2))) > 0


@pytest.mark.unit
def test_sinkhorn_reports_unconverged_iterations():
    """
    A single sweep at a small epsilon leaves the column marginal off; the divergence is refused.
    """
    rng = np.random.default_rng(7)
    a = rng.normal(1.0, 0.1, size=(20, 2))
    b = rng.normal(1.3, 0.2, size=(15, 2))
    with pytest.raises(NoConvergence) as error:
        sinkhorn_divergence(a, b, epsilon=1e-3, max_iters=1)
    assert_error_category("solver", error.value)
    assert error.value.last_error > 0.0


@pytest.mark.unit
def test_sinkhorn_rejects_mixed_dimensions():
    with pytest.raises(ValueError):
        sinkhorn_divergence(np.ones((3, 2)), np.ones((3, 3)))


@pytest.mark.unit
def test_stretch_cloud_subsample_is_seeded():
    cloud = StretchCloud(np.arange(20.0).reshape(10, 2), np.ones(10))
    a, b = cloud.subsample(4, seed=1), cloud.subsample(4, seed=1)
    assert_equals(len(a), 4, "size")
    assert np.array_equal(a.samples, b.samples)
    assert np.all(np.diff(a.samples[:, 0]) > 0)
    assert cloud.subsample(50) is cloud
    assert_equals(float(cloud.weights.sum()), 1.0, "uniform weights")


@pytest.mark.unit
def test_stretch_table_round_trip(tmp_path):
    cloud = StretchCloud(np.array([[1.2, 0.9, 0.95], [1.1, 1.0, 0.9]]), np.array([1.026, 0.99]))
    path = write_stretches(cloud, tmp_path)
    assert_equals(path.read_text(encoding="utf-8").splitlines()[0], ",".join(stretch_header(3)), "header")
    restored = read_stretches(path)
    assert np.array_equal(restored.samples, cloud.samples)
    assert np.array_equal(restored.jacobians, cloud.jacobians)


@pytest.mark.unit
def test_plot_export_needs_an_evaluation(tmp_path):
    with pytest.raises(MissingArtifacts) as error:
        export_plot_data(tmp_path)
    assert "reactions.csv" in str(error.value)
