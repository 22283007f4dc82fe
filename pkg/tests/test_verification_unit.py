import numpy as np
import pytest

import verification.suites as suites
from helpers.assertions import assert_equals, assert_error_category
from helpers.exceptions import PropertySuiteFailure
from verification.suites import SuiteReport, affine_field, convergence_order, run_suites, suite_architectures

test_data_orders = [
    {"history": [1.0, 1e-2, 1e-4, 1e-8], "expected": 2.0, "test_description": "quadratic"},
    {"history": [1.0, 0.5, 0.25, 0.125], "expected": 1.0, "test_description": "linear"},
    {"history": [1.0, 1e-2, 1e-4, 1e-8, 1e-20], "expected": 2.0, "test_description": "round-off tail dropped"},
]


@pytest.mark.unit
@pytest.mark.parametrize("case", test_data_orders, ids=lambda c: c["test_description"])
def test_convergence_order(case):
    assert_equals(convergence_order(case["history"]), case["expected"], case["test_description"], 1e-12)


@pytest.mark.unit
def test_convergence_order_needs_three_residuals():
    assert convergence_order([1.0, 1e-14]) is None


@pytest.mark.unit
def test_affine_field_scales_with_load():
    field = affine_field(np.diag([1.2, 1.0, 1.0]))
    points = np.array([[1.0, 2.0, 3.0]])
    assert np.allclose(field(points, 1.0), [[0.2, 0.0, 0.0]])
    assert np.allclose(field(points, 0.5), [[0.1, 0.0, 0.0]])


@pytest.mark.unit
def test_suite_architectures_cover_variants():
    archs = suite_architectures()
    assert any(a.skip_connections for a in archs)
    assert any(a.isochoric_inputs for a in archs)
    assert {a.layers for a in archs} == {1, 2, 3}


@pytest.mark.unit
def test_report_collects_failures():
    report = SuiteReport("demo")
    report.add("good", True)
    report.add("bad", False, "worst=1")
    assert not report.passed
    assert_equals([c.name for c in report.failures], ["bad"], "failures")


@pytest.mark.unit
def test_failing_suite_raises_after_all_suites_ran(monkeypatch):
    """
    Every requested suite runs and reports; a failure surfaces afterwards as PropertySuiteFailure.
    """
    def failing():
        report = SuiteReport("fem")
        report.add("affine_solution", False, "rel=1e-3")
        return report

    def passing():
        report = SuiteReport("adjoint")
        report.add("adjoint_gradient_fd", True)
        return report

    monkeypatch.setitem(suites.SUITE_RUNNERS, "constitutive", passing)
    monkeypatch.setitem(suites.SUITE_RUNNERS, "fem", failing)
    monkeypatch.setitem(suites.SUITE_RUNNERS, "adjoint", passing)
    seen = []
    with pytest.raises(PropertySuiteFailure) as error:
        run_suites("all", on_report=seen.append)
    assert_equals(len(seen), 3, "reports delivered")
    assert_error_category("property_suite", error.value)
    assert_equals(error.value.exit_code, 5, "exit code")
    assert "affine_solution" in str(error.value)
