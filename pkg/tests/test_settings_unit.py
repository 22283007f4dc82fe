from typing import Dict

import pytest
import yaml

from config.consts import THREADS_ENV_VAR
from config.settings import build_run_config, derive, load_config_file, load_snapshot, merge, resolve_threads, snapshot
from helpers.assertions import assert_equals, assert_error_category
from helpers.exceptions import ConfigError

test_data_merge = [
    {
        "base": {"a": 1, "b": 2}, "overrides": {"b": 3}, "expected": {"a": 1, "b": 3},
        "test_description": "flat override",
    },
    {
        "base": {"a": 1}, "overrides": {"a": None}, "expected": {"a": 1},
        "test_description": "None keeps the base value",
    },
    {
        "base": {"bfgs": {"window": 50, "c1": 1e-4}}, "overrides": {"bfgs": {"window": 5}},
        "expected": {"bfgs": {"window": 5, "c1": 1e-4}},
        "test_description": "nested override",
    },
]


@pytest.fixture(params=test_data_merge, ids=lambda param: f"{param.get('test_description')}")
def merge_case(request) -> Dict:
    return request.param


@pytest.mark.unit
def test_merge(merge_case):
    assert_equals(merge(merge_case["base"], merge_case["overrides"]), merge_case["expected"],
                  merge_case["test_description"])


@pytest.mark.unit
def test_flag_beats_file_beats_default(tmp_path, monkeypatch):
    """
    CLI flag > config file > built-in default.
    """
    monkeypatch.delenv(THREADS_ENV_VAR, raising=False)
    path = tmp_path / "run.yaml"
    path.write_text("setup: 2\nnoise: 0.05\nn-seeds: 3\nbfgs:\n  max_epochs: 7\n", encoding="utf-8")
    config = build_run_config(path, noise=0.1, material=None)
    assert_equals(config.setup, 2, "from file")
    assert_equals(config.noise, 0.1, "from flag")
    assert_equals(config.n_seeds, 3, "dashed key")
    assert_equals(config.bfgs.max_epochs, 7, "nested option")
    assert_equals(config.material, "mr", "default")
    assert_equals(config.threads, 1, "default threads")


@pytest.mark.unit
def test_threads_from_environment(monkeypatch):
    monkeypatch.setenv(THREADS_ENV_VAR, "4")
    assert_equals(resolve_threads(), 4, "environment")
    assert_equals(resolve_threads(2), 2, "flag wins")
    assert_equals(build_run_config(setup=1).threads, 4, "resolved config")
    monkeypatch.setenv(THREADS_ENV_VAR, "many")
    with pytest.raises(ConfigError):
        resolve_threads()


@pytest.mark.unit
def test_non_positive_threads():
    with pytest.raises(ConfigError):
        resolve_threads(0)


test_data_bad_files = [
    {"content": "setup: [1, 2\n", "test_description": "invalid yaml"},
    {"content": "- 1\n- 2\n", "test_description": "not a mapping"},
    {"content": "setup: 9\n", "test_description": "setup out of range"},
    {"content": "colour: red\n", "test_description": "unknown key"},
    {"content": "grid: desk\narchitecture:\n  layers: 1\n  neurons: [5]\n",
     "test_description": "grid and architecture"},
]


@pytest.mark.unit
@pytest.mark.parametrize("case", test_data_bad_files, ids=lambda c: c["test_description"])
def test_invalid_config_files(tmp_path, case):
    path = tmp_path / "bad.yaml"
    path.write_text(case["content"], encoding="utf-8")
    with pytest.raises(ConfigError) as error:
        build_run_config(path)
    assert_error_category("config", error.value)


@pytest.mark.unit
def test_missing_and_empty_files(tmp_path):
    with pytest.raises(ConfigError):
        load_config_file(tmp_path / "absent.yaml")
    empty = tmp_path / "empty.yaml"
    empty.write_text("", encoding="utf-8")
    assert_equals(load_config_file(empty), {}, "empty file")
    assert_equals(load_config_file(None), {}, "no file")


@pytest.mark.unit
def test_snapshot_reproduces_the_config(tmp_path):
    config = build_run_config(setup=3, architecture={"layers": 2, "neurons": [5, 5], "isochoric_inputs": True},
                              threads=1)
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(snapshot(config)), encoding="utf-8")
    assert load_snapshot(path) == config


@pytest.mark.unit
def test_derive_replaces_fields():
    config = build_run_config(setup=1, threads=1)
    derived = derive(config, noise=0.2, seed=None)
    assert_equals(derived.noise, 0.2, "replaced")
    assert_equals(derived.seed, config.seed, "kept")
    with pytest.raises(ConfigError):
        derive(config, mask="everything")
