import pytest
from click.testing import CliRunner

from config.consts import EXIT_CONFIG_ERROR, EXIT_DATA_FORMAT
from constitutive.analytic import default_model
from constitutive.checkpoint import load_checkpoint, save_checkpoint
from experiments.dataset_io import save_dataset
from helpers.assertions import assert_equals
from main import cli


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.mark.functional
def test_mesh_gen(runner, tmp_path):
    out = tmp_path / "plate.mesh"
    result = runner.invoke(cli, ["mesh", "gen", "--setup", "1", "--h", "0.2", "--out", str(out)])
    assert_equals(result.exit_code, 0, result.output)
    assert out.is_file()
    assert "checksum=" in result.output


test_data_config_errors = [
    {"args": ["simulate", "--out", "sim"], "test_description": "simulate without setup"},
    {"args": ["mesh", "gen", "--setup", "1", "--h", "-1", "--out", "m.mesh"], "test_description": "negative h"},
    {"args": ["--config", "absent.yaml", "mesh", "gen", "--setup", "1", "--out", "m.mesh"],
     "test_description": "missing config file"},
    {"args": ["--threads", "0", "mesh", "gen", "--setup", "1", "--out", "m.mesh"],
     "test_description": "zero threads"},
]


@pytest.mark.functional
@pytest.mark.parametrize("case", test_data_config_errors, ids=lambda c: c["test_description"])
def test_config_errors_exit_with_code_2(runner, tmp_path, monkeypatch, case):
    monkeypatch.chdir(tmp_path)
    result = runner.invoke(cli, case["args"])
    assert_equals(result.exit_code, EXIT_CONFIG_ERROR, case["test_description"])
    assert "error category=config" in result.output


@pytest.mark.functional
def test_missing_artifacts_exit_with_code_4(runner, tmp_path):
    result = runner.invoke(cli, ["analyze", "export", "--run", str(tmp_path)])
    assert_equals(result.exit_code, EXIT_DATA_FORMAT, result.output)
    assert "error category=data_format" in result.output


@pytest.mark.functional
def test_verify_fem_suite(runner):
    result = runner.invoke(cli, ["verify", "properties", "--suite", "fem"])
    assert_equals(result.exit_code, 0, result.output)
    assert "passed=False" not in result.output
    assert "name=tangent_fd" in result.output


@pytest.mark.functional
def test_simulate_dataset_and_stretches(runner, tmp_path):
    """
    simulate -> dataset make -> analyze stretches on a coarse plate with a hole.
    """
    sim = tmp_path / "sim"
    result = runner.invoke(cli, ["simulate", "--setup", "1", "--material", "mr", "--h", "0.25", "--out", str(sim)])
    assert_equals(result.exit_code, 0, result.output)
    assert (sim / "config.yaml").is_file()

    result = runner.invoke(cli, ["dataset", "make", "--from", str(sim), "--mask", "boundary", "--noise", "0.01",
                                 "--seed", "3"])
    assert_equals(result.exit_code, 0, result.output)
    assert (sim / "dataset" / "dataset.json").is_file()

    result = runner.invoke(cli, ["analyze", "stretches", "--run", str(sim)])
    assert_equals(result.exit_code, 0, result.output)
    assert (sim / "stretches.csv").is_file()
    assert "lambda2" in result.output


@pytest.mark.functional
def test_train_writes_best_checkpoint(runner, tmp_path, small_dataset):
    data_dir = tmp_path / "data"
    save_dataset(small_dataset, data_dir)
    arch = tmp_path / "arch.yaml"
    arch.write_text("layers: 1\nneurons: [5]\nsigma_init: 0.1\nw_scale: 10.0\n", encoding="utf-8")
    out = tmp_path / "train"
    result = runner.invoke(cli, ["train", "--dataset", str(data_dir), "--arch-file", str(arch), "--seeds", "1",
                                 "--max-epochs", "2", "--out", str(out)])
    assert_equals(result.exit_code, 0, result.output)
    assert_equals(load_checkpoint(out / "best.json").n_params, 5 * 3 + 5 + 5 + 1, "1x5 network parameters")
    assert (out / "seeds.csv").is_file()
    assert (out / "seed_0" / "history.csv").is_file()


@pytest.mark.functional
def test_train_rejects_grid_with_architecture(runner, tmp_path):
    arch = tmp_path / "arch.yaml"
    arch.write_text("layers: 1\nneurons: [5]\n", encoding="utf-8")
    result = runner.invoke(cli, ["train", "--dataset", str(tmp_path), "--arch-file", str(arch), "--grid", "desk",
                                 "--out", str(tmp_path / "out")])
    assert_equals(result.exit_code, EXIT_CONFIG_ERROR, result.output)


@pytest.mark.functional
def test_evaluate_export_and_sinkhorn(runner, tmp_path):
    """
    Evaluating the ground truth against itself scores zero and produces a complete plot bundle.
    """
    model_path = tmp_path / "mr.json"
    save_checkpoint(default_model("mr"), model_path)
    out = tmp_path / "eval"
    result = runner.invoke(cli, ["evaluate", "--model", str(model_path), "--setup", "1", "--material", "mr",
                                 "--h", "0.25", "--out", str(out)])
    assert_equals(result.exit_code, 0, result.output)
    pooled = (out / "metrics.csv").read_text(encoding="utf-8").splitlines()[1].split(",")
    assert_equals(pooled[0], "all", "pooled row")
    assert float(pooled[-1]) < 1e-6

    result = runner.invoke(cli, ["analyze", "export", "--run", str(out)])
    assert_equals(result.exit_code, 0, result.output)
    assert (out / "plots" / "boxplot_stats.csv").is_file()

    result = runner.invoke(cli, ["analyze", "sinkhorn", "--run", str(out), "--against", str(out),
                                 "--epsilon", "0.01"])
    assert_equals(result.exit_code, 0, result.output)
    assert (out / "sinkhorn.csv").is_file()


@pytest.mark.functional
def test_train_is_deterministic(runner, tmp_path, small_dataset):
    """
    The same dataset, architecture and seed give byte-identical best checkpoints.
    """
    data_dir = tmp_path / "data"
    save_dataset(small_dataset, data_dir)
    arch = tmp_path / "arch.yaml"
    arch.write_text("layers: 1\nneurons: [3]\nsigma_init: 0.1\nw_scale: 10.0\n", encoding="utf-8")
    outputs = []
    for run in ("a", "b"):
        out = tmp_path / run
        result = runner.invoke(cli, ["train", "--dataset", str(data_dir), "--arch-file", str(arch), "--seeds", "1",
                                     "--seed", "2", "--max-epochs", "2", "--out", str(out)])
        assert_equals(result.exit_code, 0, result.output)
        outputs.append((out / "best.json").read_bytes())
    assert outputs[0] == outputs[1]
