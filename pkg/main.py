import csv
from pathlib import Path

import click
import numpy as np
import yaml

from analysis.export import export_plot_data, read_stretches, write_evaluation, write_stretches
from analysis.metrics import evaluate_model
from analysis.sinkhorn import default_epsilon, sinkhorn_divergence
from analysis.stretches import stretch_cloud
from config.consts import NOISE_LEVELS, SINKHORN_MAX_SAMPLES
from config.logging_config import format_record, set_verbosity, setup_logger
from config.settings import build_run_config, derive, load_config_file, load_snapshot, resolve_threads, snapshot
from constitutive.analytic import default_model
from constitutive.checkpoint import load_checkpoint, save_checkpoint
from constitutive.initialization import preset_architecture
from discovery.loss import DiscoveryProblem
from discovery.trainer import ArchitectureGrid, grid_search, multi_seed_train
from experiments.dataset_io import load_dataset, save_dataset
from experiments.setups import build_setup, mesh_size
from experiments.simulation_io import load_simulation, save_simulation
from experiments.synthetic import ObservationMask, SyntheticDataset, observe, solve_experiments, training_experiments
from helpers.decorators import exit_on_domain_error
from helpers.exceptions import ConfigError
from mesh.generators import generate_mesh
from mesh.io import save_mesh
from mesh.quality import mesh_quality
from models.architecture_model import HnnArchitecture
from models.geometry_model import GeometrySpec
from verification.suites import SUITES, run_suites

LOG = setup_logger(__name__)


def _config(ctx: click.Context, **overrides):
    """Resolved run configuration: flags of this command over the --config file over defaults."""
    return build_run_config(ctx.obj["config_path"], threads=ctx.obj["threads"], **overrides)


def _write_snapshot(directory: Path, config):
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "config.yaml", "w", encoding="utf-8") as f:
        yaml.safe_dump(snapshot(config), f, sort_keys=True)


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="YAML file with defaults for the command flags.")
@click.option("--threads", type=int, default=None, help="Worker threads; overrides HYPERDISC_THREADS.")
@click.option("--verbose", is_flag=True, help="Debug logging.")
@click.pass_context
def cli(ctx, config_path, threads, verbose):
    """Hyperelastic law discovery with a differentiable finite-element solver."""
    set_verbosity(verbose)
    ctx.obj = {"config_path": config_path, "threads": threads}


# Mesh generation
@cli.group()
def mesh():
    """Specimen meshes."""


@mesh.command("gen")
@click.option("--setup", type=int, required=True)
@click.option("--h", "h", type=float, default=None, help="Element size (default: resolution preset).")
@click.option("--seed", type=int, default=None)
@click.option("--geometry", type=int, default=0, help="Geometry index within the random-hole family.")
@click.option("--desk/--full", default=None, help="Resolution preset when --h is not given.")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.pass_context
@exit_on_domain_error
def mesh_gen(ctx, setup, h, seed, geometry, desk, out):
    """
    Generate and save the mesh of one specimen.
    """
    config = _config(ctx, setup=setup, h=h, seed=seed, desk=desk, out=out)
    spec = GeometrySpec(setup_id=config.setup, seed=config.seed, geometry_index=geometry)
    result = generate_mesh(spec, config.h or mesh_size(config.setup, config.desk))
    save_mesh(result, out)
    report = mesh_quality(result)
    click.echo(format_record("mesh", path=out, nodes=result.n_nodes, cells=result.n_cells,
                             checksum=result.checksum(), min_angle_deg=report.min_angle_deg))


# Forward simulation and datasets
@cli.command()
@click.option("--setup", type=int, default=None)
@click.option("--material", type=click.Choice(["ih", "mr", "fu", "nh"]), default=None)
@click.option("--h", "h", type=float, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--desk/--full", default=None)
@click.option("--out", type=click.Path(file_okay=False), default=None)
@click.pass_context
@exit_on_domain_error
def simulate(ctx, setup, material, h, seed, desk, out):
    """
    Solve every experiment of a setup with a ground-truth law; writes meshes, solutions and reactions.
    """
    config = _config(ctx, setup=setup, material=material, h=h, seed=seed, desk=desk, out=out)
    if config.setup is None or config.out is None:
        raise ConfigError("simulate needs --setup and --out")
    model = default_model(config.material)
    experiments = build_setup(config.setup, config.desk, config.seed, config.h)
    solutions = solve_experiments(experiments, model, config.threads, config.continuation, config.newton)
    out_dir = Path(config.out)
    _write_snapshot(out_dir, config)
    save_simulation(experiments, solutions, model, out_dir)
    click.echo(format_record("simulate", setup=config.setup, material=config.material,
                             experiments=len(experiments), out=str(out_dir)))


@cli.group()
def dataset():
    """Observation datasets."""


@dataset.command("make")
@click.option("--from", "source", type=click.Path(file_okay=False, exists=True), required=True,
              help="Directory written by simulate.")
@click.option("--mask", type=click.Choice([ObservationMask.FULL_FIELD.value, ObservationMask.BOUNDARY_ONLY.value]),
              default=None)
@click.option("--noise", type=float, default=None,
              help=f"Noise level; the robustness study uses {', '.join(f'{s:g}' for s in NOISE_LEVELS)}.")
@click.option("--seed", type=int, default=None, help="Seed of the measurement noise.")
@click.option("--out", type=click.Path(file_okay=False), default=None)
@click.pass_context
@exit_on_domain_error
def dataset_make(ctx, source, mask, noise, seed, out):
    """
    Sample noisy observations from a forward simulation.
    """
    sim_config = load_snapshot(Path(source) / "config.yaml")
    config = derive(sim_config, mask=mask, noise=noise, seed=seed, out=out or str(Path(source) / "dataset"),
                    threads=resolve_threads(ctx.obj["threads"]))
    experiments, solutions = load_simulation(source, sim_config)
    model = default_model(sim_config.material)
    observations = observe(experiments, solutions, model, ObservationMask(config.mask), config.noise, config.seed)
    data = SyntheticDataset(experiments, solutions, observations, sim_config.material, config.noise,
                            config.seed, ObservationMask(config.mask), sim_config.seed, sim_config.desk)
    path = save_dataset(data, config.out)
    click.echo(format_record("dataset", path=str(path), points=observations.n_points,
                             reactions=len(observations.reactions), noise=float(config.noise), mask=config.mask))


# Training
def _architecture(arch_file, dim: int, material: str) -> HnnArchitecture:
    if arch_file is None:
        return preset_architecture(dim, material)
    try:
        return HnnArchitecture.model_validate(load_config_file(arch_file))
    except ValueError as e:
        raise ConfigError(f"Architecture file {arch_file} is invalid: {e}")


def _write_seed_table(path: Path, rows, header):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)


@cli.command()
@click.option("--dataset", "dataset_path", type=click.Path(exists=True), required=True)
@click.option("--arch-file", type=click.Path(dir_okay=False, exists=True), default=None)
@click.option("--grid", type=click.Choice(["full", "desk"]), default=None)
@click.option("--seeds", "n_seeds", type=int, default=None)
@click.option("--seed", type=int, default=None, help="First initialisation seed.")
@click.option("--train-h", type=float, default=None, help="Train on a re-meshed setup of this element size.")
@click.option("--max-epochs", type=int, default=None)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.pass_context
@exit_on_domain_error
def train(ctx, dataset_path, arch_file, grid, n_seeds, seed, train_h, max_epochs, out):
    """
    Discover a network law from a dataset: one architecture over several seeds, or a grid search.
    """
    if arch_file is not None and grid is not None:
        raise ConfigError("Give either --arch-file or --grid")
    data = load_dataset(dataset_path)
    bfgs = {"max_epochs": max_epochs} if max_epochs is not None else None
    config = _config(ctx, setup=data.setup_id, material=data.ground_truth if data.ground_truth != "custom"
                     else None, grid=grid, n_seeds=n_seeds, seed=seed, train_h=train_h, out=out,
                     bfgs=bfgs, noise=data.noise_sigma, mask=data.mask.value)
    experiments = training_experiments(data, config.train_h)
    problem = DiscoveryProblem(experiments, data.observations, config.newton, config.continuation, config.threads)
    out_dir = Path(config.out)
    options = config.bfgs.model_copy(update={"threads": config.threads})

    if config.grid is not None:
        best, entries = grid_search(ArchitectureGrid.preset(config.grid), problem, config.n_seeds, config.seed,
                                    options)
        _write_snapshot(out_dir, config.model_copy(update={"architecture": best.architecture, "grid": None}))
        _write_seed_table(out_dir / "grid.csv", [[e.architecture.label(), f"{e.loss:.17g}", e.status]
                                                 for e in entries], ["architecture", "loss", "status"])
        result = best.result
    else:
        arch = config.architecture if arch_file is None and config.architecture is not None \
            else _architecture(arch_file, experiments[0].mesh.dim, config.material)
        config = config.model_copy(update={"architecture": arch})
        _write_snapshot(out_dir, config)
        result, summaries = multi_seed_train(arch, problem, config.n_seeds, config.seed, options,
                                             run_root=str(out_dir))
        _write_seed_table(out_dir / "seeds.csv", [[s.seed, f"{s.loss:.17g}", s.status] for s in summaries],
                          ["seed", "loss", "status"])
    best_path = out_dir / "best.json"
    save_checkpoint(result.model, best_path, {"loss": result.final_loss.hex(), "status": result.status,
                                              "seed": str(result.seed)})
    click.echo(format_record("train", loss=result.final_loss, status=result.status, seed=result.seed,
                             checkpoint=str(best_path)))


# Evaluation and analysis
@cli.command()
@click.option("--model", "model_path", type=click.Path(dir_okay=False, exists=True), required=True)
@click.option("--setup", type=int, default=None)
@click.option("--material", type=click.Choice(["ih", "mr", "fu", "nh"]), default=None,
              help="Ground truth of the test setup.")
@click.option("--h", "h", type=float, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--desk/--full", default=None)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.pass_context
@exit_on_domain_error
def evaluate(ctx, model_path, setup, material, h, seed, desk, out):
    """
    Forward-solve a test setup with a trained law and compare it with the ground truth.
    """
    config = _config(ctx, setup=setup, material=material, h=h, seed=seed, desk=desk, out=out)
    if config.setup is None:
        raise ConfigError("evaluate needs --setup")
    model = load_checkpoint(model_path)
    ground_truth = default_model(config.material)
    experiments = build_setup(config.setup, config.desk, config.seed, config.h)
    evaluation = evaluate_model(model, ground_truth, experiments, config.threads)
    out_dir = Path(config.out)
    _write_snapshot(out_dir, config)
    write_evaluation(evaluation, out_dir)
    write_stretches(stretch_cloud(experiments, evaluation.reference_solutions), out_dir)
    click.echo(format_record("evaluate", vrmse=evaluation.report.vrmse, rmse=evaluation.report.rmse,
                             out=str(out_dir)))
    for load, value in sorted(evaluation.report.per_load.items()):
        click.echo(format_record("load", value=float(load), vrmse=value))


@cli.group()
def analyze():
    """Stretch distributions, distribution shift and plot data."""


@analyze.command("stretches")
@click.option("--run", "run_dir", type=click.Path(file_okay=False, exists=True), required=True,
              help="Directory written by simulate.")
@click.option("--max-samples", type=int, default=None)
@exit_on_domain_error
def analyze_stretches(run_dir, max_samples):
    """
    Principal-stretch cloud of a forward simulation, written to stretches.csv.
    """
    config = load_snapshot(Path(run_dir) / "config.yaml")
    experiments, solutions = load_simulation(run_dir, config)
    cloud = stretch_cloud(experiments, solutions, max_samples, config.seed)
    path = write_stretches(cloud, run_dir)
    quartiles = np.percentile(cloud.samples, [25.0, 50.0, 75.0], axis=0)
    click.echo(format_record("stretches", samples=len(cloud), path=str(path)))
    for k in range(cloud.samples.shape[1]):
        click.echo(format_record(f"lambda{k + 1}", q1=float(quartiles[0, k]), median=float(quartiles[1, k]),
                                 q3=float(quartiles[2, k])))


@analyze.command("sinkhorn")
@click.option("--run", "run_dir", type=click.Path(file_okay=False, exists=True), required=True)
@click.option("--against", type=click.Path(file_okay=False, exists=True), required=True,
              help="Directory holding the reference stretch cloud.")
@click.option("--epsilon", type=float, default=None)
@click.option("--max-samples", type=int, default=SINKHORN_MAX_SAMPLES)
@click.option("--seed", type=int, default=0)
@click.pass_context
@exit_on_domain_error
def analyze_sinkhorn(ctx, run_dir, against, epsilon, max_samples, seed):
    """
    Debiased Sinkhorn divergence between the stretch clouds of two runs; appended to sinkhorn.csv.
    """
    options = _config(ctx).sinkhorn
    a = read_stretches(Path(run_dir) / "stretches.csv").samples
    b = read_stretches(Path(against) / "stretches.csv").samples
    eps = epsilon if epsilon is not None else options.epsilon if options.epsilon is not None \
        else default_epsilon(a, b)
    value = sinkhorn_divergence(a, b, eps, options.max_iters, options.tol, max_samples, seed)
    path = Path(run_dir) / "sinkhorn.csv"
    new = not path.exists()
    with open(path, "a", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        if new:
            writer.writerow(["against", "epsilon", "divergence"])
        writer.writerow([str(against), f"{eps:.17g}", f"{value:.17g}"])
    click.echo(format_record("sinkhorn", divergence=value, epsilon=float(eps)))


@analyze.command("export")
@click.option("--run", "run_dir", type=click.Path(file_okay=False, exists=True), required=True,
              help="Directory written by evaluate.")
@exit_on_domain_error
def analyze_export(run_dir):
    """
    CSV and SVG plot bundle of an evaluation.
    """
    plots = export_plot_data(run_dir)
    click.echo(format_record("export", path=str(plots)))


# Property suites
@cli.group()
def verify():
    """Numerical property suites."""


@verify.command("properties")
@click.option("--suite", type=click.Choice(list(SUITES) + ["all"]), default="all")
@exit_on_domain_error
def verify_properties(suite):
    """
    Run the property suites; exits with code 5 when a check fails.
    """
    def echo(report):
        for check in report.checks:
            click.echo(format_record("check", suite=report.suite, name=check.name, passed=check.passed,
                                     detail=check.detail))

    run_suites(suite, on_report=echo)


if __name__ == "__main__":
    cli()
