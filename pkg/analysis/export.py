"""
CSV artefacts of evaluation runs and the plot bundles derived from them.

Evaluation directory layout:
  metrics.csv               scope,load,rmse,variance,vrmse
  reactions.csv             load,tag,predicted,reference,relative_error
  displacement_errors.csv   load,node,normalized_error
  stretches.csv             lambda1,lambda2[,lambda3],jacobian
Plot bundle (plots/):
  load_reaction.csv         tag,load,predicted,reference
  boxplot_stats.csv         load,n,q1,median,q3,whisker_low,whisker_high,outliers
  stretch_scatter.csv       copy of the stretch samples
  canonical_curves.csv      kind,delta,lambda1,lambda2
  *.svg                     renderings of the above
"""

import csv
from collections import defaultdict
from pathlib import Path
from typing import Dict, List, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from analysis.metrics import Evaluation, boxplot_stats, normalized_errors  # noqa: E402
from analysis.stretches import StretchCloud  # noqa: E402
from config.logging_config import setup_logger  # noqa: E402
from helpers.exceptions import MissingArtifacts  # noqa: E402
from kinematics.canonical import canonical_curves  # noqa: E402

LOG = setup_logger(__name__)

METRICS_HEADER = ["scope", "load", "rmse", "variance", "vrmse"]
REACTIONS_HEADER = ["load", "tag", "predicted", "reference", "relative_error"]
ERRORS_HEADER = ["load", "node", "normalized_error"]
LOAD_REACTION_HEADER = ["tag", "load", "predicted", "reference"]
BOXPLOT_HEADER = ["load", "n", "q1", "median", "q3", "whisker_low", "whisker_high", "outliers"]
CANONICAL_HEADER = ["kind", "delta", "lambda1", "lambda2"]


def _write_rows(path: Path, header: List[str], rows) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _read_rows(path: Path) -> List[Dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def stretch_header(n_components: int) -> List[str]:
    return [f"lambda{i + 1}" for i in range(n_components)] + ["jacobian"]


def write_evaluation(evaluation: Evaluation, out_dir: Union[str, Path]) -> Path:
    """Write the metric, reaction and normalised-error tables of an evaluation."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = evaluation.report
    metric_rows = [["all", "", _fmt(report.rmse), _fmt(report.variance), _fmt(report.vrmse)]]
    metric_rows += [["load", _fmt(load), "", "", _fmt(value)] for load, value in sorted(report.per_load.items())]
    _write_rows(out / "metrics.csv", METRICS_HEADER, metric_rows)
    _write_rows(out / "reactions.csv", REACTIONS_HEADER,
                [[_fmt(load), tag, _fmt(p), _fmt(r), _fmt(report.reaction_errors[(load, tag)])]
                 for load, tag, p, r in evaluation.reactions])
    # errors are normalised by the pooled spread so boxes of different loads share one scale
    pooled = normalized_errors(np.concatenate(evaluation.predicted), np.concatenate(evaluation.reference))
    rows, start = [], 0
    for load, field in zip(evaluation.loads, evaluation.predicted):
        rows += [[_fmt(load), node, _fmt(e)] for node, e in enumerate(pooled[start:start + len(field)])]
        start += len(field)
    _write_rows(out / "displacement_errors.csv", ERRORS_HEADER, rows)
    LOG.info(f"Evaluation tables written to {out}")
    return out


def write_stretches(cloud: StretchCloud, out_dir: Union[str, Path]) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [[_fmt(v) for v in sample] + [_fmt(j)] for sample, j in zip(cloud.samples, cloud.jacobians)]
    return _write_rows(out / "stretches.csv", stretch_header(cloud.samples.shape[1]), rows)


def read_stretches(path: Union[str, Path]) -> StretchCloud:
    rows = _read_rows(Path(path))
    if not rows:
        raise MissingArtifacts(f"No stretch samples in {path}")
    keys = [k for k in rows[0] if k.startswith("lambda")]
    samples = np.array([[float(r[k]) for k in keys] for r in rows])
    return StretchCloud(samples, np.array([float(r["jacobian"]) for r in rows]))


def _load_reaction_bundle(run: Path, plots: Path):
    rows = _read_rows(run / "reactions.csv")
    curves = defaultdict(list)
    for r in rows:
        curves[r["tag"]].append((float(r["load"]), float(r["predicted"]), float(r["reference"])))
    out_rows = []
    fig, ax = plt.subplots(figsize=(5, 4))
    for tag, points in sorted(curves.items()):
        points.sort()
        out_rows += [[tag, _fmt(x), _fmt(p), _fmt(r)] for x, p, r in points]
        loads, pred, ref = (np.array(c) for c in zip(*points))
        ax.plot(loads, ref, "k-", marker="o", label=f"{tag} reference")
        ax.plot(loads, pred, "--", marker="x", label=f"{tag} model")
    ax.set_xlabel("load")
    ax.set_ylabel("reaction")
    ax.legend(fontsize="small")
    fig.savefig(plots / "load_reaction.svg", format="svg")
    plt.close(fig)
    _write_rows(plots / "load_reaction.csv", LOAD_REACTION_HEADER, out_rows)


def _boxplot_bundle(run: Path, plots: Path):
    groups = defaultdict(list)
    for r in _read_rows(run / "displacement_errors.csv"):
        groups[float(r["load"])].append(float(r["normalized_error"]))
    loads = sorted(groups)
    stats = [boxplot_stats(groups[load]) for load in loads]
    _write_rows(plots / "boxplot_stats.csv", BOXPLOT_HEADER,
                [[_fmt(load)] + [_fmt(s[k]) for k in BOXPLOT_HEADER[1:]] for load, s in zip(loads, stats)])
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.bxp([{"med": s["median"], "q1": s["q1"], "q3": s["q3"], "whislo": s["whisker_low"],
             "whishi": s["whisker_high"], "fliers": [], "label": f"{load:g}"} for load, s in zip(loads, stats)],
           showfliers=False)
    ax.set_xlabel("load")
    ax.set_ylabel("normalised error")
    fig.savefig(plots / "boxplot.svg", format="svg")
    plt.close(fig)


def _stretch_bundle(run: Path, plots: Path, n_points: int):
    curves = canonical_curves(n_points)
    _write_rows(plots / "canonical_curves.csv", CANONICAL_HEADER,
                [[kind] + [_fmt(v) for v in row] for kind, data in curves.items() for row in data])
    fig, ax = plt.subplots(figsize=(5, 5))
    path = run / "stretches.csv"
    if path.exists():
        cloud = read_stretches(path)
        write_stretches(cloud, plots).rename(plots / "stretch_scatter.csv")
        ax.scatter(cloud.samples[:, 0], cloud.samples[:, 1], s=2, alpha=0.3, label="cells")
    for kind, data in curves.items():
        ax.plot(data[:, 1], data[:, 2], label=kind)
    ax.set_xlabel("lambda1")
    ax.set_ylabel("lambda2")
    ax.legend(fontsize="small")
    fig.savefig(plots / "stretches.svg", format="svg")
    plt.close(fig)


def export_plot_data(run_dir: Union[str, Path], n_points: int = 51) -> Path:
    """
    Build the plot bundle of an evaluation directory under <run_dir>/plots.

    :raises MissingArtifacts: when the reaction or error tables are missing.
    """
    run = Path(run_dir)
    missing = [name for name in ("reactions.csv", "displacement_errors.csv") if not (run / name).exists()]
    if missing:
        raise MissingArtifacts(f"{run} lacks {', '.join(missing)}; run evaluate first")
    plots = run / "plots"
    plots.mkdir(exist_ok=True)
    _load_reaction_bundle(run, plots)
    _boxplot_bundle(run, plots)
    _stretch_bundle(run, plots, n_points)
    LOG.info(f"Plot data exported to {plots}")
    return plots
