"""
Forward-simulation directories written by `simulate`:
  config.yaml              resolved run configuration
  experiments.csv          index,geometry,load,mesh_file,solution_file
  reactions.csv            experiment,load,tag,reaction
  meshes/geom_<g>.mesh
  solutions/exp_<i>.sol
"""

import csv
from pathlib import Path
from typing import Dict, List, Tuple, Union

from config.logging_config import format_record, setup_logger
from constitutive.base import ConstitutiveModel
from experiments.setups import Experiment, instantiate, setup_definition
from fem.reactions import reaction_force
from fem.solution_io import load_solution, save_solution
from fem.solver import EquilibriumSolution
from helpers.exceptions import MalformedDataset, MalformedMeshFile, MissingArtifacts
from mesh.io import load_mesh, save_mesh
from models.run_config_model import RunConfig

LOG = setup_logger(__name__)

EXPERIMENTS_HEADER = ["index", "geometry", "load", "mesh_file", "solution_file"]
REACTIONS_HEADER = ["experiment", "load", "tag", "reaction"]


def save_simulation(experiments: List[Experiment], solutions: List[EquilibriumSolution],
                    model: ConstitutiveModel, directory: Union[str, Path]) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    mesh_files: Dict[int, str] = {}
    rows, reaction_rows = [], []
    for experiment, solution in zip(experiments, solutions):
        g = experiment.geometry.geometry_index
        if g not in mesh_files:
            mesh_files[g] = f"meshes/geom_{g}.mesh"
            save_mesh(experiment.mesh, directory / mesh_files[g])
        solution_file = f"solutions/exp_{experiment.index:04d}.sol"
        save_solution(experiment.space, solution, directory / solution_file)
        rows.append([experiment.index, g, float(experiment.load_value).hex(), mesh_files[g], solution_file])
        for tag in experiment.bc.dirichlet_tags():
            reaction = reaction_force(experiment.space, model, solution, tag)
            reaction_rows.append([experiment.index, f"{experiment.load_value:.17g}", tag, f"{reaction:.17g}"])
    for name, header, body in (("experiments.csv", EXPERIMENTS_HEADER, rows),
                               ("reactions.csv", REACTIONS_HEADER, reaction_rows)):
        with open(directory / name, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(header)
            writer.writerows(body)
    LOG.info(format_record("Saved simulation", path=str(directory), experiments=len(experiments)))
    return directory


def load_simulation(directory: Union[str, Path], config: RunConfig) -> Tuple[List[Experiment],
                                                                              List[EquilibriumSolution]]:
    """
    Rebuild the experiments of a simulation directory on its stored meshes and read their solutions.

    :raises MissingArtifacts: when the directory lacks the experiment table.
    :raises MalformedDataset: when meshes, solutions or the table do not match the configuration.
    """
    directory = Path(directory)
    table = directory / "experiments.csv"
    if not table.is_file():
        raise MissingArtifacts(f"{directory} is not a simulation directory (no experiments.csv)")
    with open(table, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    try:
        meshes = {int(r["geometry"]): load_mesh(directory / r["mesh_file"]) for r in rows}
        loads = tuple(dict.fromkeys(float.fromhex(r["load"]) for r in rows))
    except (MalformedMeshFile, KeyError, ValueError) as e:
        raise MalformedDataset(f"Simulation {directory} is unreadable: {e}")
    definition = setup_definition(config.setup, config.desk, config.seed, config.h, loads)
    experiments = instantiate(definition, meshes)
    if len(experiments) != len(rows):
        raise MalformedDataset(f"Simulation {directory} lists {len(rows)} experiments, configuration "
                               f"gives {len(experiments)}")
    solutions = [load_solution(e.space, directory / r["solution_file"]) for e, r in zip(experiments, rows)]
    return experiments, solutions
