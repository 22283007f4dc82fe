"""
Solution files:

    solution <n_free>
    mesh_checksum <sha256>
    load_scale <hex>
    converged <0|1>
    <hex double per line>
"""

from pathlib import Path
from typing import Union

import numpy as np

from fem.solver import EquilibriumSolution
from fem.space import FeSpace
from helpers.exceptions import MalformedDataset


def save_solution(space: FeSpace, solution: EquilibriumSolution, path: Union[str, Path]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"solution {solution.dof_vector.size}",
             f"mesh_checksum {space.mesh.checksum()}",
             f"load_scale {float(solution.load_scale).hex()}",
             f"converged {int(solution.converged)}"]
    lines += [float(v).hex() for v in solution.dof_vector]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_solution(space: FeSpace, path: Union[str, Path]) -> EquilibriumSolution:
    """
    :raises MalformedDataset: on a bad header, a dof count mismatch or a checksum of another mesh.
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    try:
        kind, count = lines[0].split()
        _, checksum = lines[1].split()
        _, load = lines[2].split()
        _, converged = lines[3].split()
        values = np.array([float.fromhex(v) for v in lines[4:] if v.strip()])
    except (IndexError, ValueError) as e:
        raise MalformedDataset(f"Malformed solution file {path}: {e}")
    if kind != "solution" or int(count) != values.size or values.size != space.n_free:
        raise MalformedDataset(f"Solution file {path} does not match the function space")
    if checksum != space.mesh.checksum():
        raise MalformedDataset(f"Solution file {path} was computed on a different mesh")
    return EquilibriumSolution(values, float.fromhex(load), converged == "1", 0, float("nan"))
