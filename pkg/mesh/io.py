"""
Line-oriented mesh files:

    mesh <dim> <n_nodes> <n_cells> <n_bfacets>
    v <x> <y> [<z>]
    c <i0> <i1> <i2> [<i3>]
    b <tag_name> <i0> <i1> [<i2>]

'#' starts a comment. Coordinates are written with repr() so they round-trip exactly.
"""

from pathlib import Path
from typing import List, Union

import numpy as np

from helpers.exceptions import MalformedMeshFile
from mesh.mesh import Mesh


def mesh_to_text(mesh: Mesh) -> str:
    lines = [f"mesh {mesh.dim} {mesh.n_nodes} {mesh.n_cells} {mesh.facets.shape[0]}"]
    lines += ["v " + " ".join(repr(float(c)) for c in node) for node in mesh.nodes]
    lines += ["c " + " ".join(str(int(i)) for i in cell) for cell in mesh.cells]
    lines += [f"b {tag} " + " ".join(str(int(i)) for i in facet) for facet, tag in zip(mesh.facets, mesh.facet_tags)]
    return "\n".join(lines) + "\n"


def save_mesh(mesh: Mesh, path: Union[str, Path]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(mesh_to_text(mesh))


def _records(text: str):
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield number, line.split()


def parse_mesh(text: str) -> Mesh:
    """
    Parse mesh text.

    :raises MalformedMeshFile: with the offending line number and field.
    """
    records = list(_records(text))
    if not records or records[0][1][0] != "mesh":
        raise MalformedMeshFile("Missing 'mesh' header", line=records[0][0] if records else 1, field="mesh")
    header_line, header = records[0]
    if len(header) != 5:
        raise MalformedMeshFile("Header needs dim and three counts", line=header_line, field="mesh")
    try:
        dim, n_nodes, n_cells, n_facets = (int(v) for v in header[1:])
    except ValueError:
        raise MalformedMeshFile("Header counts must be integers", line=header_line, field="mesh")
    if dim not in (2, 3) or min(n_nodes, n_cells, n_facets) < 0:
        raise MalformedMeshFile(f"Invalid header values {header[1:]}", line=header_line, field="mesh")

    nodes: List[List[float]] = []
    cells: List[List[int]] = []
    facets: List[List[int]] = []
    tags: List[str] = []
    for number, fields in records[1:]:
        kind = fields[0]
        try:
            if kind == "v":
                if len(fields) != dim + 1:
                    raise MalformedMeshFile(f"Vertex needs {dim} coordinates", line=number, field="v")
                nodes.append([float(v) for v in fields[1:]])
            elif kind == "c":
                if len(fields) != dim + 2:
                    raise MalformedMeshFile(f"Cell needs {dim + 1} indices", line=number, field="c")
                cell = [int(v) for v in fields[1:]]
                if min(cell) < 0 or max(cell) >= n_nodes:
                    raise MalformedMeshFile(f"Node index out of range 0..{n_nodes - 1}", line=number, field="c")
                cells.append(cell)
            elif kind == "b":
                if len(fields) != dim + 2:
                    raise MalformedMeshFile(f"Boundary facet needs a tag and {dim} indices", line=number, field="b")
                facet = [int(v) for v in fields[2:]]
                if min(facet) < 0 or max(facet) >= n_nodes:
                    raise MalformedMeshFile(f"Node index out of range 0..{n_nodes - 1}", line=number, field="b")
                tags.append(fields[1])
                facets.append(facet)
            else:
                raise MalformedMeshFile(f"Unknown record '{kind}'", line=number, field=kind)
        except ValueError as e:
            raise MalformedMeshFile(f"Cannot parse number: {e}", line=number, field=kind)

    for name, items, expected in (("v", nodes, n_nodes), ("c", cells, n_cells), ("b", facets, n_facets)):
        if len(items) != expected:
            raise MalformedMeshFile(f"Header announces {expected} '{name}' records, found {len(items)}", field=name)
    return Mesh(dim, np.array(nodes, dtype=float).reshape(-1, dim), np.array(cells, dtype=np.int64),
                np.array(facets, dtype=np.int64).reshape(-1, dim), np.array(tags, dtype=object))


def load_mesh(path: Union[str, Path]) -> Mesh:
    path = Path(path)
    if not path.is_file():
        raise MalformedMeshFile(f"Mesh file {path} does not exist")
    return parse_mesh(path.read_text(encoding="utf-8"))
