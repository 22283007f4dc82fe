from mesh.generators import box_mesh, generate_mesh, structured_grid
from mesh.io import load_mesh, parse_mesh, save_mesh
from mesh.mesh import Mesh
from mesh.quality import MeshQualityReport, mesh_quality
