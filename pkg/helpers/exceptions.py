"""Error hierarchy shared by the library and the CLI."""

from typing import Optional

from config.consts import (EXIT_CONFIG_ERROR, EXIT_DATA_FORMAT, EXIT_PROPERTY_FAILURE,
                           EXIT_SOLVER_FAILURE)


class DiscoveryError(Exception):
    """
    Base class of every domain error.

    @param category: Machine-readable error category printed by the CLI.
    @param exit_code: Process exit code used by the CLI.
    """
    category = "error"
    exit_code = 1


class ConfigError(DiscoveryError):
    category = "config"
    exit_code = EXIT_CONFIG_ERROR


class NonPositiveJacobian(DiscoveryError, ValueError):
    category = "kinematics"
    exit_code = EXIT_SOLVER_FAILURE

    def __init__(self, jacobian: float, index: Optional[int] = None):
        self.jacobian = jacobian
        self.index = index
        where = f" at entry {index}" if index is not None else ""
        super().__init__(f"det(F) = {jacobian:.6e} <= 0{where}")


# Solver family
class ElementInversion(DiscoveryError):
    category = "solver"
    exit_code = EXIT_SOLVER_FAILURE

    def __init__(self, cell_id: int, jacobian: float):
        self.cell_id = cell_id
        self.jacobian = jacobian
        super().__init__(f"cell {cell_id} inverted (det F = {jacobian:.6e})")


class LinearSolveFailure(DiscoveryError):
    category = "solver"
    exit_code = EXIT_SOLVER_FAILURE


class ContinuationFailure(DiscoveryError):
    category = "solver"
    exit_code = EXIT_SOLVER_FAILURE

    def __init__(self, last_load: float, message: str = ""):
        self.last_load = last_load
        super().__init__(f"load continuation failed after load_scale={last_load:.6g}. {message}".strip())


class SolveFailure(DiscoveryError):
    category = "solver"
    exit_code = EXIT_SOLVER_FAILURE

    def __init__(self, experiment: int, message: str = ""):
        self.experiment = experiment
        super().__init__(f"equilibrium solve failed for experiment {experiment}. {message}".strip())


class TrainingStalled(DiscoveryError):
    category = "solver"
    exit_code = EXIT_SOLVER_FAILURE

    def __init__(self, message: str, partial_result=None):
        self.partial_result = partial_result
        super().__init__(message)


class NoConvergence(DiscoveryError):
    category = "solver"
    exit_code = EXIT_SOLVER_FAILURE

    def __init__(self, last_error: float):
        self.last_error = last_error
        super().__init__(f"iteration did not converge, last marginal error {last_error:.3e}")


# Data and format family
class GeometryInfeasible(DiscoveryError):
    category = "geometry"
    exit_code = EXIT_DATA_FORMAT


class MalformedMeshFile(DiscoveryError):
    category = "data_format"
    exit_code = EXIT_DATA_FORMAT

    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(f"{prefix}{message}")


class MalformedCheckpoint(DiscoveryError):
    category = "data_format"
    exit_code = EXIT_DATA_FORMAT


class MalformedDataset(DiscoveryError):
    category = "data_format"
    exit_code = EXIT_DATA_FORMAT


class MissingArtifacts(DiscoveryError):
    category = "data_format"
    exit_code = EXIT_DATA_FORMAT


class PointOutsideMesh(DiscoveryError):
    category = "data_format"
    exit_code = EXIT_DATA_FORMAT

    def __init__(self, point_index: int):
        self.point_index = point_index
        super().__init__(f"point {point_index} lies outside the mesh")


class TagNotDirichlet(DiscoveryError):
    category = "data_format"
    exit_code = EXIT_DATA_FORMAT

    def __init__(self, tag: str):
        self.tag = tag
        super().__init__(f"boundary tag '{tag}' carries no Dirichlet condition")


class DegenerateVariance(DiscoveryError, ValueError):
    category = "data_format"
    exit_code = EXIT_DATA_FORMAT


class PropertySuiteFailure(DiscoveryError):
    category = "property_suite"
    exit_code = EXIT_PROPERTY_FAILURE
