"""Spectral simulator for the hydrostatic primitive equations with stochastic surface forcing."""

from ._version import __version__
from .errors import (
    ArtifactError,
    ConfigurationError,
    DomainError,
    HydrowindError,
    MeanCompatibilityError,
    NumericalSetupError,
    PreconditionError,
    ShapeError,
    SizeGuardError,
    StepError,
)
from .grid import BCCase, GridSpec
from .fields import (
    ScalarField,
    SpectralField,
    SurfaceField,
    forward_transform,
    helmholtz_project,
    inverse_transform,
    vertical_velocity,
)
from .stokes import StokesOperatorHandle, apply_A, build_operator, semigroup_step, stokes_solve
from .neumann import neumann_map, neumann_map_constructive
from .noise import NoiseSpec, init_noise, step_noise
from .nonlinear import advect
from .integrator import InitialData, SimulationConfig, run_ensemble, run_path
from .diagnostics import NormRequest, sobolev_norm, weighted_time_norm
from .config import RunConfig, parse_config, serialize_config

__all__ = [
    "__version__",
    "ArtifactError", "ConfigurationError", "DomainError", "HydrowindError", "MeanCompatibilityError",
    "NumericalSetupError", "PreconditionError", "ShapeError", "SizeGuardError", "StepError",
    "BCCase", "GridSpec",
    "ScalarField", "SpectralField", "SurfaceField", "forward_transform", "helmholtz_project",
    "inverse_transform", "vertical_velocity",
    "StokesOperatorHandle", "apply_A", "build_operator", "semigroup_step", "stokes_solve",
    "neumann_map", "neumann_map_constructive",
    "NoiseSpec", "init_noise", "step_noise",
    "advect",
    "InitialData", "SimulationConfig", "run_ensemble", "run_path",
    "NormRequest", "sobolev_norm", "weighted_time_norm",
    "RunConfig", "parse_config", "serialize_config",
]
