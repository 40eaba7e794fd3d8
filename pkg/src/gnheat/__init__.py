"""Green-Naghdi thermal conduction in one dimension: constitutive laws, solvers and audits."""

from .constitutive import (
    ConstitutiveResponse,
    MaterialParams,
    StateI,
    StateII,
    StateIII,
    Theory,
    eval_classic,
    eval_type1,
    eval_type2,
    eval_type3,
    xi_from_restrictions,
)
from .errors import (
    BlowUpError,
    ConfigurationError,
    DomainError,
    GNHeatError,
    InsufficientSignalError,
    UsageError,
)
from .grid import BoundaryCondition, Grid1D
from .solvers import Model, Profile, Scenario, Source, Trajectory, solve

__version__ = "0.1.0"

__all__ = [
    "BlowUpError", "BoundaryCondition", "ConfigurationError", "ConstitutiveResponse", "DomainError",
    "GNHeatError", "Grid1D", "InsufficientSignalError", "MaterialParams", "Model", "Profile", "Scenario",
    "Source", "StateI", "StateII", "StateIII", "Theory", "Trajectory", "UsageError", "eval_classic",
    "eval_type1", "eval_type2", "eval_type3", "solve", "xi_from_restrictions",
]
