"""Time integration of the heat-propagation models."""

from .hyperbolic import (
    amplification_radius,
    cfl_bound,
    consistent_theta_dot,
    solve_type2_alpha,
    solve_type3_full,
    solve_type3_linearized,
    spectral_stability,
)
from .hyperbolic import _require_cfl, _require_spectral
from .parabolic import (
    _require_explicit_stable,
    explicit_bound,
    solve_classical,
    solve_type1_nonlinear,
    solve_type1_xiform,
)
from ..errors import ConfigurationError
from .scenario import Budgets, Model, Profile, Scenario, Source, Trajectory

SOLVERS = {
    Model.CLASSICAL: solve_classical,
    Model.TYPE1_NONLINEAR: solve_type1_nonlinear,
    Model.TYPE1_XIFORM: solve_type1_xiform,
    Model.TYPE2_ALPHA: solve_type2_alpha,
    Model.TYPE3_LINEARIZED: solve_type3_linearized,
    Model.TYPE3_FULL: solve_type3_full,
}


def check_stability(sc: Scenario) -> None:
    """Raise :class:`ConfigurationError` if ``sc.dt`` breaks the step bound of its solver."""
    p, model = sc.material, sc.theory
    if model is Model.TYPE1_NONLINEAR:
        if sc.scheme != "explicit":
            raise ConfigurationError("the nonlinear Type I model is stepped explicitly only", "scheme")
        _require_explicit_stable(sc, sc.initial("theta"))
    elif model in (Model.CLASSICAL, Model.TYPE1_XIFORM):
        if sc.scheme == "explicit":
            _require_explicit_stable(sc)
    elif model is Model.TYPE2_ALPHA:
        _require_cfl(sc, p.kappa_star, "kappa_star")
    elif model is Model.TYPE3_FULL:
        _require_spectral(sc, p.kappa, p.kappa_star + p.kappa_2star)
    else:
        _require_spectral(sc, p.kappa, p.kappa_star)


def solve(sc: Scenario) -> Trajectory:
    """Run the solver that matches ``sc.theory``."""
    return SOLVERS[sc.theory](sc)


__all__ = [
    "Budgets",
    "Model",
    "Profile",
    "SOLVERS",
    "Scenario",
    "Source",
    "Trajectory",
    "amplification_radius",
    "cfl_bound",
    "check_stability",
    "consistent_theta_dot",
    "explicit_bound",
    "solve",
    "solve_classical",
    "solve_type1_nonlinear",
    "solve_type1_xiform",
    "solve_type2_alpha",
    "solve_type3_full",
    "solve_type3_linearized",
    "spectral_stability",
]
