"""First-order-in-time models: Fourier conduction and Green-Naghdi Type I."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ..constitutive import StateI, eval_classic, eval_type1
from ..errors import ConfigurationError
from ._common import Diag, Recorder, check_field, energy_supply, entropy_supply
from .scenario import Model, Scenario, Trajectory


def explicit_bound(sc: Scenario, theta=None) -> float:
    """Largest stable explicit Euler step for the diffusion part.

    For the nonlinear Type I operator the effective diffusivity is bounded
    by ``kappa * max(theta) / (lam * min(theta))``.
    """
    p = sc.material
    if p.kappa <= 0:
        return np.inf
    ratio = 1.0
    if theta is not None:
        ratio = float(np.max(theta) / np.min(theta))
    return 0.5 * p.lam * sc.grid.dx**2 / (p.kappa * ratio)


def _require_explicit_stable(sc: Scenario, theta=None):
    bound = explicit_bound(sc, theta)
    if sc.dt > bound:
        raise ConfigurationError(
            f"dt={sc.dt!r} violates the explicit stability bound "
            f"dt <= lam*dx^2/(2*kappa{'*max(theta)/min(theta)' if theta is not None else ''})"
            f" = {bound!r}",
            "dt",
        )


def _implicit_factor(sc: Scenario):
    A, b = sc.grid.laplacian_operator()
    p = sc.material
    M = p.lam * sp.identity(sc.grid.n, format="csc") - sc.dt * p.kappa * A
    return splu(M.tocsc()), b


def _boundary_inflow(sc: Scenario, evaluator, theta):
    """Net heat and entropy inflow through the two boundary faces."""
    grid = sc.grid
    if grid.periodic:
        return 0.0, 0.0
    tl, tr = grid.boundary_values(theta)
    gl, gr = grid.boundary_gradients(theta)
    left = evaluator(sc.material, StateI(tl, gl))
    right = evaluator(sc.material, StateI(tr, gr))
    return float(left.q - right.q), float(left.h - right.h)


def _diag_typeI_like(sc: Scenario, evaluator, theta, r, s) -> Diag:
    grid = sc.grid
    resp = evaluator(sc.material, StateI(theta, grid.gradient(theta)))
    q_in, h_in = _boundary_inflow(sc, evaluator, theta)
    return Diag(
        xi=resp.xi,
        q=resp.q,
        h=resp.h,
        energy=grid.integrate(resp.eps),
        entropy=grid.integrate(resp.eta),
        energy_rate_in=q_in + grid.integrate(r),
        entropy_rate_in=h_in + grid.integrate(s),
        production_rate=grid.integrate(resp.xi),
    )


def _run_first_order(sc: Scenario, evaluator, rhs, supplies, implicit=None) -> Trajectory:
    """Generic explicit / IMEX Euler loop.

    ``rhs(theta, t)`` returns ``lam * d(theta)/dt``; ``supplies(theta, t)``
    returns the applied ``(r, s)`` pair used for budgets. With ``implicit``
    given as ``(lu, b, explicit_part)``, the Laplacian part is taken at the
    new time level and ``explicit_part(theta, t)`` supplies the rest.
    """
    p, dt = sc.material, sc.dt
    theta = sc.initial("theta")
    alpha = sc.initial("alpha")
    rec = Recorder(sc, order=1)
    t = 0.0
    r, s = supplies(theta, t)
    rec.observe(0, t, theta, alpha, _diag_typeI_like(sc, evaluator, theta, r, s))
    for step in range(1, sc.steps + 1):
        if implicit is None:
            new = theta + dt / p.lam * rhs(theta, t)
        else:
            lu, b, explicit_part = implicit
            new = lu.solve(p.lam * theta + dt * (p.kappa * b + explicit_part(theta, t + dt)))
        t_new = step * dt
        check_field(sc, new, t)
        alpha = alpha + 0.5 * dt * (theta + new)
        theta, t = new, t_new
        r, s = supplies(theta, t)
        rec.observe(step, t, theta, alpha, _diag_typeI_like(sc, evaluator, theta, r, s))
    return rec.finish()


def _expect(sc: Scenario, model: Model):
    if sc.theory is not model:
        raise ConfigurationError(f"scenario theory is {sc.theory.value}, expected {model.value}", "theory")


def solve_classical(sc: Scenario) -> Trajectory:
    """Fourier heat equation ``lam theta' = kappa lap(theta) + r``."""
    _expect(sc, Model.CLASSICAL)
    grid, p = sc.grid, sc.material

    def supplies(theta, t):
        r = energy_supply(sc, t, theta)
        return r, r / theta

    def rhs(theta, t):
        return p.kappa * grid.laplacian(theta) + energy_supply(sc, t, theta)

    if sc.scheme == "implicit":
        lu, b = _implicit_factor(sc)
        return _run_first_order(
            sc, eval_classic, rhs, supplies, (lu, b, lambda th, t: energy_supply(sc, t, th))
        )
    _require_explicit_stable(sc)
    return _run_first_order(sc, eval_classic, rhs, supplies)


def solve_type1_nonlinear(sc: Scenario) -> Trajectory:
    """Type I energy balance ``lam theta' = kappa div(theta grad theta)/theta + theta0 r/theta``."""
    _expect(sc, Model.TYPE1_NONLINEAR)
    if sc.scheme != "explicit":
        raise ConfigurationError("the nonlinear Type I model is stepped explicitly only", "scheme")
    grid, p = sc.grid, sc.material
    _require_explicit_stable(sc, sc.initial("theta"))

    def supplies(theta, t):
        r = energy_supply(sc, t, theta)
        return r, r / theta

    def rhs(theta, t):
        return (p.kappa * grid.div_theta_grad(theta) + p.theta0 * energy_supply(sc, t, theta)) / theta

    return _run_first_order(sc, eval_type1, rhs, supplies)


def solve_type1_xiform(sc: Scenario) -> Trajectory:
    """Type I entropy-production form ``lam theta' = kappa lap(theta) + theta0 (xi_I + s)``."""
    _expect(sc, Model.TYPE1_XIFORM)
    grid, p = sc.grid, sc.material

    def supplies(theta, t):
        s = entropy_supply(sc, t, theta)
        return theta * s, s

    def source_part(theta, t):
        xi = eval_type1(p, StateI(theta, grid.gradient(theta))).xi
        return p.theta0 * (xi + entropy_supply(sc, t, theta))

    def rhs(theta, t):
        return p.kappa * grid.laplacian(theta) + source_part(theta, t)

    if sc.scheme == "implicit":
        lu, b = _implicit_factor(sc)
        return _run_first_order(sc, eval_type1, rhs, supplies, (lu, b, source_part))
    _require_explicit_stable(sc)
    return _run_first_order(sc, eval_type1, rhs, supplies)
