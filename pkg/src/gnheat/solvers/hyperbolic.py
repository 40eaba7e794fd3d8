"""Second-order-in-time models: Type II and the two Type III variants.

All three share one integrator for systems of the form

    u' = v,   lam v' = kappa lap(v) + K lap(u) + F(u, v, t)

built as a kick-drift-kick composition: the first half kick treats the
damping ``kappa lap(v)`` implicitly, the second explicitly, so the damping is
integrated with the (A-stable) trapezoidal rule while the undamped part is
Stormer-Verlet. With ``kappa = 0`` and ``F`` independent of ``v`` this is
the symplectic leapfrog. ``F`` is sampled at both ends of the step (with a
linear predictor for ``v``), which keeps the scheme second order.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ..constitutive import StateII, StateIII, eval_type2, eval_type3
from ..errors import BlowUpError, ConfigurationError, DomainError
from ._common import (
    Diag,
    Recorder,
    alpha_boundary,
    check_field,
    energy_supply,
    energy_supply_rate,
    entropy_supply,
)
from .scenario import Model, Scenario, Trajectory

_POSITIVITY_HINT = "; raise the background temperature offset of the initial data"


def amplification_radius(lam, kappa, stiffness, dt, mu):
    """Spectral radius of one integrator step for Laplacian eigenvalues ``mu <= 0``."""
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    a = 0.5 * dt
    d = lam - a * kappa * mu
    vh_u, vh_v = a * stiffness * mu / d, lam / d
    u1_u, u1_v = 1.0 + dt * vh_u, dt * vh_v
    c, e = 1.0 + a * kappa * mu / lam, a * stiffness * mu / lam
    M = np.empty((mu.size, 2, 2))
    M[:, 0, 0], M[:, 0, 1] = u1_u, u1_v
    M[:, 1, 0], M[:, 1, 1] = c * vh_u + e * u1_u, c * vh_v + e * u1_v
    return np.abs(np.linalg.eigvals(M)).max(axis=1)


def spectral_stability(sc: Scenario, kappa, stiffness, samples=2049) -> float:
    """Largest amplification factor over the discrete Laplacian spectrum."""
    mu = np.linspace(-4.0 / sc.grid.dx**2, 0.0, samples)
    return float(amplification_radius(sc.material.lam, kappa, stiffness, sc.dt, mu).max())


def cfl_bound(sc: Scenario, stiffness) -> float:
    if stiffness <= 0:
        return math.inf
    return sc.grid.dx * math.sqrt(sc.material.lam / stiffness)


def _require_cfl(sc: Scenario, stiffness, name):
    bound = cfl_bound(sc, stiffness)
    if sc.dt > bound:
        raise ConfigurationError(
            f"dt={sc.dt!r} violates the CFL bound dt <= dx*sqrt(lam/{name}) = {bound!r}", "dt"
        )


def _require_spectral(sc: Scenario, kappa, stiffness, tol=1e-6):
    rho = spectral_stability(sc, kappa, stiffness)
    if rho > 1.0 + tol:
        raise ConfigurationError(
            f"dt={sc.dt!r} is unstable: spectral estimate of the step amplification is {rho!r} > 1 "
            f"(the undamped CFL bound is dx*sqrt(lam/K) = {cfl_bound(sc, stiffness)!r})",
            "dt",
        )


class _DampedWave:
    def __init__(self, sc: Scenario, kappa, stiffness, bc_u, bc_v, forcing):
        self.sc, self.grid = sc, sc.grid
        self.lam, self.kappa, self.K = sc.material.lam, kappa, stiffness
        self.bc_u, self.bc_v, self.forcing = bc_u, bc_v, forcing
        self.lu = None
        if kappa != 0.0:
            A, _ = self.grid.laplacian_operator(bc_v(0.0))
            n = self.grid.n
            M = self.lam * sp.identity(n, format="csc") - 0.5 * sc.dt * kappa * A
            self.lu = splu(M.tocsc())

    def step(self, u, v, t):
        grid, dt, lam, kappa, K = self.grid, self.sc.dt, self.lam, self.kappa, self.K
        a = 0.5 * dt
        rhs = lam * v + a * (K * grid.laplacian(u, self.bc_u(t)) + self.forcing(u, v, t))
        bc_mid = self.bc_v(t + a)
        if self.lu is None:
            v_half = rhs / lam
        else:
            v_half = self.lu.solve(rhs + a * kappa * grid.laplacian_boundary_vector(bc_mid))
        u_new = u + dt * v_half
        v_pred = 2.0 * v_half - v
        kick = K * grid.laplacian(u_new, self.bc_u(t + dt)) + self.forcing(u_new, v_pred, t + dt)
        if kappa != 0.0:
            kick = kick + kappa * grid.laplacian(v_half, bc_mid)
        v_new = v_half + a / lam * kick
        return u_new, v_new


def _expect(sc: Scenario, model: Model):
    if sc.theory is not model:
        raise ConfigurationError(f"scenario theory is {sc.theory.value}, expected {model.value}", "theory")


def _face_states(sc, alpha, theta, bc_alpha):
    """Boundary-face (alpha, theta, grad alpha, grad theta) on both sides."""
    grid = sc.grid
    al, ar = grid.boundary_values(alpha, bc_alpha)
    tl, tr = grid.boundary_values(theta)
    gal, gar = grid.boundary_gradients(alpha, bc_alpha)
    gtl, gtr = grid.boundary_gradients(theta)
    return (al, tl, gal, gtl), (ar, tr, gar, gtr)


def _energy_state_gradient(grid, alpha, bc_alpha, central):
    # |grad alpha| consistent with the face-centred stencil; sign kept for clarity only
    return np.copysign(np.sqrt(grid.gradient_squared(alpha, bc_alpha)), central)


def _diag_type2(sc, alpha, theta, t, bc_alpha, s) -> Diag:
    grid, p = sc.grid, sc.material
    ga = grid.gradient(alpha, bc_alpha)
    resp = eval_type2(p, StateII(alpha, theta, ga))
    eps = eval_type2(p, StateII(alpha, theta, _energy_state_gradient(grid, alpha, bc_alpha, ga))).eps
    q_in = h_in = 0.0
    if not grid.periodic:
        (al, tl, gal, _), (ar, tr, gar, _) = _face_states(sc, alpha, theta, bc_alpha)
        left = eval_type2(p, StateII(al, tl, gal))
        right = eval_type2(p, StateII(ar, tr, gar))
        q_in, h_in = float(left.q - right.q), float(left.h - right.h)
    return Diag(
        xi=resp.xi,
        q=resp.q,
        h=resp.h,
        energy=grid.integrate(eps),
        entropy=grid.integrate(resp.eta),
        energy_rate_in=q_in + grid.integrate(theta * s),
        entropy_rate_in=h_in + grid.integrate(s),
        production_rate=0.0,
    )


def _type3_fields(sc, alpha, theta, bc_alpha):
    grid = sc.grid
    ga, gt = grid.gradient(alpha, bc_alpha), grid.gradient(theta)
    return ga, gt, eval_type3(sc.material, StateIII(alpha, theta, ga, gt))


def _diag_type3_full(sc, alpha, theta, t, bc_alpha, s) -> Diag:
    grid, p = sc.grid, sc.material
    ga, gt, resp = _type3_fields(sc, alpha, theta, bc_alpha)
    ge = _energy_state_gradient(grid, alpha, bc_alpha, ga)
    eps = eval_type3(p, StateIII(alpha, theta, ge, gt)).eps
    q_in = h_in = 0.0
    if not grid.periodic:
        left, right = _face_states(sc, alpha, theta, bc_alpha)
        lr, rr = eval_type3(p, StateIII(*left)), eval_type3(p, StateIII(*right))
        q_in, h_in = float(lr.q - rr.q), float(lr.h - rr.h)
    return Diag(
        xi=resp.xi,
        q=resp.q,
        h=resp.h,
        energy=grid.integrate(eps),
        entropy=grid.integrate(resp.eta),
        energy_rate_in=q_in + grid.integrate(theta * s),
        entropy_rate_in=h_in + grid.integrate(s),
        production_rate=grid.integrate(resp.xi),
    )


def _diag_linearized(sc, alpha, theta, t, bc_alpha, r, stiffness, xi_lin=None) -> Diag:
    """Budgets of the pseudolinearised constitutive set.

    ``eps = lam theta``, ``eta = lam theta / theta0``,
    ``q = -kappa grad theta - K grad alpha`` and ``h = q / theta0``; the
    snapshot fields (``xi``, ``q``, ``h``) are still the full Type III ones.
    """
    grid, p = sc.grid, sc.material
    _, _, resp = _type3_fields(sc, alpha, theta, bc_alpha)
    q_in = 0.0
    if not grid.periodic:
        gal, gar = grid.boundary_gradients(alpha, bc_alpha)
        gtl, gtr = grid.boundary_gradients(theta)
        q_in = float((-p.kappa * gtl - stiffness * gal) - (-p.kappa * gtr - stiffness * gar))
    production = 0.0 if xi_lin is None else grid.integrate(xi_lin)
    supply = grid.integrate(r)
    return Diag(
        xi=resp.xi,
        q=resp.q,
        h=resp.h,
        energy=grid.integrate(p.lam * theta),
        entropy=grid.integrate(p.lam * theta / p.theta0),
        energy_rate_in=q_in + supply,
        entropy_rate_in=(q_in + supply) / p.theta0,
        production_rate=production,
    )


def _run(sc, stepper, u, v, to_fields, diag, order=2, budget_model="exact", notes=()):
    """Drive ``stepper`` and record; ``to_fields(u, v)`` returns ``(alpha, theta, aux)``."""
    rec = Recorder(sc, order=order, budget_model=budget_model)
    rec.notes.extend(notes)
    t = 0.0
    alpha, theta, aux = to_fields(u, v, None, None, 0.0)
    rec.observe(0, t, theta, alpha, diag(alpha, theta, aux, t))
    dt = sc.dt
    for step in range(1, sc.steps + 1):
        try:
            u_new, v_new = stepper.step(u, v, t)
        except DomainError as exc:
            raise BlowUpError(f"{exc} during the step{_POSITIVITY_HINT}", t) from None
        check_field(sc, u_new, t, positive=False, name="u")
        alpha_new, theta_new, aux = to_fields(u_new, v_new, alpha, theta, dt)
        check_field(sc, theta_new, t, hint=_POSITIVITY_HINT)
        u, v, alpha, theta = u_new, v_new, alpha_new, theta_new
        t = step * dt
        rec.observe(step, t, theta, alpha, diag(alpha, theta, aux, t))
    return rec.finish()


def _alpha_theta(u, v, alpha, theta, dt):
    return u, v, None


def solve_type2_alpha(sc: Scenario) -> Trajectory:
    """Type II: ``lam alpha'' = kappa_star lap(alpha) + theta0 s`` with ``theta = alpha'``."""
    _expect(sc, Model.TYPE2_ALPHA)
    p = sc.material
    _require_cfl(sc, p.kappa_star, "kappa_star")
    bc_alpha = alpha_boundary(sc)
    bc_theta = sc.grid.bc

    def forcing(alpha, theta, t):
        if sc.source.is_zero:
            return 0.0
        return p.theta0 * entropy_supply(sc, t, theta)

    def diag(alpha, theta, aux, t):
        return _diag_type2(sc, alpha, theta, t, bc_alpha(t), entropy_supply(sc, t, theta))

    stepper = _DampedWave(sc, 0.0, p.kappa_star, bc_alpha, lambda t: bc_theta, forcing)
    return _run(sc, stepper, sc.initial("alpha"), sc.initial("theta"), _alpha_theta, diag)


def solve_type3_full(sc: Scenario) -> Trajectory:
    """Type III entropy balance co-evolved with ``alpha' = theta``.

    The full form is ``lam theta' = kappa lap(theta) + (kappa_star +
    kappa_2star) lap(alpha) + theta0 (s + xi_III)``. With
    ``sc.pseudolinear`` the right-hand side is ``kappa lap(theta) +
    (kappa_star + kappa_2star) lap(alpha) + r + kappa_2star grad(alpha) .
    grad(theta)``, with an entropy supply converted as ``r = theta0 s``.
    """
    _expect(sc, Model.TYPE3_FULL)
    p = sc.material
    K = p.kappa_star + p.kappa_2star
    _require_spectral(sc, p.kappa, K)
    grid = sc.grid
    bc_alpha = alpha_boundary(sc)
    bc_theta = grid.bc

    if sc.pseudolinear:
        def forcing(alpha, theta, t):
            r = energy_supply(sc, t, theta, force_reference=True)
            if p.kappa_2star == 0.0:
                return r
            return r + p.kappa_2star * grid.gradient(alpha, bc_alpha(t)) * grid.gradient(theta)

        def diag(alpha, theta, aux, t):
            r = energy_supply(sc, t, theta, force_reference=True)
            xi_lin = p.kappa_2star * grid.gradient(alpha, bc_alpha(t)) * grid.gradient(theta) / p.theta0
            return _diag_linearized(sc, alpha, theta, t, bc_alpha(t), r, K, xi_lin)

        budget_model = "linearized"
    else:
        def forcing(alpha, theta, t):
            ga, gt = grid.gradient(alpha, bc_alpha(t)), grid.gradient(theta)
            xi = eval_type3(p, StateIII(alpha, theta, ga, gt)).xi
            return p.theta0 * (entropy_supply(sc, t, theta) + xi)

        def diag(alpha, theta, aux, t):
            return _diag_type3_full(sc, alpha, theta, t, bc_alpha(t), entropy_supply(sc, t, theta))

        budget_model = "exact"

    stepper = _DampedWave(sc, p.kappa, K, bc_alpha, lambda t: bc_theta, forcing)
    return _run(
        sc, stepper, sc.initial("alpha"), sc.initial("theta"), _alpha_theta, diag,
        budget_model=budget_model,
    )


def consistent_theta_dot(sc: Scenario) -> np.ndarray:
    """Initial ``theta'`` compatible with ``lam theta' = kappa lap theta + kappa_star lap alpha + r``."""
    grid, p = sc.grid, sc.material
    theta, alpha = sc.initial("theta"), sc.initial("alpha")
    r = energy_supply(sc, 0.0, theta)
    lap_a = grid.laplacian(alpha, alpha_boundary(sc)(0.0))
    return (p.kappa * grid.laplacian(theta) + p.kappa_star * lap_a + r) / p.lam


def solve_type3_linearized(sc: Scenario) -> Trajectory:
    """Linearised Type III: ``lam theta'' = kappa lap(theta') + kappa_star lap(theta) + r'``.

    ``r'`` comes from the analytic time derivative of the supply. The
    thermal displacement is carried along with the trapezoidal rule.
    """
    _expect(sc, Model.TYPE3_LINEARIZED)
    p, grid = sc.material, sc.grid
    _require_spectral(sc, p.kappa, p.kappa_star)
    bc_alpha = alpha_boundary(sc)
    bc_theta = grid.bc
    bc_rate = bc_theta.homogeneous()
    theta0 = sc.initial("theta")
    alpha0 = sc.initial("alpha")
    theta_dot = sc.initial("theta_dot")
    if theta_dot is None:
        theta_dot = consistent_theta_dot(sc)
    # probe the derivative once so a missing one fails before stepping
    energy_supply_rate(sc, 0.0, theta0, theta_dot)
    lap_a0 = grid.laplacian(alpha0, bc_alpha(0.0))
    compat = p.lam * theta_dot - (
        p.kappa * grid.laplacian(theta0) + p.kappa_star * lap_a0 + energy_supply(sc, 0.0, theta0)
    )
    notes = []
    if p.kappa_2star != 0.0:
        notes.append("kappa_2star is not part of the linearized model and was ignored")
    if np.max(np.abs(compat)) > 1e-12 * max(1.0, float(np.max(np.abs(p.lam * theta_dot)))):
        notes.append("initial theta_dot is not compatible with the first-order form; "
                     "the mismatch is carried as an implied energy supply in the budgets")

    def forcing(theta, theta_dot, t):
        return energy_supply_rate(sc, t, theta, theta_dot)

    def to_fields(u, v, alpha, theta_prev, dt):
        if alpha is None:
            return alpha0, u, None
        return alpha + 0.5 * dt * (theta_prev + u), u, None

    def diag(alpha, theta, aux, t):
        r = energy_supply(sc, t, theta) + compat
        return _diag_linearized(sc, alpha, theta, t, bc_alpha(t), r, p.kappa_star)

    stepper = _DampedWave(sc, p.kappa, p.kappa_star, lambda t: bc_theta, lambda t: bc_rate, forcing)
    return _run(
        sc, stepper, theta0, theta_dot, to_fields, diag, budget_model="linearized", notes=notes
    )
