"""Machinery shared by all solvers: supplies, boundary data, recording."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import BlowUpError
from ..grid import DIRICHLET, PERIODIC
from .scenario import Budgets, Profile, Scenario, Trajectory


@dataclass
class Diag:
    """Instantaneous snapshot fields and budget rates."""

    xi: np.ndarray
    q: np.ndarray
    h: np.ndarray
    energy: float
    entropy: float
    energy_rate_in: float
    entropy_rate_in: float
    production_rate: float


def energy_supply(sc: Scenario, t, theta, force_reference=False):
    """Energy supply ``r`` on the cells, converting an entropy supply if needed."""
    src = sc.source
    v = src.value(sc.grid.x, t)
    if src.supply == "r":
        return v
    if sc.near_isothermal or force_reference:
        return sc.material.theta0 * v
    return theta * v


def entropy_supply(sc: Scenario, t, theta):
    src = sc.source
    v = src.value(sc.grid.x, t)
    if src.supply == "s":
        return v
    if sc.near_isothermal:
        return v / sc.material.theta0
    return v / theta


def energy_supply_rate(sc: Scenario, t, theta, theta_dot):
    """Analytic time derivative of the energy supply."""
    src = sc.source
    dv = src.time_derivative(sc.grid.x, t)
    if src.supply == "r":
        return dv
    if sc.near_isothermal:
        return sc.material.theta0 * dv
    return theta_dot * src.value(sc.grid.x, t) + theta * dv


def _face_data(sc: Scenario, init, derivative):
    grid = sc.grid
    xl, xr = grid.x_faces[0], grid.x_faces[-1]
    if init is None:
        return 0.0, 0.0
    if isinstance(init, Profile):
        f = init.derivative if derivative else init
        return float(f(xl)), float(f(xr))
    a = np.asarray(init, dtype=float)
    h = grid.dx
    if derivative:
        return (
            (-2.0 * a[0] + 3.0 * a[1] - a[2]) / h,
            (2.0 * a[-1] - 3.0 * a[-2] + a[-3]) / h,
        )
    return 1.5 * a[0] - 0.5 * a[1], 1.5 * a[-1] - 0.5 * a[-2]


def alpha_boundary(sc: Scenario):
    """Boundary data for the thermal displacement as a function of time.

    The displacement inherits the temperature boundary type; its data are the
    initial face data plus the time integral of the (constant) temperature
    data.
    """
    bc = sc.grid.bc
    if bc.kind == PERIODIC:
        return lambda t: bc
    l0, r0 = _face_data(sc, sc.alpha_init, derivative=bc.kind != DIRICHLET)
    return lambda t: bc.with_values(l0 + bc.left * t, r0 + bc.right * t)


def check_field(sc: Scenario, theta, t_valid, positive=True, name="theta", hint=""):
    bad = ~np.isfinite(theta)
    if positive:
        bad |= ~(theta > 0)
    if np.any(bad):
        i = int(np.argmax(bad))
        what = "non-finite values" if not np.isfinite(theta[i]) else "non-positive temperature"
        raise BlowUpError(f"{name}: {what}{hint}", t_valid, float(sc.grid.x[i]))


class Recorder:
    """Collect snapshots and accumulate budget inputs with the trapezoidal rule."""

    def __init__(self, sc: Scenario, order: int, budget_model: str = "exact"):
        self.sc = sc
        self.order = order
        self.budget_model = budget_model
        self.notes: list[str] = []
        self._snap = {k: [] for k in ("t", "theta", "alpha", "xi", "q", "h")}
        self._bud = {k: [] for k in Budgets.COLUMNS}
        self._acc = np.zeros(3)
        self._prev = None
        self._prev_t = None

    def observe(self, step: int, t: float, theta, alpha, diag: Diag):
        rates = np.array([diag.energy_rate_in, diag.entropy_rate_in, diag.production_rate])
        if self._prev is not None:
            self._acc = self._acc + 0.5 * (t - self._prev_t) * (rates + self._prev)
        self._prev, self._prev_t = rates, t
        if step % self.sc.output_stride == 0 or step == self.sc.steps:
            s = self._snap
            s["t"].append(t)
            s["theta"].append(np.array(theta, dtype=float))
            s["alpha"].append(np.array(alpha, dtype=float))
            s["xi"].append(np.array(diag.xi, dtype=float) * np.ones(self.sc.grid.n))
            s["q"].append(np.array(diag.q, dtype=float))
            s["h"].append(np.array(diag.h, dtype=float))
            b = self._bud
            b["energy"].append(diag.energy)
            b["entropy"].append(diag.entropy)
            b["energy_in"].append(self._acc[0])
            b["entropy_in"].append(self._acc[1])
            b["entropy_produced"].append(self._acc[2])

    def finish(self) -> Trajectory:
        s = self._snap
        return Trajectory(
            theory=self.sc.theory,
            grid=self.sc.grid,
            dt=self.sc.dt,
            steps=self.sc.steps,
            times=np.array(s["t"]),
            theta=np.array(s["theta"]),
            alpha=np.array(s["alpha"]),
            xi=np.array(s["xi"]),
            q=np.array(s["q"]),
            h=np.array(s["h"]),
            budgets=Budgets(**{k: np.array(v) for k, v in self._bud.items()}),
            integrator_order=self.order,
            budget_model=self.budget_model,
            notes=tuple(self.notes),
        )
