"""Thermodynamic audits of constitutive samples and solver trajectories.

Every check produces an :class:`AuditCheck` with one of three statuses:

``pass``
    the identity or inequality holds on every sample / snapshot;
``fail``
    it is violated;
``violated-by-construction``
    it is violated, but the violation was built into the input on purpose
    (negative moduli from :meth:`MaterialParams.unchecked`, or an
    inequality the theory does not enforce).

Identity residuals are mixed absolute/relative: the magnitude of the sum of
the terms divided by ``max(1, sum of |terms|)``.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .constitutive import (
    MaterialParams,
    StateI,
    StateII,
    StateIII,
    Theory,
    dot,
    evaluate,
    free_energy_partials,
    scale,
    xi_from_restrictions,
)
from .errors import UsageError
from .solvers.scenario import Model, Scenario, Trajectory

log = logging.getLogger(__name__)

PASS = "pass"
FAIL = "fail"
BY_CONSTRUCTION = "violated-by-construction"

DEFAULT_SEED = 20130214


@dataclass
class AuditCheck:
    check: str
    status: str
    residual: float
    x: float | None = None
    t: float | None = None
    detail: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status != FAIL


@dataclass
class AuditReport:
    checks: list[AuditCheck] = field(default_factory=list)
    seed: int | None = None

    def add(self, check: AuditCheck):
        if any(c.check == check.check for c in self.checks):
            raise ValueError(f"check {check.check!r} registered twice")
        self.checks.append(check)

    def extend(self, other: AuditReport):
        for c in other.checks:
            self.add(c)
        if self.seed is None:
            self.seed = other.seed

    def __getitem__(self, name) -> AuditCheck:
        for c in self.checks:
            if c.check == name:
                return c
        raise KeyError(name)

    def __contains__(self, name):
        return any(c.check == name for c in self.checks)

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def failures(self) -> list[AuditCheck]:
        return [c for c in self.checks if c.status == FAIL]

    def to_dict(self) -> dict:
        return {"seed": self.seed, "checks": [_jsonable(asdict(c)) for c in self.checks]}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data) -> AuditReport:
        return cls([AuditCheck(**c) for c in data["checks"]], data.get("seed"))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


# -- sampling ---------------------------------------------------------------


def sample_params(rng, lo=0.1, hi=10.0) -> MaterialParams:
    """Material parameters drawn log-uniformly from ``[lo, hi]``."""
    v = np.exp(rng.uniform(math.log(lo), math.log(hi), size=5))
    return MaterialParams(lam=v[0], kappa=v[1], kappa_star=v[2], kappa_2star=v[3], theta0=v[4])


def sample_states(theory, p: MaterialParams, n, seed=DEFAULT_SEED, dim=1, grad_range=10.0):
    """Random states: ``theta`` log-uniform in ``[0.1 theta0, 10 theta0]``,
    displacement and gradients uniform in ``[-grad_range, grad_range]``.

    Returns the state (with array fields of length ``n``) of the class that
    matches ``theory``.
    """
    theory = Theory(theory)
    rng = np.random.default_rng(seed)
    theta = p.theta0 * np.exp(rng.uniform(math.log(0.1), math.log(10.0), size=n))
    vshape = (n,) if dim == 1 else (n, dim)

    def u(shape):
        return rng.uniform(-grad_range, grad_range, size=shape)

    if theory in (Theory.CLASSIC, Theory.TYPE_I):
        return StateI(theta, u(vshape))
    alpha = u(n)
    if theory is Theory.TYPE_II:
        return StateII(alpha, theta, u(vshape))
    return StateIII(alpha, theta, u(vshape), u(vshape))


def counterexample_state(p: MaterialParams) -> StateIII:
    """A Type III state with negative internal entropy production when ``kappa_2star > 0``.

    With unit temperature gradient ``-1`` and displacement gradient
    ``2 kappa / kappa_2star + 1`` the production equals
    ``-(kappa + kappa_2star) / theta0 / theta0``.
    """
    if p.kappa_2star <= 0:
        raise UsageError("the counterexample needs kappa_2star > 0")
    return StateIII(0.0, p.theta0, 2.0 * p.kappa / p.kappa_2star + 1.0, -1.0)


def _take(state, idx):
    """Single state at ``idx`` from a batched state (as plain floats / small vectors)."""
    vals = {k: np.asarray(v)[idx] for k, v in vars(state).items()}
    return type(state)(**{k: (float(v) if np.ndim(v) == 0 else v) for k, v in vals.items()})


def _state_dict(state):
    return {k: (float(v) if np.ndim(v) == 0 else np.asarray(v).tolist()) for k, v in vars(state).items()}


def _concat(a, b):
    return type(a)(**{
        k: np.concatenate([np.atleast_1d(getattr(a, k)), np.atleast_1d(getattr(b, k))])
        for k in vars(a)
    })


# -- identities -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class StateRate:
    """Time rate of a state.

    The displacement rates are not free: ``alpha' = theta`` and
    ``grad(alpha)' = grad(theta)``. For Type II, whose state carries no
    temperature gradient, ``grad_theta`` must be given here.
    """

    theta_dot: float | np.ndarray
    grad_theta: float | np.ndarray | None = None
    grad_theta_dot: float | np.ndarray | None = None


def _mixed(total, magnitude):
    return np.abs(total) / np.maximum(1.0, magnitude)


def reduced_entropy_terms(theory, p: MaterialParams, state, rate: StateRate):
    """The individual terms of the reduced entropy equation, chain rule expanded."""
    theory = Theory(theory)
    resp = evaluate(theory, p, state)
    d = free_energy_partials(theory, p, state)
    theta = np.asarray(state.theta, dtype=float)
    if theory is Theory.TYPE_II:
        if rate.grad_theta is None:
            raise UsageError("a Type II state rate needs grad_theta")
        grad_theta = rate.grad_theta
    else:
        grad_theta = state.grad_theta
    vec = np.ndim(grad_theta) > np.ndim(theta)
    terms = [d.d_theta * rate.theta_dot, resp.eta * rate.theta_dot]
    if theory in (Theory.TYPE_II, Theory.TYPE_III):
        terms.append(d.d_alpha * theta)
        terms.append(dot(d.d_grad_alpha, grad_theta, vec))
    terms.append(dot(scale(1.0 / theta, resp.q, vec), grad_theta, vec))
    terms.append(theta * resp.xi)
    return terms


def check_reduced_entropy(theory, p: MaterialParams, state, rate: StateRate):
    """Residual of ``psi' + eta theta' + q.grad(theta)/theta + theta xi = 0``."""
    terms = reduced_entropy_terms(theory, p, state, rate)
    total = sum(terms[1:], terms[0])
    magnitude = sum((np.abs(t) for t in terms[1:]), np.abs(terms[0]))
    return _mixed(total, magnitude)[()]


def sample_rate(theory, state, seed=DEFAULT_SEED + 1, rate_range=10.0) -> StateRate:
    rng = np.random.default_rng(seed)
    theta = np.asarray(state.theta)
    theta_dot = rng.uniform(-rate_range, rate_range, size=theta.shape)
    if Theory(theory) is Theory.TYPE_II:
        g = np.asarray(state.grad_alpha)
        return StateRate(theta_dot, grad_theta=rng.uniform(-rate_range, rate_range, size=g.shape))
    g = np.asarray(state.grad_theta)
    return StateRate(theta_dot, grad_theta_dot=rng.uniform(-rate_range, rate_range, size=g.shape))


def identity_residuals(theory, p: MaterialParams, state) -> dict:
    """Worst residuals of ``eps = psi + theta eta`` and ``q = theta h`` (both exact by design)."""
    theory = Theory(theory)
    resp = evaluate(theory, p, state)
    theta = np.asarray(state.theta)
    grad = state.grad_theta if hasattr(state, "grad_theta") else state.grad_alpha
    vec = np.ndim(grad) > np.ndim(theta)
    return {
        "energy": float(np.max(np.abs(resp.psi + theta * resp.eta - resp.eps))),
        "influx": float(np.max(np.abs(resp.q - scale(theta, resp.h, vec)))),
    }


def entropy_fd_error(theory, p: MaterialParams, state, rel_step=1e-6):
    """Relative error of ``eta`` against a central difference ``-d psi / d theta``.

    Errors are relative to ``max(|eta|, |psi| / theta)``: the rounding error of
    a difference quotient scales with the size of ``psi`` itself.
    """
    theory = Theory(theory)
    theta = np.asarray(state.theta, dtype=float)
    h = rel_step * theta
    up = evaluate(theory, p, _replace(state, theta=theta + h)).psi
    dn = evaluate(theory, p, _replace(state, theta=theta - h)).psi
    fd = -(up - dn) / (2.0 * h)
    resp = evaluate(theory, p, state)
    ref = np.maximum(np.abs(resp.eta), np.abs(resp.psi) / theta)
    return np.abs(fd - resp.eta) / ref


def potential_flux_fd_error(p: MaterialParams, state: StateII, rel_step=1e-6):
    """Relative error of ``q`` against ``-theta d psi / d grad(alpha)`` by central differences."""
    ga = np.asarray(state.grad_alpha, dtype=float)
    h = rel_step * np.maximum(np.abs(ga), 1.0)
    up = evaluate(Theory.TYPE_II, p, _replace(state, grad_alpha=ga + h)).psi
    dn = evaluate(Theory.TYPE_II, p, _replace(state, grad_alpha=ga - h)).psi
    theta = np.asarray(state.theta, dtype=float)
    fd = -theta * (up - dn) / (2.0 * h)
    resp = evaluate(Theory.TYPE_II, p, state)
    ref = np.maximum(np.abs(resp.q), theta * np.abs(resp.psi) / np.maximum(np.abs(ga), 1.0))
    return np.abs(fd - resp.q) / ref


def _replace(state, **changes):
    values = dict(vars(state))
    values.update(changes)
    return type(state)(**values)


def xi_restriction_residual(theory, p: MaterialParams, state):
    """Mixed residual between the direct production formula and the restriction-derived one.

    The scale is the sum of the magnitudes of the restriction terms, which
    can cancel heavily when the flux and the gradient of the free energy
    share a large common part.
    """
    theory = Theory(theory)
    resp = evaluate(theory, p, state)
    derived = xi_from_restrictions(theory, p, state)
    d = free_energy_partials(theory, p, state)
    theta = np.asarray(state.theta, dtype=float)
    magnitude = np.abs(resp.xi) + np.abs(d.d_alpha)
    if hasattr(state, "grad_theta"):
        gt = state.grad_theta
        vec = np.ndim(gt) > np.ndim(theta)
        magnitude = magnitude + np.abs(dot(resp.q, gt, vec)) / theta**2
        if theory is Theory.TYPE_III:
            magnitude = magnitude + np.abs(dot(d.d_grad_alpha, gt, vec)) / theta
    return _mixed(np.asarray(resp.xi) - np.asarray(derived), magnitude)


# -- second law -------------------------------------------------------------


def _status(violated, p: MaterialParams):
    if not violated:
        return PASS
    if p.sign_violations:
        log.warning("sign-violating moduli %s produced a violation", p.sign_violations)
        return BY_CONSTRUCTION
    return FAIL


def _inequality(name, values, p, state, upper=True):
    """``values <= 0`` (``upper``) or ``values >= 0`` checked over the batch."""
    values = np.atleast_1d(np.asarray(values, dtype=float))
    signed = values if upper else -values
    i = int(np.argmax(signed))
    worst = float(signed[i])
    violated = worst > 0
    detail = {"witness": _state_dict(_take(state, i))} if violated else {}
    return AuditCheck(name, _status(violated, p), max(worst, 0.0), detail=detail)


def check_second_law(theory, p: MaterialParams, sample_states) -> AuditReport:
    """Second-law audit of one constitutive set over a batch of states.

    All theories: ``xi >= 0``. Classical and Type I: ``q . grad(theta) <= 0``.
    Type II: ``d psi / d alpha <= 0``. Type III: the residual entropy
    inequality ``d psi/d alpha + (d psi/d grad(alpha) + q/theta) . grad(theta)/theta <= 0``.
    When ``kappa_2star > 0`` the Type III sample is augmented with
    :func:`counterexample_state`.
    """
    theory = Theory(theory)
    state = sample_states
    if theory is Theory.TYPE_III and p.kappa_2star > 0:
        state = _concat(state, counterexample_state(p))
    if np.size(state.theta) == 0:
        raise UsageError("empty sample")
    resp = evaluate(theory, p, state)
    theta = np.asarray(state.theta)
    tag = theory.value
    report = AuditReport()
    report.add(_inequality(f"second_law.xi_nonnegative[{tag}]", resp.xi, p, state, upper=False))
    if theory in (Theory.CLASSIC, Theory.TYPE_I):
        vec = np.ndim(state.grad_theta) > np.ndim(theta)
        report.add(_inequality(
            f"second_law.heat_conduction[{tag}]", dot(resp.q, state.grad_theta, vec), p, state
        ))
    d = free_energy_partials(theory, p, state)
    if theory is Theory.TYPE_II:
        report.add(_inequality(
            f"second_law.dpsi_dalpha[{tag}]", np.broadcast_to(d.d_alpha, theta.shape), p, state
        ))
    if theory is Theory.TYPE_III:
        vec = np.ndim(state.grad_theta) > np.ndim(theta)
        bracket = d.d_grad_alpha + scale(1.0 / theta, resp.q, vec)
        residual = d.d_alpha + dot(bracket, state.grad_theta, vec) / theta
        report.add(_inequality(f"second_law.residual_inequality[{tag}]", residual, p, state))
    return report


def audit_constitutive(p: MaterialParams, n=10_000, seed=DEFAULT_SEED, tol=1e-12) -> AuditReport:
    """Identity and second-law checks for all four constitutive sets."""
    report = AuditReport(seed=seed)
    for k, theory in enumerate(Theory):
        states = sample_states(theory, p, n, seed + k)
        rate = sample_rate(theory, states, seed + 100 + k)
        ids = identity_residuals(theory, p, states)
        red = float(np.max(check_reduced_entropy(theory, p, states, rate)))
        xi_res = float(np.max(xi_restriction_residual(theory, p, states)))
        tag = theory.value
        for name, value in (
            (f"identity.energy[{tag}]", ids["energy"]),
            (f"identity.influx[{tag}]", ids["influx"]),
            (f"identity.reduced_entropy[{tag}]", red),
            (f"identity.xi_restriction[{tag}]", xi_res),
        ):
            report.add(AuditCheck(name, PASS if value <= tol else FAIL, value))
        report.extend(check_second_law(theory, p, states))
    return report


# -- trajectories -----------------------------------------------------------


def budget_tolerance(tr: Trajectory, sc: Scenario, safety=4.0):
    """Computed tolerances for the energy and entropy budget residuals.

    ``safety * (k^2 dx^2 + (nu dt)^p) * P`` with ``k`` the fundamental
    wavenumber, ``nu`` the fastest physical rate of the resolved modes, ``p``
    the integrator order and ``P`` a power scale built from the observed
    temperature variation.
    """
    p, grid = sc.material, sc.grid
    k = 2.0 * math.pi / grid.length
    stiffness = p.kappa_star + p.kappa_2star
    nu = max(
        p.kappa * k * k / p.lam,
        k * math.sqrt(max(stiffness, 0.0) / p.lam),
        1.0 / tr.times[-1],
    )
    order = tr.integrator_order
    err = (k * grid.dx) ** 2 + (nu * tr.dt) ** order
    theta_ref = max(float(np.max(tr.theta)), p.theta0)
    variation = float(np.max(tr.theta) - np.min(tr.theta))
    power = nu * p.lam * variation * theta_ref / p.theta0 * grid.length
    floor_e = 1e-12 * float(np.max(np.abs(tr.budgets.energy))) / tr.times[-1]
    floor_s = 1e-12 * float(np.max(np.abs(tr.budgets.entropy))) / tr.times[-1]
    return safety * err * power + floor_e, safety * err * power / theta_ref + floor_s


def budget_residuals(tr: Trajectory):
    """Per-window energy and entropy budget residuals (rates), length ``snapshots - 1``."""
    b = tr.budgets
    dt = np.diff(tr.times)
    energy = (np.diff(b.energy) - np.diff(b.energy_in)) / dt
    entropy = (np.diff(b.entropy) - np.diff(b.entropy_in) - np.diff(b.entropy_produced)) / dt
    return energy, entropy


def audit_trajectory(tr: Trajectory, sc: Scenario) -> AuditReport:
    """Budget closure, influx proportionality and production sign along a run."""
    report = AuditReport()
    x = tr.grid.x
    if len(tr.times) > 1:
        e_res, s_res = budget_residuals(tr)
        tol_e, tol_s = budget_tolerance(tr, sc)
        for name, res, tol in (("budget.energy", e_res, tol_e), ("budget.entropy", s_res, tol_s)):
            i = int(np.argmax(np.abs(res)))
            worst = float(abs(res[i]))
            report.add(AuditCheck(
                name, PASS if worst <= tol else FAIL, worst, t=float(tr.times[i + 1]),
                detail={"tolerance": tol, "budget_model": tr.budget_model},
            ))
    influx = np.abs(tr.q - tr.theta * tr.h)
    k, i = np.unravel_index(int(np.argmax(influx)), influx.shape)
    report.add(AuditCheck(
        "identity.influx_proportionality", PASS if influx[k, i] == 0 else FAIL,
        float(influx[k, i]), x=float(x[i]), t=float(tr.times[k]),
    ))
    k, i = np.unravel_index(int(np.argmin(tr.xi)), tr.xi.shape)
    min_xi = float(tr.xi[k, i])
    negative = min_xi < 0
    report.add(AuditCheck(
        "second_law.min_xi", _status(negative, sc.material), max(-min_xi, 0.0),
        x=float(x[i]), t=float(tr.times[k]),
        detail={"min_xi": min_xi, "min_xi_per_snapshot": tr.min_xi.tolist(),
                "argmin_x_per_snapshot": x[np.argmin(tr.xi, axis=1)].tolist()},
    ))
    if tr.theory is Model.TYPE2_ALPHA:
        report.add(check_obtuse_angle_type2(tr))
    return report


def check_obtuse_angle_type2(tr: Trajectory, band=1e-3, required=0.99) -> AuditCheck:
    """Sign identity ``sign(q . grad theta) = -sign(d/dt |grad alpha|^2)`` along a Type II run.

    Time derivatives are centred differences between snapshots. Pairs where
    either side is within ``band`` (relative to its largest magnitude) of zero
    are excluded. Non-periodic grids are checked on interior nodes only.
    """
    if tr.theory is not Model.TYPE2_ALPHA:
        raise UsageError("the obtuse-angle check applies to Type II trajectories")
    grid = tr.grid
    if len(tr.times) < 3:
        return AuditCheck("heat_conduction.obtuse_angle[II]", PASS, 0.0, detail={"pairs": 0})

    def grad(f):
        if grid.periodic:
            return (np.roll(f, -1, axis=-1) - np.roll(f, 1, axis=-1)) / (2 * grid.dx)
        g = np.zeros_like(f)
        g[..., 1:-1] = (f[..., 2:] - f[..., :-2]) / (2 * grid.dx)
        return g

    ga2 = grad(tr.alpha) ** 2
    rate = (ga2[2:] - ga2[:-2]) / (tr.times[2:] - tr.times[:-2])[:, None]
    lhs = tr.q[1:-1] * grad(tr.theta[1:-1])
    if not grid.periodic:
        rate, lhs = rate[:, 1:-1], lhs[:, 1:-1]
    keep = (np.abs(rate) > band * max(np.abs(rate).max(), 1e-300)) & (
        np.abs(lhs) > band * max(np.abs(lhs).max(), 1e-300)
    )
    pairs = int(keep.sum())
    if pairs == 0:
        return AuditCheck("heat_conduction.obtuse_angle[II]", PASS, 0.0, detail={"pairs": 0})
    match = np.sign(lhs[keep]) == -np.sign(rate[keep])
    fraction = float(match.mean())
    # q.grad(theta) > 0 somewhere means the classic heat-conduction inequality fails there,
    # which Type II does not enforce
    obtuse_violations = int(np.sum(lhs[keep] > 0))
    return AuditCheck(
        "heat_conduction.obtuse_angle[II]",
        PASS if fraction >= required else FAIL,
        1.0 - fraction,
        detail={"pairs": pairs, "match_fraction": fraction,
                "heat_conduction_violations": obtuse_violations},
    )
