"""Constitutive response of a rigid heat conductor.

Four constitutive sets are provided: classical Fourier conduction and the
three Green-Naghdi types. Each evaluation returns the sextuple
``(psi, eta, eps, q, h, xi)`` at a point-local state.

All quantities are densities per unit volume. Vector quantities follow a
simple shape convention so the same code serves scalar probes and whole grid
fields: a gradient whose ``ndim`` exceeds that of ``theta`` carries the
spatial components on its last axis; otherwise it is the single component of
a one-dimensional problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from enum import Enum

import numpy as np

from .errors import DomainError, UsageError


class Theory(str, Enum):
    CLASSIC = "classic"
    TYPE_I = "I"
    TYPE_II = "II"
    TYPE_III = "III"


@dataclass(frozen=True)
class MaterialParams:
    """Scalar material moduli.

    ``lam`` is the volumetric heat capacity, ``kappa`` the Fourier
    conductivity, ``kappa_star`` and ``kappa_2star`` the additional Type II/III
    moduli and ``theta0`` the reference temperature.

    The default constructor enforces ``lam > 0``, ``theta0 > 0`` and
    non-negative conductivities. Use :meth:`unchecked` to build parameter sets
    with negative conductivities on purpose (sign-violation probes).
    """

    lam: float = 1.0
    kappa: float = 0.0
    kappa_star: float = 0.0
    kappa_2star: float = 0.0
    theta0: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value):
                raise DomainError(f"{f.name} must be finite, got {value!r}")
        if self.lam <= 0:
            raise DomainError(f"lam must be positive, got {self.lam!r}")
        if self.theta0 <= 0:
            raise DomainError(f"theta0 must be positive, got {self.theta0!r}")
        if getattr(self, "_unchecked", False):
            return
        for name in ("kappa", "kappa_star", "kappa_2star"):
            if getattr(self, name) < 0:
                raise DomainError(
                    f"{name} must be non-negative, got {getattr(self, name)!r}; "
                    "use MaterialParams.unchecked() to probe negative moduli"
                )

    @classmethod
    def unchecked(cls, lam=1.0, kappa=0.0, kappa_star=0.0, kappa_2star=0.0, theta0=1.0):
        """Build parameters without the sign checks on the conductivities."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "_unchecked", True)
        cls.__init__(obj, lam, kappa, kappa_star, kappa_2star, theta0)
        return obj

    @property
    def is_unchecked(self) -> bool:
        return getattr(self, "_unchecked", False)

    @property
    def sign_violations(self) -> list[str]:
        """Names of conductivities that are negative."""
        return [n for n in ("kappa", "kappa_star", "kappa_2star") if getattr(self, n) < 0]

    def replace(self, **changes) -> MaterialParams:
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        if self.is_unchecked:
            return MaterialParams.unchecked(**values)
        return MaterialParams(**values)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _check_theta(theta):
    theta = np.asarray(theta, dtype=float)
    if not np.all(theta > 0):
        raise DomainError("absolute temperature must be positive")


@dataclass(frozen=True, eq=False)
class StateI:
    """Type I (and classical) state: temperature and its gradient."""

    theta: float | np.ndarray
    grad_theta: float | np.ndarray

    def __post_init__(self):
        _check_theta(self.theta)


@dataclass(frozen=True, eq=False)
class StateII:
    """Type II state: thermal displacement, temperature, displacement gradient."""

    alpha: float | np.ndarray
    theta: float | np.ndarray
    grad_alpha: float | np.ndarray

    def __post_init__(self):
        _check_theta(self.theta)


@dataclass(frozen=True, eq=False)
class StateIII:
    """Type III state: the Type II list plus the temperature gradient."""

    alpha: float | np.ndarray
    theta: float | np.ndarray
    grad_alpha: float | np.ndarray
    grad_theta: float | np.ndarray

    def __post_init__(self):
        _check_theta(self.theta)

    def project(self) -> StateII:
        return StateII(self.alpha, self.theta, self.grad_alpha)


@dataclass(frozen=True, eq=False)
class ConstitutiveResponse:
    psi: float | np.ndarray
    eta: float | np.ndarray
    eps: float | np.ndarray
    q: float | np.ndarray
    h: float | np.ndarray
    xi: float | np.ndarray


@dataclass(frozen=True, eq=False)
class FreeEnergyPartials:
    """Closed-form partial derivatives of the free energy at a state."""

    d_theta: float | np.ndarray
    d_alpha: float | np.ndarray = 0.0
    d_grad_alpha: float | np.ndarray = 0.0
    d_grad_theta: float | np.ndarray = 0.0


def _is_vector(theta, grad) -> bool:
    return np.ndim(grad) > np.ndim(theta)


def dot(a, b, vector: bool):
    """Inner product of two vector quantities under the module's shape rule."""
    if vector:
        return np.sum(np.multiply(a, b), axis=-1)
    return np.multiply(a, b)


def scale(s, v, vector: bool):
    """Multiply a vector quantity by a scalar (field)."""
    if vector:
        return np.asarray(s)[..., None] * v
    return np.multiply(s, v)


def _response(psi, eta, theta, h, xi, vector):
    return ConstitutiveResponse(
        psi=psi,
        eta=eta,
        eps=psi + theta * eta,
        q=scale(theta, h, vector),
        h=h,
        xi=xi,
    )


def eval_classic(p: MaterialParams, s: StateI) -> ConstitutiveResponse:
    """Fourier conduction with the logarithmic free energy."""
    theta = np.asarray(s.theta, dtype=float)[()]
    g = s.grad_theta
    vec = _is_vector(theta, g)
    log_theta = np.log(theta)
    psi = -p.lam * theta * (log_theta - 1.0)
    eta = p.lam * log_theta
    h = scale(-p.kappa / theta, g, vec)
    q = scale(theta, h, vec)
    xi = -dot(q, g, vec) / theta**2
    return ConstitutiveResponse(psi=psi, eta=eta, eps=psi + theta * eta, q=q, h=h, xi=xi)


def eval_type1(p: MaterialParams, s: StateI) -> ConstitutiveResponse:
    theta = np.asarray(s.theta, dtype=float)[()]
    g = s.grad_theta
    vec = _is_vector(theta, g)
    c = p.kappa / p.theta0
    psi = -0.5 * p.lam * theta**2 / p.theta0
    eta = p.lam * theta / p.theta0
    h = scale(-c, g, vec)
    xi = c * dot(g, g, vec) / theta
    return _response(psi, eta, theta, h, xi, vec)


def eval_type2(p: MaterialParams, s: StateII) -> ConstitutiveResponse:
    theta = np.asarray(s.theta, dtype=float)[()]
    ga = s.grad_alpha
    vec = _is_vector(theta, ga)
    cs = p.kappa_star / p.theta0
    psi = -0.5 * p.lam * theta**2 / p.theta0 + 0.5 * cs * dot(ga, ga, vec)
    eta = p.lam * theta / p.theta0
    h = scale(-cs, ga, vec)
    xi = np.zeros_like(theta)[()]
    return _response(psi, eta, theta, h, xi, vec)


def eval_type3(p: MaterialParams, s: StateIII) -> ConstitutiveResponse:
    theta = np.asarray(s.theta, dtype=float)[()]
    ga, gt = s.grad_alpha, s.grad_theta
    vec = _is_vector(theta, ga)
    if _is_vector(theta, gt) != vec:
        raise UsageError("grad_alpha and grad_theta must have the same vector layout")
    cs = p.kappa_star / p.theta0
    psi = -0.5 * p.lam * theta**2 / p.theta0 + 0.5 * cs * dot(ga, ga, vec)
    eta = p.lam * theta / p.theta0
    h = scale(-(p.kappa_star + p.kappa_2star) / p.theta0, ga, vec) + scale(
        -p.kappa / p.theta0, gt, vec
    )
    drive = scale(p.kappa_2star / p.theta0, ga, vec) + scale(p.kappa / p.theta0, gt, vec)
    xi = dot(drive, gt, vec) / theta
    return _response(psi, eta, theta, h, xi, vec)


_EVALUATORS = {
    Theory.CLASSIC: (eval_classic, StateI),
    Theory.TYPE_I: (eval_type1, StateI),
    Theory.TYPE_II: (eval_type2, StateII),
    Theory.TYPE_III: (eval_type3, StateIII),
}


def _check_state(theory, state):
    theory = Theory(theory)
    expected = _EVALUATORS[theory][1]
    if type(state) is not expected:
        raise UsageError(
            f"theory {theory.value!r} expects {expected.__name__}, got {type(state).__name__}"
        )
    return theory


def evaluate(theory, p: MaterialParams, state) -> ConstitutiveResponse:
    """Dispatch to the evaluator of ``theory``."""
    theory = _check_state(theory, state)
    return _EVALUATORS[theory][0](p, state)


def free_energy_partials(theory, p: MaterialParams, state) -> FreeEnergyPartials:
    """Closed-form partial derivatives of the free energy of ``theory``."""
    theory = _check_state(theory, state)
    theta = np.asarray(state.theta, dtype=float)[()]
    if theory is Theory.CLASSIC:
        return FreeEnergyPartials(d_theta=-p.lam * np.log(theta))
    d_theta = -p.lam * theta / p.theta0
    if theory is Theory.TYPE_I:
        return FreeEnergyPartials(d_theta=d_theta)
    ga = state.grad_alpha
    return FreeEnergyPartials(
        d_theta=d_theta,
        d_alpha=np.zeros_like(theta)[()],
        d_grad_alpha=np.multiply(p.kappa_star / p.theta0, ga),
    )


def xi_from_restrictions(theory, p: MaterialParams, state):
    """Internal entropy production recovered from the thermodynamic restrictions.

    Type I and classical use the heat influx alone, Type II the
    thermal-displacement derivative of the free energy, and Type III the
    combination of both with the free-energy derivative in the displacement
    gradient.
    """
    theory = _check_state(theory, state)
    theta = np.asarray(state.theta, dtype=float)[()]
    resp = _EVALUATORS[theory][0](p, state)
    if theory in (Theory.CLASSIC, Theory.TYPE_I):
        vec = _is_vector(theta, state.grad_theta)
        return -dot(resp.q, state.grad_theta, vec) / theta**2
    partials = free_energy_partials(theory, p, state)
    if theory is Theory.TYPE_II:
        return -partials.d_alpha
    vec = _is_vector(theta, state.grad_theta)
    bracket = partials.d_grad_alpha + scale(1.0 / theta, resp.q, vec)
    return -partials.d_alpha - dot(bracket, state.grad_theta, vec) / theta
