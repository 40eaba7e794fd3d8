"""Post-processing: dispersion roots, measured rates and frequencies, convergence studies."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .constitutive import MaterialParams
from .errors import ConfigurationError, InsufficientSignalError
from .solvers import Model, Profile, Scenario, Trajectory, solve

SIGNAL_FLOOR = 1e-12
SKIP_FRACTION = 0.1


@dataclass(frozen=True)
class DispersionResult:
    """Complex growth rates of a plane wave ``exp(i k x + sigma t)``.

    ``roots[0]`` has the larger imaginary part (or the larger real part when
    both are real).
    """

    k: float
    roots: tuple[complex, complex]
    lam: float
    kappa: float
    stiffness: float

    @property
    def damping(self) -> float:
        return max(r.real for r in self.roots)

    @property
    def frequency(self) -> float:
        return abs(self.roots[0].imag)

    def residual(self) -> float:
        """Largest relative residual of the dispersion polynomial over both roots."""
        k2 = self.k * self.k
        out = 0.0
        for s in self.roots:
            terms = (self.lam * s * s, self.kappa * k2 * s, self.stiffness * k2)
            scale = sum(abs(t) for t in terms)
            out = max(out, abs(sum(terms)) / scale if scale else 0.0)
        return out


def dispersion_roots(p: MaterialParams, k: float, stiffness: float | None = None) -> DispersionResult:
    """Roots of ``lam s^2 + kappa k^2 s + K k^2 = 0`` with ``K = kappa_star`` by default.

    Uses the cancellation-free form of the quadratic formula.
    """
    if k == 0:
        raise ValueError("wavenumber must be nonzero")
    K = p.kappa_star if stiffness is None else stiffness
    a, b, c = p.lam, p.kappa * k * k, K * k * k
    disc = b * b - 4.0 * a * c
    if disc >= 0:
        big = -0.5 * (b + math.copysign(math.sqrt(disc), b))
        r1, r2 = (0j, 0j) if big == 0 else (complex(big / a), complex(c / big))
        roots = tuple(sorted((r1, r2), key=lambda z: z.real, reverse=True))
    else:
        re, im = -b / (2 * a) + 0.0, math.sqrt(-disc) / (2 * a)  # + 0.0 drops a signed zero
        roots = (complex(re, abs(im)), complex(re, -abs(im)))
    return DispersionResult(float(k), roots, a, p.kappa, K)


# -- mode extraction ----------------------------------------------------------


def mode_index(grid, k: float) -> int:
    m = k * grid.length / (2.0 * math.pi)
    mi = int(round(m))
    if mi < 1 or abs(m - mi) > 1e-9 * max(1.0, m) or mi > grid.n // 2:
        raise ValueError(f"wavenumber {k!r} is not a resolved Fourier mode of this grid")
    return mi


def mode_coefficients(tr: Trajectory, k: float, field: str = "theta") -> np.ndarray:
    """Complex amplitude of wavenumber ``k`` in ``field - spatial mean`` at every snapshot."""
    data = getattr(tr, field)
    m = mode_index(tr.grid, k)
    f = data - data.mean(axis=1, keepdims=True)
    phase = np.exp(-2j * np.pi * m * np.arange(tr.grid.n) / tr.grid.n)
    return 2.0 * (f @ phase) / tr.grid.n


def _window(times, *series, skip=SKIP_FRACTION):
    start = int(math.floor(skip * len(times)))
    return (times[start:],) + tuple(s[start:] for s in series)


def _real_projection(c: np.ndarray) -> np.ndarray:
    """Project complex coefficients on their principal axis (exact for standing waves)."""
    pts = np.stack([c.real, c.imag])
    w, v = np.linalg.eigh(pts @ pts.T)
    axis = v[:, np.argmax(w)]
    return axis[0] * c.real + axis[1] * c.imag


def _sign_changes(a: np.ndarray) -> int:
    s = np.sign(a)
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def _zero_crossings(t: np.ndarray, a: np.ndarray) -> np.ndarray:
    idx = np.nonzero((a[:-1] > 0) != (a[1:] > 0))[0]
    idx = idx[a[idx] != a[idx + 1]]
    frac = a[idx] / (a[idx] - a[idx + 1])
    return t[idx] + frac * (t[idx + 1] - t[idx])


def _linear_log_fit(t, amp):
    return float(np.polyfit(t, np.log(amp), 1)[0])


def fit_damped_oscillation(t: np.ndarray, a: np.ndarray, omega_guess: float, rate_guess: float = 0.0):
    """Least-squares fit of ``exp(g t) (P cos(w t) + Q sin(w t))``; returns ``(g, w)``.

    The linear coefficients are eliminated (variable projection), leaving a
    two-parameter nonlinear problem.
    """
    t0 = t[0]
    tau = t - t0
    scale = float(np.max(np.abs(a)))

    def design(g, w):
        e = np.exp(g * tau)
        return np.stack([e * np.cos(w * tau), e * np.sin(w * tau)], axis=1)

    def resid(z):
        A = design(*z)
        coef, *_ = np.linalg.lstsq(A, a / scale, rcond=None)
        return A @ coef - a / scale

    sol = least_squares(resid, x0=[rate_guess, omega_guess], method="lm", xtol=1e-15, ftol=1e-15)
    return float(sol.x[0]), abs(float(sol.x[1]))


@dataclass(frozen=True)
class ModeFit:
    rate: float
    frequency: float
    oscillating: bool


def measure_mode(tr: Trajectory, k: float, field: str = "theta") -> ModeFit:
    """Decay rate and angular frequency of Fourier mode ``k``.

    A non-oscillating mode gets a straight-line fit of its log amplitude. An
    oscillating one is fitted with a damped cosine, seeded by zero crossings
    and the slope of the log envelope through the local maxima.
    """
    c = mode_coefficients(tr, k, field)
    t, c = _window(tr.times, c)
    amp = np.abs(c)
    if len(t) < 3 or amp.max() < SIGNAL_FLOOR:
        raise InsufficientSignalError(f"mode k={k!r} has amplitude below {SIGNAL_FLOOR}")
    a = _real_projection(c)
    if _sign_changes(a) < 2:
        if np.any(amp < SIGNAL_FLOOR):
            raise InsufficientSignalError(f"mode k={k!r} decays below {SIGNAL_FLOOR} inside the window")
        return ModeFit(_linear_log_fit(t, amp), 0.0, False)
    crossings = _zero_crossings(t, a)
    omega0 = math.pi / float(np.mean(np.diff(crossings))) if len(crossings) > 1 else math.pi / (t[-1] - t[0])
    peaks = [i for i in range(1, len(amp) - 1) if amp[i] >= amp[i - 1] and amp[i] > amp[i + 1]]
    rate0 = _linear_log_fit(t[peaks], amp[peaks]) if len(peaks) >= 2 else 0.0
    g, w = fit_damped_oscillation(t, a, omega0, rate0)
    return ModeFit(g, w, True)


def measure_decay_rate(tr: Trajectory, k: float) -> float:
    """Exponential rate of the ``k`` Fourier mode of ``theta - mean(theta)``; negative means decay."""
    return measure_mode(tr, k).rate


def measure_frequency(tr: Trajectory, probe: int, min_crossings: int = 5) -> float:
    """Angular frequency from the mean zero-crossing interval of ``theta[probe](t) - time mean``."""
    signal = tr.theta[:, probe]
    a = signal - signal.mean()
    if np.max(np.abs(a)) < SIGNAL_FLOOR:
        raise InsufficientSignalError(f"no oscillation at probe {probe}")
    crossings = _zero_crossings(tr.times, a)
    if len(crossings) < min_crossings:
        raise InsufficientSignalError(
            f"probe {probe} has {len(crossings)} zero crossings, need at least {min_crossings}"
        )
    return math.pi * (len(crossings) - 1) / (crossings[-1] - crossings[0])


# -- oracles and convergence --------------------------------------------------


def _sine_setup(sc: Scenario):
    prof = sc.theta_init
    if not sc.grid.periodic or not isinstance(prof, Profile) or prof.kind not in ("sine", "constant"):
        raise ConfigurationError(
            "convergence oracles need periodic sinusoidal (or constant) initial temperature",
            "theta_init",
        )
    if not sc.source.is_zero:
        raise ConfigurationError("convergence oracles need a zero source", "source")
    if sc.alpha_init is not None and np.any(np.asarray(sc.initial("alpha")) != 0):
        raise ConfigurationError("convergence oracles need zero initial displacement", "alpha_init")
    return prof


def oracle(sc: Scenario, t: float) -> np.ndarray:
    """Closed-form temperature for the classical sinusoid and the Type II standing wave."""
    prof = _sine_setup(sc)
    x, p = sc.grid.x, sc.material
    if prof.kind == "constant" or prof.amplitude == 0:
        return np.full(sc.grid.n, prof.offset)
    k = prof.wavenumber
    shape = prof.amplitude * np.sin(k * x + prof.phase)
    if sc.theory is Model.CLASSICAL:
        return prof.offset + math.exp(-p.kappa * k * k * t / p.lam) * shape
    if sc.theory is Model.TYPE2_ALPHA:
        return prof.offset + math.cos(k * math.sqrt(p.kappa_star / p.lam) * t) * shape
    raise ConfigurationError(f"no closed-form oracle for {sc.theory.value}", "theory")


@dataclass(frozen=True)
class ConvergenceTable:
    n: tuple[int, ...]
    dx: tuple[float, ...]
    dt: tuple[float, ...]
    error: tuple[float, ...]
    order: float

    def rows(self):
        for row in zip(self.n, self.dx, self.dt, self.error):
            yield dict(zip(("n", "dx", "dt", "error"), row))


def fitted_order(dx, error) -> float:
    dx, error = np.asarray(dx, float), np.asarray(error, float)
    if np.any(error <= 0):
        return math.nan
    return float(np.polyfit(np.log(dx), np.log(error), 1)[0])


def convergence_study(sc: Scenario, levels: int = 4) -> ConvergenceTable:
    """Max-norm error against the closed-form oracle at ``t_end`` under repeated halving of dx.

    ``dt`` scales with ``dx^2`` for first-order-in-time integrators and with
    ``dx`` for the second-order wave integrator, so that both error sources
    shrink like ``dx^2``.
    """
    if levels < 2:
        raise ValueError("a convergence study needs at least two levels")
    _sine_setup(sc)
    dt_power = 1 if sc.theory.second_order else 2
    ns, dxs, dts, errs = [], [], [], []
    level = sc
    for i in range(levels):
        if i:
            level = level.refined(2, dt_power)
        tr = solve(level)
        errs.append(float(np.max(np.abs(tr.theta[-1] - oracle(level, tr.times[-1])))))
        ns.append(level.grid.n)
        dxs.append(level.grid.dx)
        dts.append(level.dt)
    return ConvergenceTable(tuple(ns), tuple(dxs), tuple(dts), tuple(errs), fitted_order(dxs, errs))


def dominant_wavenumber(sc: Scenario) -> float | None:
    prof = sc.theta_init
    if isinstance(prof, Profile) and prof.kind == "sine" and prof.amplitude != 0 and sc.grid.periodic:
        return prof.wavenumber
    return None

