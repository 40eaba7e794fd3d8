"""Scenario description, analytic profiles and supplies, and trajectories."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from ..constitutive import MaterialParams
from ..errors import ConfigurationError
from ..grid import Grid1D


class Model(str, Enum):
    CLASSICAL = "Classical"
    TYPE1_NONLINEAR = "TypeI_Nonlinear"
    TYPE1_XIFORM = "TypeI_XiForm"
    TYPE2_ALPHA = "TypeII_Alpha"
    TYPE3_LINEARIZED = "TypeIII_Linearized"
    TYPE3_FULL = "TypeIII_Full"

    @property
    def second_order(self) -> bool:
        """True when the model is integrated as a second-order-in-time system."""
        return self in (Model.TYPE2_ALPHA, Model.TYPE3_LINEARIZED, Model.TYPE3_FULL)


PROFILE_KINDS = ("constant", "sine", "gaussian", "linear")


@dataclass(frozen=True)
class Profile:
    """Named analytic initial profile ``f(x)``.

    * ``constant``: ``offset``
    * ``sine``: ``offset + amplitude * sin(wavenumber * x + phase)``
    * ``gaussian``: ``offset + amplitude * exp(-((x - center) / width)**2 / 2)``
    * ``linear``: ``offset + slope * x``
    """

    kind: str = "constant"
    offset: float = 0.0
    amplitude: float = 0.0
    wavenumber: float = 1.0
    phase: float = 0.0
    center: float = 0.0
    width: float = 1.0
    slope: float = 0.0

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ConfigurationError(f"unknown profile kind {self.kind!r}", "kind")
        if self.kind == "gaussian" and not self.width > 0:
            raise ConfigurationError("gaussian width must be positive", "width")

    @classmethod
    def constant(cls, value):
        return cls("constant", offset=float(value))

    @classmethod
    def sine(cls, offset, amplitude, wavenumber=1.0, phase=0.0):
        return cls("sine", offset=offset, amplitude=amplitude, wavenumber=wavenumber, phase=phase)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            return np.full_like(x, self.offset)
        if self.kind == "sine":
            return self.offset + self.amplitude * np.sin(self.wavenumber * x + self.phase)
        if self.kind == "gaussian":
            return self.offset + self.amplitude * np.exp(-0.5 * ((x - self.center) / self.width) ** 2)
        return self.offset + self.slope * x

    def derivative(self, x):
        """Analytic ``df/dx``."""
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            return np.zeros_like(x)
        if self.kind == "sine":
            return self.amplitude * self.wavenumber * np.cos(self.wavenumber * x + self.phase)
        if self.kind == "gaussian":
            u = (x - self.center) / self.width
            return -self.amplitude * u / self.width * np.exp(-0.5 * u * u)
        return np.full_like(x, self.slope)


SOURCE_KINDS = ("zero", "constant", "gaussian", "sinusoidal", "custom")


@dataclass(frozen=True)
class Source:
    """External supply, declared either as energy supply ``r`` or entropy supply ``s``.

    * ``constant``: ``amplitude``
    * ``gaussian``: ``amplitude * exp(-((x-center)/width)^2/2) * g(t)`` with
      ``g(t) = exp(-((t-t_center)/t_width)^2/2)``, or ``g = 1`` when
      ``t_width`` is ``None``
    * ``sinusoidal``: ``amplitude * sin(wavenumber x + phase) * cos(omega t)``
    * ``custom``: Python callables ``func(x, t)`` and optional ``dfunc(x, t)``
    """

    kind: str = "zero"
    supply: str = "r"
    amplitude: float = 0.0
    center: float = 0.0
    width: float = 1.0
    t_center: float = 0.0
    t_width: float | None = None
    wavenumber: float = 1.0
    phase: float = 0.0
    omega: float = 0.0
    func: Callable | None = field(default=None, compare=False, repr=False)
    dfunc: Callable | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in SOURCE_KINDS:
            raise ConfigurationError(f"unknown source kind {self.kind!r}", "source.kind")
        if self.supply not in ("r", "s"):
            raise ConfigurationError("supply must be 'r' or 's'", "source.supply")
        if self.kind == "custom" and self.func is None:
            raise ConfigurationError("custom source needs func", "source.func")
        if self.kind == "gaussian" and not self.width > 0:
            raise ConfigurationError("gaussian width must be positive", "source.width")
        if self.t_width is not None and not self.t_width > 0:
            raise ConfigurationError("t_width must be positive", "source.t_width")

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def custom(cls, func, dfunc=None, supply="r"):
        return cls("custom", supply=supply, func=func, dfunc=dfunc)

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or (self.kind != "custom" and self.amplitude == 0.0)

    def _time_factor(self, t):
        if self.t_width is None:
            return 1.0, 0.0
        u = (t - self.t_center) / self.t_width
        g = math.exp(-0.5 * u * u)
        return g, -u / self.t_width * g

    def value(self, x, t):
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "constant":
            return np.full_like(x, self.amplitude)
        if self.kind == "gaussian":
            g, _ = self._time_factor(t)
            return self.amplitude * np.exp(-0.5 * ((x - self.center) / self.width) ** 2) * g
        if self.kind == "sinusoidal":
            return self.amplitude * np.sin(self.wavenumber * x + self.phase) * math.cos(self.omega * t)
        return np.asarray(self.func(x, t), dtype=float) * np.ones_like(x)

    def time_derivative(self, x, t):
        """Analytic time derivative of the supply."""
        x = np.asarray(x, dtype=float)
        if self.kind in ("zero", "constant"):
            return np.zeros_like(x)
        if self.kind == "gaussian":
            _, dg = self._time_factor(t)
            return self.amplitude * np.exp(-0.5 * ((x - self.center) / self.width) ** 2) * dg
        if self.kind == "sinusoidal":
            return (
                -self.amplitude
                * self.omega
                * np.sin(self.wavenumber * x + self.phase)
                * math.sin(self.omega * t)
            )
        if self.dfunc is None:
            raise ConfigurationError(
                "custom source has no analytic time derivative", "source.dfunc"
            )
        return np.asarray(self.dfunc(x, t), dtype=float) * np.ones_like(x)


@dataclass(frozen=True, eq=False)
class Scenario:
    """Everything needed to run one simulation.

    Initial fields are :class:`Profile` objects (re-sampled on refined grids)
    or arrays matching the grid. ``alpha_init`` defaults to zero.
    ``theta_dot_init`` is used by the linearized Type III model; when omitted
    it is taken consistent with the first-order form of that model.

    ``scheme`` selects explicit or implicit stepping for the first-order
    models. ``near_isothermal`` switches supply conversion from ``r = theta s``
    to ``r = theta0 s``. ``pseudolinear`` selects the pseudolinearised
    right-hand side of the full Type III model.
    """

    grid: Grid1D
    material: MaterialParams
    theory: Model
    theta_init: Profile | np.ndarray
    dt: float
    t_end: float
    alpha_init: Profile | np.ndarray | None = None
    theta_dot_init: Profile | np.ndarray | None = None
    source: Source = field(default_factory=Source.zero)
    output_stride: int = 1
    scheme: str = "explicit"
    near_isothermal: bool = False
    pseudolinear: bool = False

    def __post_init__(self):
        object.__setattr__(self, "theory", Model(self.theory))
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigurationError(f"dt must be positive, got {self.dt!r}", "dt")
        if not self.t_end >= self.dt:
            raise ConfigurationError(f"t_end={self.t_end!r} must be >= dt={self.dt!r}", "t_end")
        if int(self.output_stride) != self.output_stride or self.output_stride < 1:
            raise ConfigurationError("output_stride must be a positive integer", "output_stride")
        if self.scheme not in ("explicit", "implicit"):
            raise ConfigurationError(f"unknown scheme {self.scheme!r}", "scheme")
        if self.pseudolinear and self.theory is not Model.TYPE3_FULL:
            raise ConfigurationError("pseudolinear applies to TypeIII_Full only", "pseudolinear")
        theta = self.initial("theta")
        if not np.all(theta > 0):
            i = int(np.argmin(theta))
            raise ConfigurationError(
                f"initial temperature must be positive everywhere (x={self.grid.x[i]!r})",
                "theta_init",
            )
        self.initial("alpha")
        self.initial("theta_dot")

    @property
    def steps(self) -> int:
        """Number of time steps; ``t_end`` is rounded to a whole number of steps."""
        return max(1, int(round(self.t_end / self.dt)))

    def initial(self, name):
        """Sampled initial field ``theta``, ``alpha`` or ``theta_dot`` (``None`` if unset)."""
        value = getattr(self, f"{name}_init")
        if value is None:
            if name == "alpha":
                return np.zeros(self.grid.n)
            return None
        if isinstance(value, Profile):
            value = value(self.grid.x)
        try:
            return self.grid.field(value)
        except ValueError as exc:
            raise ConfigurationError(str(exc), f"{name}_init") from None

    def with_changes(self, **changes) -> Scenario:
        values = {k: getattr(self, k) for k in self.__dataclass_fields__}
        values.update(changes)
        return Scenario(**values)

    def refined(self, factor=2, dt_power=1) -> Scenario:
        """Scenario on a grid refined by ``factor`` with ``dt`` divided by ``factor**dt_power``."""
        for name in ("theta_init", "alpha_init", "theta_dot_init"):
            if isinstance(getattr(self, name), np.ndarray):
                raise ConfigurationError("refinement needs analytic initial profiles", name)
        dt = self.dt / factor**dt_power
        return self.with_changes(
            grid=self.grid.refined(factor),
            dt=dt,
            output_stride=self.output_stride * factor**dt_power,
        )


@dataclass(frozen=True, eq=False)
class Budgets:
    """Per-snapshot budget records.

    ``energy``/``entropy`` are the integrals of the energy and entropy
    densities. ``energy_in`` is the time-integrated boundary heat inflow plus
    energy supply, ``entropy_in`` the time-integrated entropy inflow plus
    entropy supply and ``entropy_produced`` the time-integrated internal
    production, all accumulated with the trapezoidal rule over every step.
    """

    energy: np.ndarray
    entropy: np.ndarray
    energy_in: np.ndarray
    entropy_in: np.ndarray
    entropy_produced: np.ndarray

    COLUMNS = ("energy", "entropy", "energy_in", "entropy_in", "entropy_produced")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Snapshots of a completed run. Field arrays have shape ``(snapshots, n)``."""

    theory: Model
    grid: Grid1D
    dt: float
    steps: int
    times: np.ndarray
    theta: np.ndarray
    alpha: np.ndarray
    xi: np.ndarray
    q: np.ndarray
    h: np.ndarray
    budgets: Budgets
    integrator_order: int = 1
    budget_model: str = "exact"
    notes: tuple = ()

    def __post_init__(self):
        m = len(self.times)
        for name in ("theta", "alpha", "xi", "q", "h"):
            arr = getattr(self, name)
            if arr.shape != (m, self.grid.n):
                raise ValueError(f"{name} has shape {arr.shape}, expected {(m, self.grid.n)}")
        for name in Budgets.COLUMNS:
            if len(getattr(self.budgets, name)) != m:
                raise ValueError(f"budget column {name} has wrong length")

    @property
    def min_xi(self) -> np.ndarray:
        return self.xi.min(axis=1)
