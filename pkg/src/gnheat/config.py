"""JSON run configuration: schema, loading and conversion to a :class:`Scenario`.

Unknown keys anywhere in the document are rejected. See the README for an
annotated example.
"""

from __future__ import annotations

import itertools
import json
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .constitutive import MaterialParams
from .errors import ConfigurationError
from .grid import BoundaryCondition, Grid1D
from .solvers import Model, Profile, Scenario, Source

SCHEMA_VERSION = 1

MATERIAL_KEYS = ("lambda", "kappa", "kappa_star", "kappa_2star", "theta0")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)


class MaterialConfig(_Strict):
    lam: float = Field(alias="lambda")
    kappa: float = 0.0
    kappa_star: float = 0.0
    kappa_2star: float = 0.0
    theta0: float = 1.0

    def build(self) -> MaterialParams:
        return MaterialParams(self.lam, self.kappa, self.kappa_star, self.kappa_2star, self.theta0)


class BoundaryConfig(_Strict):
    kind: Literal["periodic", "dirichlet", "neumann"] = "periodic"
    left: float = 0.0
    right: float = 0.0


class GridConfig(_Strict):
    n: int = Field(ge=3)
    length: float = Field(gt=0)
    x0: float = 0.0
    bc: BoundaryConfig = BoundaryConfig()

    def build(self) -> Grid1D:
        bc = BoundaryCondition(self.bc.kind, self.bc.left, self.bc.right)
        return Grid1D.from_length(self.n, self.length, self.x0, bc)


class ProfileConfig(_Strict):
    kind: Literal["constant", "sine", "gaussian", "linear"] = "constant"
    offset: float = 0.0
    amplitude: float = 0.0
    wavenumber: float = 1.0
    phase: float = 0.0
    center: float = 0.0
    width: float = 1.0
    slope: float = 0.0

    def build(self) -> Profile:
        return Profile(**self.model_dump())


class InitialConfig(_Strict):
    theta: ProfileConfig
    alpha: Optional[ProfileConfig] = None
    theta_dot: Optional[ProfileConfig] = None


class SourceConfig(_Strict):
    """Named analytic source families; inline expressions are deliberately unsupported."""

    kind: Literal["zero", "constant", "gaussian", "sinusoidal"] = "zero"
    supply: Literal["r", "s"] = "r"
    amplitude: float = 0.0
    center: float = 0.0
    width: float = 1.0
    t_center: float = 0.0
    t_width: Optional[float] = None
    wavenumber: float = 1.0
    phase: float = 0.0
    omega: float = 0.0

    def build(self) -> Source:
        return Source(**self.model_dump())


class IntegratorConfig(_Strict):
    dt: float = Field(gt=0)
    t_end: float = Field(gt=0)
    scheme: Literal["explicit", "implicit"] = "explicit"
    output_stride: int = Field(default=1, ge=1)
    near_isothermal: bool = False
    pseudolinear: bool = False


class OutputConfig(_Strict):
    directory: str = "out"
    trajectory: bool = True


class ReportConfig(_Strict):
    audit: bool = True
    dispersion: bool = True
    convergence: bool = False
    convergence_levels: int = Field(default=4, ge=2)
    probe: Optional[int] = None


class RunConfig(_Strict):
    schema_version: Literal[1]
    theory: Model
    material: MaterialConfig
    grid: GridConfig
    initial: InitialConfig
    source: SourceConfig = SourceConfig()
    integrator: IntegratorConfig
    outputs: OutputConfig = OutputConfig()
    reports: ReportConfig = ReportConfig()
    sweep: Optional[dict[str, list[float]]] = None

    @field_validator("sweep")
    @classmethod
    def _sweep_keys(cls, v):
        if v is None:
            return v
        if not v:
            raise ValueError("sweep grid must name at least one parameter")
        for key, values in v.items():
            if key not in MATERIAL_KEYS:
                raise ValueError(f"sweep key {key!r} is not one of {', '.join(MATERIAL_KEYS)}")
            if not values:
                raise ValueError(f"sweep values for {key!r} are empty")
        return v

    # -- conversion ---------------------------------------------------------

    def to_scenario(self) -> Scenario:
        init, integ = self.initial, self.integrator
        try:
            material = self.material.build()
        except ValueError as err:
            raise ConfigurationError(str(err), "material") from None
        try:
            grid = self.grid.build()
        except ValueError as err:
            raise ConfigurationError(str(err), "grid") from None
        return Scenario(
            grid=grid,
            material=material,
            theory=self.theory,
            theta_init=init.theta.build(),
            dt=integ.dt,
            t_end=integ.t_end,
            alpha_init=init.alpha.build() if init.alpha else None,
            theta_dot_init=init.theta_dot.build() if init.theta_dot else None,
            source=self.source.build(),
            output_stride=integ.output_stride,
            scheme=integ.scheme,
            near_isothermal=integ.near_isothermal,
            pseudolinear=integ.pseudolinear,
        )

    def sweep_points(self) -> list[dict[str, float]]:
        """Cartesian product of the sweep grid, in key order; one empty point without a sweep."""
        if not self.sweep:
            return [{}]
        keys = list(self.sweep)
        return [dict(zip(keys, combo)) for combo in itertools.product(*self.sweep.values())]

    def with_material(self, **values) -> RunConfig:
        material = self.material.model_dump(by_alias=True)
        material.update(values)
        data = self.to_dict()
        data["material"] = material
        data["sweep"] = None
        return RunConfig.model_validate(data)

    def to_dict(self) -> dict:
        return self.model_dump(mode="json", by_alias=True)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _describe(err: ValidationError) -> str:
    parts = []
    for e in err.errors():
        loc = ".".join(str(x) for x in e["loc"]) or "<root>"
        parts.append(f"{loc}: {e['msg']}")
    return "; ".join(parts)


def parse_config(data: dict) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as err:
        exc = ConfigurationError(_describe(err))
        exc.field = ".".join(str(x) for x in err.errors()[0]["loc"]) or None
        raise exc from None


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as err:
        raise ConfigurationError(f"{path}: invalid JSON ({err})") from None
    except OSError as err:
        raise ConfigurationError(f"{path}: {err.strerror}") from None
    return parse_config(data)


def bundled_scenarios() -> dict[str, Path]:
    """Scenario files shipped with the package, by stem."""
    root = Path(__file__).parent / "scenarios"
    return {p.stem: p for p in sorted(root.glob("*.json"))}
