# Pydantic Schemas for the rough-wall study configuration and result records
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator
from typing import List, Optional, Dict, Any, Literal
from datetime import datetime

import numpy as np

from utilities.errors import ConfigError

INTEGER_TOL = 1e-9


def _require_dyadic_inverse(eps: float) -> float:
    if not 0.0 < eps < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {eps}")
    inverse = 1.0 / eps
    if abs(inverse - round(inverse)) > INTEGER_TOL:
        raise ValueError("1/ε must be an integer")
    return eps


# --- GEOMETRY SCHEMAS ---
class ModeConfig(BaseModel):
    j: int
    re: float
    im: float = 0.0

    @field_validator("j")
    @classmethod
    def nonzero_wavenumber(cls, v):
        if v == 0:
            raise ValueError("wavenumber 0 belongs in the mean offset")
        return v

class ProfileConfig(BaseModel):
    mean: float = 2.0
    modes: List[ModeConfig] = Field(default_factory=lambda: [ModeConfig(j=1, re=0.5)])

    @model_validator(mode="after")
    def positive_profile(self):
        # eta = mean + sum 2 Re(c exp(2 pi i j z)), sampled well above its top wavenumber
        top = max((abs(m.j) for m in self.modes), default=0)
        z = np.arange(64 * (top + 1)) / (64 * (top + 1))
        eta = np.full(z.shape, self.mean)
        for m in self.modes:
            eta += 2.0 * (m.re * np.cos(2.0 * np.pi * m.j * z) - m.im * np.sin(2.0 * np.pi * m.j * z))
        if np.min(eta) <= 0.0:
            raise ValueError(f"roughness profile must be positive, sampled inf η = {np.min(eta):.6g}")
        return self

class FrictionConfig(BaseModel):
    """Navier friction lambda(x1); lambda >= 0 dissipates energy through the wall"""
    mean: float = 0.0
    modes: List[ModeConfig] = Field(default_factory=list)
    window_constant: float = 1.0

# --- FORCING SCHEMAS ---
class ForcingModeConfig(BaseModel):
    component: Literal[1, 2] = 1
    wavenumber: int = 1
    phase: Literal["cos", "sin"] = "cos"
    amplitude: float = 1.0
    ramp_power: int = 2
    profile: Literal["gaussian", "uniform"] = "gaussian"
    center: float = 1.5
    width: float = 0.5

    @field_validator("ramp_power")
    @classmethod
    def quiet_start(cls, v):
        if v < 1:
            raise ValueError("ramp power must be at least 1 so the forcing vanishes at t = 0")
        return v

class ForcingConfig(BaseModel):
    modes: List[ForcingModeConfig] = Field(default_factory=lambda: [ForcingModeConfig()])
    switch_off: Optional[float] = None

# --- NUMERICS SCHEMAS ---
class EulerGridConfig(BaseModel):
    nx1: int = 32
    nx2: int = 96
    height: float = 8.0
    dt: float = 0.01
    snapshot_stride: int = 5

class CellGridConfig(BaseModel):
    n_z1: int = 32
    n_z2: int = 40
    z_max: float = 8.0
    stretch: float = 6.0

class NSNumericsConfig(BaseModel):
    height: float = 8.0
    points_per_wavelength: int = 8
    min_x1_points: int = 64
    ns: int = 96
    layer_fraction: float = 1.0 / 3.0
    dt: Optional[float] = None
    cfl: float = 0.4
    sponge_strength: float = 5.0
    wall_tol: float = 1e-9
    wall_max_iterations: int = 50
    progress_every: int = 50
    checkpoint_every: int = 0

class DiagnosticsGridConfig(BaseModel):
    nodes_per_panel: int = 24
    x1_points_per_wavelength: int = 16
    min_x1_points: int = 128

# --- STUDY SCHEMAS ---
class SweepConfig(BaseModel):
    epsilons: List[float] = Field(default_factory=lambda: [0.25, 0.125, 0.0625])
    nus: Optional[List[float]] = None
    nu_constant: float = 100.0
    nu_exponent: float = 7.0
    nu_window_constant: float = 1e3
    workers: int = 1

    @field_validator("epsilons")
    @classmethod
    def dyadic(cls, v):
        errors = []
        for i, eps in enumerate(v):
            try:
                _require_dyadic_inverse(eps)
            except ValueError as e:
                errors.append(f"epsilons.{i}: {str(e)}")
        if errors:
            raise ValueError("; ".join(errors))
        return v

    @model_validator(mode="after")
    def matching_nus(self):
        if self.nus is not None and len(self.nus) != len(self.epsilons):
            raise ValueError("nus must list one viscosity per epsilon")
        return self

    def viscosity(self, index: int) -> float:
        if self.nus is not None:
            return self.nus[index]
        return self.nu_constant * self.epsilons[index] ** self.nu_exponent

class ReportConfig(BaseModel):
    formats: List[Literal["csv", "json", "svg"]] = Field(default_factory=lambda: ["csv", "json"])
    include_runtimes: bool = False

class RunConfig(BaseModel):
    name: str = "study"
    n0: int = 2
    order: int = 3
    horizon: float = 1.0
    seed: int = 0
    profile: ProfileConfig = Field(default_factory=ProfileConfig)
    forcing: ForcingConfig = Field(default_factory=ForcingConfig)
    friction: FrictionConfig = Field(default_factory=FrictionConfig)
    euler: EulerGridConfig = Field(default_factory=EulerGridConfig)
    cell: CellGridConfig = Field(default_factory=CellGridConfig)
    ns: NSNumericsConfig = Field(default_factory=NSNumericsConfig)
    diagnostics: DiagnosticsGridConfig = Field(default_factory=DiagnosticsGridConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    report: ReportConfig = Field(default_factory=ReportConfig)
    output_dir: Optional[str] = None

    @field_validator("n0", "order")
    @classmethod
    def positive(cls, v):
        if v < 1:
            raise ValueError("must be a positive integer")
        return v

    @field_validator("horizon")
    @classmethod
    def positive_horizon(cls, v):
        if v <= 0.0:
            raise ValueError("horizon must be positive")
        return v


def load_run_config(data: Optional[Dict[str, Any]]) -> RunConfig:
    """Validate a raw mapping; every failing location is listed in the ConfigError"""
    try:
        return RunConfig.model_validate(data or {})
    except ValidationError as e:
        locations = []
        for err in e.errors():
            loc = ".".join(str(part) for part in err["loc"])
            message = err["msg"].removeprefix("Value error, ")
            locations.append(f"{loc}: {message}" if loc else message)
        raise ConfigError("invalid configuration: " + "; ".join(locations), locations)

# --- RESULT SCHEMAS ---
class CheckResult(BaseModel):
    name: str
    value: float
    bound: float
    passed: bool
    degenerate: bool = False
    details: Dict[str, Any] = Field(default_factory=dict)

class SweepResult(BaseModel):
    epsilon: float
    nu: float
    alpha: float
    N: int
    grid_x1: int = 0
    grid_x2: int = 0
    T0: float = 0.0
    q_l2_scaled: Optional[float] = None
    q_linf: Optional[float] = None
    q_curl_scaled: Optional[float] = None
    limit_l2: Optional[float] = None
    limit_linf: Optional[float] = None
    resid_curl_linf: Optional[float] = None
    resid_curl_l2: Optional[float] = None
    layer_linf: Optional[float] = None
    layer_l2: Optional[float] = None
    interior_linf: Optional[float] = None
    wall_slip_linf: Optional[float] = None
    wall_bc_defect: Optional[float] = None
    energy_drift: Optional[float] = None
    weight_m: Optional[float] = None
    regime: str = "outside"
    resolution: str = "unresolved"
    runtime_s: Optional[float] = None
    status: Literal["ok", "failed"] = "ok"
    error: Optional[str] = None

class SweepRecordResponse(SweepResult):
    id: int
    study: str
    created_at: datetime

    class Config:
        from_attributes = True

class CheckRecordResponse(BaseModel):
    id: int
    suite: str
    name: str
    value: float
    bound: float
    passed: bool
    created_at: datetime

    class Config:
        from_attributes = True
