"""Domain types and physical constants shared by the whole pipeline.

All physics runs in Kelvin internally; file I/O and reports use degrees
Celsius. Temperatures are 64-bit floats end to end because fourth-power
differences lose precision in 32-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from enum import Enum

import numpy as np

from .errors import InvalidInputError, ParameterError

KELVIN_OFFSET = 273.15

# Sensor plausibility window for radiometric skin captures, in deg C.
TEMP_MIN_C = -40.0
TEMP_MAX_C = 120.0


def celsius_to_kelvin(t):
    """Convert a Celsius temperature (scalar or array) to Kelvin."""
    t = np.asarray(t, dtype=np.float64)
    if not np.all(np.isfinite(t)):
        raise InvalidInputError("temperature must be finite")
    out = t + KELVIN_OFFSET
    return float(out) if out.ndim == 0 else out


def kelvin_to_celsius(t):
    """Convert a Kelvin temperature (scalar or array) to Celsius."""
    t = np.asarray(t, dtype=np.float64)
    if not np.all(np.isfinite(t)):
        raise InvalidInputError("temperature must be finite")
    out = t - KELVIN_OFFSET
    return float(out) if out.ndim == 0 else out


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ThermalFrame:
    """One radiometric capture: a 2-D grid of skin temperatures in deg C."""

    data: np.ndarray
    timestamp_index: int = 0

    def __post_init__(self):
        d = np.asarray(self.data, dtype=np.float64)
        if d.ndim != 2 or d.shape[0] < 1 or d.shape[1] < 1:
            raise InvalidInputError("frame data must be a non-empty 2-D grid")
        if not np.all(np.isfinite(d)):
            raise InvalidInputError("frame contains non-finite temperatures")
        if d.min() < TEMP_MIN_C or d.max() > TEMP_MAX_C:
            raise InvalidInputError(
                "frame temperature outside plausibility window "
                f"[{TEMP_MIN_C}, {TEMP_MAX_C}] degC"
            )
        object.__setattr__(self, "data", _freeze(d))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class PerfusionFrame:
    """Per-pixel blood perfusion in kg/(m^2 s); masked-out pixels are 0."""

    data: np.ndarray
    mask_applied: bool = False

    def __post_init__(self):
        d = np.asarray(self.data, dtype=np.float64)
        if d.ndim != 2 or d.shape[0] < 1 or d.shape[1] < 1:
            raise InvalidInputError("perfusion data must be a non-empty 2-D grid")
        object.__setattr__(self, "data", _freeze(d))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class FaceMask:
    """Boolean face/background grid; True marks face pixels."""

    bits: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bits, dtype=bool)
        if b.ndim != 2:
            raise InvalidInputError("mask must be 2-D")
        object.__setattr__(self, "bits", _freeze(b))

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def pixel_count(self) -> int:
        return int(self.bits.sum())


class ModelVariant(str, Enum):
    """Perfusion inversion variants.

    FULL evaluates the complete heat-balance inversion (radiation +
    convection - conduction - metabolism in the numerator).
    TABLE_CONSISTENT keeps only radiation + convection and defaults to a
    x10 reporting scale, which reproduces the published region-average
    perfusion magnitudes.
    """

    FULL = "full"
    TABLE_CONSISTENT = "table"


@dataclass(frozen=True)
class ModelParameters:
    """Constant set of the heat-balance model plus environment and variant.

    Defaults are the standard published parameter set for facial skin
    heat exchange; T_e defaults to a 24 degC acquisition room.
    """

    rho_b: float = 1060.0            # blood density, kg/m^3 (unused by the inversion)
    c_b: float = 3.78e3              # blood specific heat, J/(kg K)
    T_a: float = 312.15              # arterial temperature, K
    T_c: float = 312.15              # core temperature, K
    k_s: float = 0.5                 # tissue conductivity, W/(m K)
    k_f: float = 0.024               # air conductivity, W/(m K)
    Q_m: float = 4.186               # metabolic flux, W/m^2
    sigma: float = 5.67e-8           # Stefan-Boltzmann constant, W/(m^2 K^4)
    epsilon: float = 0.98            # skin emissivity
    alpha: float = 0.8               # countercurrent exchange ratio
    Pr: float = 0.72                 # Prandtl number
    nu: float = 1.56e-5              # air kinematic viscosity, m^2/s
    beta: float = 3.354e-3           # air thermal expansion, 1/K
    g: float = 9.8                   # gravitational acceleration, m/s^2
    A: float = 0.27                  # convection constant
    M: float = 0.25                  # convection exponent
    d: float = 0.170                 # characteristic length, m
    D: float = 0.085                 # core-to-skin distance, m
    T_e: float = 24.0 + KELVIN_OFFSET  # ambient temperature, K
    variant: ModelVariant = ModelVariant.FULL
    output_scale: float | None = None  # None -> 1 (FULL) or 10 (TABLE_CONSISTENT)

    def __post_init__(self):
        object.__setattr__(self, "variant", ModelVariant(self.variant))
        if self.output_scale is None:
            scale = 10.0 if self.variant is ModelVariant.TABLE_CONSISTENT else 1.0
            object.__setattr__(self, "output_scale", scale)
        positive = [
            "rho_b", "c_b", "T_a", "T_c", "k_s", "k_f", "Q_m", "sigma",
            "Pr", "nu", "beta", "g", "A", "d", "D", "T_e",
        ]
        for name in positive:
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ParameterError(f"{name} must be finite and positive, got {v!r}")
        if not 0 < self.epsilon <= 1:
            raise ParameterError("epsilon must lie in (0, 1]")
        if not 0 < self.alpha <= 1:
            raise ParameterError("alpha must lie in (0, 1]")
        if not 0 < self.M < 1:
            raise ParameterError("M must lie in (0, 1)")
        if not self.T_e < self.T_a:
            raise ParameterError("ambient T_e must be below arterial T_a")
        if not (math.isfinite(self.output_scale) and self.output_scale > 0):
            raise ParameterError("output_scale must be finite and positive")

    def with_ambient_celsius(self, t_e_c: float) -> "ModelParameters":
        return replace(self, T_e=celsius_to_kelvin(t_e_c))

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = v.value if isinstance(v, ModelVariant) else v
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParameters":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ParameterError(f"unknown model parameter(s): {sorted(unknown)}")
        return cls(**d)


class RoiName(str, Enum):
    NOSE = "NOSE"
    FOREHEAD = "FOREHEAD"
    LEFT_EYE = "LEFT_EYE"
    RIGHT_EYE = "RIGHT_EYE"
    LEFT_CHEEK = "LEFT_CHEEK"
    RIGHT_CHEEK = "RIGHT_CHEEK"
    LEFT_UPPER_LIP = "LEFT_UPPER_LIP"
    RIGHT_UPPER_LIP = "RIGHT_UPPER_LIP"
    TOTAL_FACE = "TOTAL_FACE"


# Nominal rectangle sizes (rows, cols); TOTAL_FACE has no rectangle.
POINT_ROI_SIZE = (10, 10)
FOREHEAD_ROI_SIZE = (50, 110)


@dataclass(frozen=True)
class RoiRect:
    """Rectangular ROI: origin (row, col) plus size (rows, cols)."""

    name: RoiName
    row: int
    col: int
    rows: int
    cols: int

    def __post_init__(self):
        object.__setattr__(self, "name", RoiName(self.name))
        if self.name is RoiName.TOTAL_FACE:
            raise ParameterError("TOTAL_FACE is mask-based, not a rectangle")
        if min(self.row, self.col) < 0 or min(self.rows, self.cols) < 1:
            raise ParameterError(f"invalid rectangle for {self.name.value}")

    def validate_against(self, height: int, width: int) -> None:
        if self.row + self.rows > height or self.col + self.cols > width:
            raise ParameterError(
                f"ROI {self.name.value} exceeds frame bounds "
                f"({height}x{width})"
            )

    def slices(self) -> tuple[slice, slice]:
        return (slice(self.row, self.row + self.rows),
                slice(self.col, self.col + self.cols))


@dataclass(frozen=True)
class RoiSet:
    """Named facial ROIs; TOTAL_FACE is implicit and mask-based."""

    rects: tuple[RoiRect, ...]
    include_total_face: bool = True

    def __post_init__(self):
        names = [r.name for r in self.rects]
        if len(set(names)) != len(names):
            raise ParameterError("duplicate ROI names")

    def names(self) -> list[RoiName]:
        out = [r.name for r in self.rects]
        if self.include_total_face:
            out.append(RoiName.TOTAL_FACE)
        return out

    def rect(self, name: RoiName) -> RoiRect:
        for r in self.rects:
            if r.name is RoiName(name):
                return r
        raise KeyError(str(name))

    def validate_against(self, height: int, width: int) -> None:
        for r in self.rects:
            r.validate_against(height, width)


class SetLabel(str, Enum):
    BASELINE = "BASELINE"
    NEGATIVE = "NEGATIVE"
    POSITIVE = "POSITIVE"


# Nominal acquisition set sizes at 1 Hz.
NOMINAL_SET_SIZES = {
    SetLabel.BASELINE: 60,
    SetLabel.NEGATIVE: 240,
    SetLabel.POSITIVE: 240,
}


@dataclass(frozen=True)
class SessionData:
    """Baseline and valence frame sequences for one subject."""

    subject_id: str
    baseline: tuple[ThermalFrame, ...]
    negative: tuple[ThermalFrame, ...]
    positive: tuple[ThermalFrame, ...]
    roi_set: RoiSet
    ambient_c: float = 24.0
    relative_humidity: float = 63.0

    def __post_init__(self):
        for label, seq in self.sets().items():
            if len(seq) < 1:
                raise InvalidInputError(f"{label.value} set is empty")
        shapes = {f.data.shape for seq in self.sets().values() for f in seq}
        if len(shapes) != 1:
            raise InvalidInputError(f"mixed frame dimensions in session: {shapes}")
        h, w = next(iter(shapes))
        self.roi_set.validate_against(h, w)

    def sets(self) -> dict[SetLabel, tuple[ThermalFrame, ...]]:
        return {
            SetLabel.BASELINE: self.baseline,
            SetLabel.NEGATIVE: self.negative,
            SetLabel.POSITIVE: self.positive,
        }

    @property
    def frame_shape(self) -> tuple[int, int]:
        return self.baseline[0].data.shape
