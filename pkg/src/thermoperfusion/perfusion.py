"""Heat-balance fluxes and the per-pixel blood-perfusion inversion.

The skin surface balance reads

    H_r + H_f + H_e = H_m + H_c + H_b,    H_e = 0

with radiation (Stefan-Boltzmann), natural convection in air (Newton
cooling with a Rayleigh-type coefficient), conduction from the body core
(Fourier) and perfusion convection (Pennes). Solving for the perfusion
omega gives, per pixel,

    omega = [H_r + H_f - k_s (T_a - T_s)/D - Q_m] / [alpha c_b (T_a - T_s)]

(the FULL variant). The TABLE_CONSISTENT variant keeps only H_r + H_f in
the numerator and scales the result by 10, matching the published
region-average tables; see ModelVariant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidInputError, SingularityError
from .model import FaceMask, ModelParameters, ModelVariant, PerfusionFrame, ThermalFrame, celsius_to_kelvin

# Guard band around T_a where the inversion denominator vanishes, in K.
SINGULARITY_EPSILON = 1e-3


@dataclass(frozen=True)
class FluxBreakdown:
    """Per-unit-area heat flows (W/m^2) at one skin temperature."""

    H_r: float
    H_f: float
    H_c: float
    H_m: float
    H_b: float
    H_e: float = 0.0


def _check_finite(t_s) -> np.ndarray:
    t = np.asarray(t_s, dtype=np.float64)
    if not np.all(np.isfinite(t)):
        raise InvalidInputError("skin temperature must be finite")
    return t


def radiative_flux(t_s, params: ModelParameters):
    """Radiative heat flux epsilon*sigma*(T_s^4 - T_e^4), temperatures in K."""
    t = _check_finite(t_s)
    if np.any(t <= 0):
        raise InvalidInputError("skin temperature must be positive (Kelvin)")
    out = params.epsilon * params.sigma * (t ** 4 - params.T_e ** 4)
    return float(out) if out.ndim == 0 else out


def convection_coefficient(params: ModelParameters) -> float:
    """Constant multiplier of (T_s - T_e)^(M+1) in the convective flux."""
    return (params.A * params.k_f * params.d ** (3 * params.M - 1)
            * (params.Pr * params.g * params.beta / params.nu ** 2) ** params.M)


def convective_flux(t_s, params: ModelParameters):
    """Natural-convection flux; requires T_s >= T_e (warm surface)."""
    t = _check_finite(t_s)
    dt = t - params.T_e
    if np.any(dt < 0):
        raise DomainError(
            "skin temperature below ambient: convective flux undefined "
            "(fractional power of a negative base)"
        )
    out = convection_coefficient(params) * dt ** (params.M + 1)
    return float(out) if out.ndim == 0 else out


def conductive_flux(t_s, params: ModelParameters):
    """Core-to-skin conduction k_s*(T_c - T_s)/D, temperatures in K."""
    t = _check_finite(t_s)
    if np.any(t <= 0):
        raise InvalidInputError("skin temperature must be positive (Kelvin)")
    out = params.k_s * (params.T_c - t) / params.D
    return float(out) if out.ndim == 0 else out


def flux_breakdown(t_s: float, params: ModelParameters) -> FluxBreakdown:
    """All balance terms at one skin temperature, with H_b closing the balance."""
    h_r = radiative_flux(t_s, params)
    h_f = convective_flux(t_s, params)
    h_c = conductive_flux(t_s, params)
    h_b = h_r + h_f - params.Q_m - h_c
    return FluxBreakdown(H_r=h_r, H_f=h_f, H_c=h_c, H_m=params.Q_m, H_b=h_b)


def perfusion_at_pixel(t_s: float, params: ModelParameters) -> float:
    """Invert the heat balance at one skin temperature (K) to perfusion.

    Raises SingularityError when T_s is within SINGULARITY_EPSILON of T_a
    and DomainError when T_s is below ambient.
    """
    t = float(_check_finite(t_s))
    if abs(params.T_a - t) <= SINGULARITY_EPSILON:
        raise SingularityError(
            f"skin temperature {t:.4f} K within {SINGULARITY_EPSILON} K of "
            f"arterial temperature {params.T_a} K"
        )
    numerator = radiative_flux(t, params) + convective_flux(t, params)
    if params.variant is ModelVariant.FULL:
        numerator -= params.k_s * (params.T_a - t) / params.D
        numerator -= params.Q_m
    omega = numerator / (params.alpha * params.c_b * (params.T_a - t))
    return omega * params.output_scale


@dataclass(frozen=True)
class PixelIssue:
    """A pixel excluded from the inversion, with its reason."""

    row: int
    col: int
    kind: str  # "singular" or "below_ambient"


def perfuse_frame(
    frame: ThermalFrame,
    mask: FaceMask,
    params: ModelParameters,
) -> tuple[PerfusionFrame, list[PixelIssue]]:
    """Map a thermal frame to a perfusion frame over the face mask.

    Masked-out pixels hold 0. Singular or below-ambient pixels are zeroed
    and reported in the issue list; the call fails only when more than 1%
    of masked-in pixels are singular.
    """
    if mask.bits.shape != frame.data.shape:
        raise InvalidInputError("mask dimensions must equal frame dimensions")
    t = celsius_to_kelvin(frame.data)
    m = mask.bits

    singular = m & (np.abs(params.T_a - t) <= SINGULARITY_EPSILON)
    below = m & (t < params.T_e) & ~singular
    good = m & ~singular & ~below

    masked_count = int(m.sum())
    if masked_count and int(singular.sum()) > 0.01 * masked_count:
        raise SingularityError(
            f"{int(singular.sum())} of {masked_count} masked pixels are "
            "within the singular band around arterial temperature"
        )

    omega = np.zeros_like(t)
    tg = t[good]
    numerator = (params.epsilon * params.sigma * (tg ** 4 - params.T_e ** 4)
                 + convection_coefficient(params)
                 * (tg - params.T_e) ** (params.M + 1))
    if params.variant is ModelVariant.FULL:
        numerator = numerator - params.k_s * (params.T_a - tg) / params.D - params.Q_m
    omega[good] = (numerator / (params.alpha * params.c_b * (params.T_a - tg))
                   * params.output_scale)

    issues = [PixelIssue(int(r), int(c), "singular")
              for r, c in zip(*np.nonzero(singular))]
    issues += [PixelIssue(int(r), int(c), "below_ambient")
               for r, c in zip(*np.nonzero(below))]
    issues.sort(key=lambda p: (p.row, p.col))
    return PerfusionFrame(data=omega, mask_applied=True), issues
