"""Casimir-Polder atom-surface potentials and the detuning they induce.

Geometry: the plate surface sits at distance d from the centre of well a;
well b is a further l away. An atom at coordinate x (x = -l/2 for well a,
x = +l/2 for well b) is r = x + l/2 + d from the surface.
"""
import enum
from dataclasses import dataclass, field, replace
from typing import List, Sequence, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.stats import norm

from rabisense.logger import init_logger
from rabisense.utils.constants import (
    CODATA,
    DEFAULT_MODE_WIDTH,
    DEFAULT_PLATE_DISTANCE,
    DEFAULT_WELL_SEPARATION,
    RB87_ALPHA0,
    RETARDED_CP_PREFACTOR,
    SAPPHIRE_EPSILON0,
    PhysicalConstants,
)
from rabisense.utils.errors import QuadratureError

logger = init_logger(__name__)

QUAD_EPSREL = 1e-9
# Gaussian tails are integrated out to this many widths.
TAIL_WIDTHS = 12.0


class ModeModel(enum.Enum):
    POINT = enum.auto()
    GAUSSIAN = enum.auto()


class Potential(enum.Enum):
    ZERO_TEMPERATURE = enum.auto()
    THERMAL = enum.auto()


@dataclass(frozen=True)
class SurfaceSetup:
    """Atom-plate geometry and material data.

    Args:
        plate_distance: d, plate surface to the centre of the near well (m).
        well_separation: l, distance between the well centres (m).
        epsilon0: Static dielectric constant of the plate.
        alpha0: Static atomic polarizability (m^3).
        temperature: Plate temperature (K), used by the thermal potential.
        mode_model: How the well modes sample the potential.
        mode_width: Standard deviation of each Gaussian mode density (m).
        leakage: Fraction of each mode's density sitting in the other well.
        constants: Physical constants.
    """

    plate_distance: float = DEFAULT_PLATE_DISTANCE
    well_separation: float = DEFAULT_WELL_SEPARATION
    epsilon0: float = SAPPHIRE_EPSILON0
    alpha0: float = RB87_ALPHA0
    temperature: float = 300.0
    mode_model: ModeModel = ModeModel.POINT
    mode_width: float = DEFAULT_MODE_WIDTH
    leakage: float = 0.0
    constants: PhysicalConstants = field(default=CODATA, repr=False)

    def __post_init__(self) -> None:
        self._verify_args()

    def _verify_args(self) -> None:
        if not self.plate_distance > 0:
            raise ValueError(f"plate_distance must be positive, got {self.plate_distance}.")
        if not self.well_separation > 0:
            raise ValueError(
                f"well_separation must be positive, got {self.well_separation}."
            )
        if not self.epsilon0 > 1:
            raise ValueError(f"epsilon0 must exceed 1, got {self.epsilon0}.")
        if not self.alpha0 > 0:
            raise ValueError(f"alpha0 must be positive, got {self.alpha0}.")
        if not self.temperature >= 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}.")
        if not 0 <= self.leakage < 0.5:
            raise ValueError(f"leakage must lie in [0, 0.5), got {self.leakage}.")
        if self.mode_model is ModeModel.GAUSSIAN:
            if not self.mode_width > 0:
                raise ValueError(f"mode_width must be positive, got {self.mode_width}.")
            if self.mode_width >= self.well_separation / 4:
                raise ValueError(
                    f"mode_width={self.mode_width:g} m is not localized: it must be "
                    f"below l/4={self.well_separation / 4:g} m."
                )
            if self.mode_width > self.plate_distance / 3:
                raise ValueError(
                    f"mode_width={self.mode_width:g} m overlaps the plate: it must "
                    f"not exceed d/3={self.plate_distance / 3:g} m."
                )

    @property
    def dielectric_factor(self) -> float:
        return (self.epsilon0 - 1.0) / (self.epsilon0 + 1.0)

    def at_distance(self, plate_distance: float) -> "SurfaceSetup":
        return replace(self, plate_distance=plate_distance)

    def at_temperature(self, temperature: float) -> "SurfaceSetup":
        return replace(self, temperature=temperature)


def _separation(x, s: SurfaceSetup) -> np.ndarray:
    r = np.asarray(x, dtype=np.float64) + 0.5 * s.well_separation + s.plate_distance
    if np.any(r <= 0):
        raise ValueError(
            f"Non-physical geometry: atom-plate separation {r} m is not positive."
        )
    return r


def _unwrap(x: np.ndarray):
    return float(x) if np.ndim(x) == 0 else x


def _zero_temperature_prefactor(s: SurfaceSetup) -> float:
    k = s.constants
    return -RETARDED_CP_PREFACTOR * k.hbar * k.c_light * s.alpha0 * s.dielectric_factor


def _thermal_prefactor(s: SurfaceSetup) -> float:
    if not s.temperature > 0:
        raise ValueError(
            f"The thermal potential needs temperature > 0, got {s.temperature}."
        )
    return -s.constants.k_boltzmann * s.temperature * s.alpha0 / 4.0 * s.dielectric_factor


def _power_law(potential: Potential, s: SurfaceSetup) -> Tuple[float, int]:
    if potential is Potential.ZERO_TEMPERATURE:
        return _zero_temperature_prefactor(s), 4
    return _thermal_prefactor(s), 3


def v_cp_zero_temperature(x, s: SurfaceSetup):
    """Retarded potential -0.24 hbar c alpha0 / r^4 (eps-1)/(eps+1), in joules."""
    r = _separation(x, s)
    return _unwrap(_zero_temperature_prefactor(s) / r**4)


def v_cp_thermal(x, s: SurfaceSetup):
    """Thermal potential -k_B T alpha0 / (4 r^3) (eps-1)/(eps+1), in joules."""
    r = _separation(x, s)
    return _unwrap(_thermal_prefactor(s) / r**3)


def thermal_wavelength(temperature: float, constants: PhysicalConstants = CODATA) -> float:
    if not temperature > 0:
        raise ValueError(f"temperature must be positive, got {temperature}.")
    return constants.hbar * constants.c_light / (constants.k_boltzmann * temperature)


def regime_crossover_separation(
    temperature: float, constants: PhysicalConstants = CODATA
) -> float:
    """Separation at which the thermal and zero-temperature potentials are equal in size."""
    return 4.0 * RETARDED_CP_PREFACTOR * thermal_wavelength(temperature, constants)


def _mode_average_inverse_power(center: float, power: int, s: SurfaceSetup) -> float:
    """<r^-power> over a Gaussian mode density, truncated at the plate and renormalized."""
    width = s.mode_width
    offset = 0.5 * s.well_separation + s.plate_distance
    lower = max(-offset, center - TAIL_WIDTHS * width)
    upper = center + TAIL_WIDTHS * width
    mass = norm.cdf(upper, center, width) - norm.cdf(lower, center, width)

    def integrand(x: float) -> float:
        return norm.pdf(x, center, width) / (x + offset) ** power

    result = quad(
        integrand,
        lower,
        upper,
        points=[center],
        epsabs=0.0,
        epsrel=QUAD_EPSREL,
        limit=200,
        full_output=1,
    )
    if len(result) > 3:
        raise QuadratureError(
            f"Mode average at x={center:g} m did not converge: {result[3]}"
        )
    return result[0] / mass


def _gaussian_detuning(s: SurfaceSetup, potential: Potential) -> float:
    prefactor, power = _power_law(potential, s)
    half = 0.5 * s.well_separation
    near = _mode_average_inverse_power(-half, power, s)
    far = _mode_average_inverse_power(half, power, s)
    return prefactor * (far - near) / (2.0 * s.constants.hbar)


def detuning(s: SurfaceSetup, potential: Potential = Potential.ZERO_TEMPERATURE) -> float:
    """delta / hbar = (<V>_b - <V>_a) / (2 hbar) in 1/s; positive for an attractive plate."""
    if s.mode_model is ModeModel.POINT:
        prefactor, power = _power_law(potential, s)
        near = s.plate_distance
        far = s.plate_distance + s.well_separation
        return prefactor * (far**-power - near**-power) / (2.0 * s.constants.hbar)
    return (1.0 - 2.0 * s.leakage) * _gaussian_detuning(s, potential)


def detuning_at(s: SurfaceSetup, temperature: float) -> float:
    """Detuning at one temperature; 0 K selects the zero-temperature law."""
    if temperature == 0:
        return detuning(s, Potential.ZERO_TEMPERATURE)
    return detuning(s.at_temperature(temperature), Potential.THERMAL)


def detuning_curve(
    d_grid: Sequence[float],
    s: SurfaceSetup,
    temperatures: Sequence[float] = (0.0, 300.0, 600.0),
) -> List[Tuple[float, ...]]:
    """Rows (d, delta_T1, delta_T2, ...) in grid order."""
    if len(d_grid) == 0:
        raise ValueError("The distance grid is empty.")
    rows = []
    for d in d_grid:
        at_d = s.at_distance(float(d))
        rows.append((float(d),) + tuple(detuning_at(at_d, T) for T in temperatures))
    return rows


def calibrate_modes(
    s: SurfaceSetup,
    target_rate: float,
    calibration_distance: float = DEFAULT_PLATE_DISTANCE,
) -> SurfaceSetup:
    """Gaussian-mode setup whose zero-temperature detuning at `calibration_distance` is `target_rate`.

    Averaging the convex potential over a mode only increases the detuning,
    so the width stays fixed and the inter-well leakage absorbs the
    difference: delta scales as (1 - 2 leakage).
    """
    gaussian = replace(
        s, mode_model=ModeModel.GAUSSIAN, leakage=0.0, plate_distance=calibration_distance
    )
    bare = _gaussian_detuning(gaussian, Potential.ZERO_TEMPERATURE)
    if not 0 < target_rate <= bare:
        raise ValueError(
            f"Cannot calibrate to {target_rate:g}/s: Gaussian modes of width "
            f"{s.mode_width:g} m give {bare:g}/s at d={calibration_distance:g} m."
        )
    leakage = 0.5 * (1.0 - target_rate / bare)
    logger.info(
        "Calibrated modes: width=%.4g m, leakage=%.4f (%.4g/s -> %.4g/s at d=%.3g m).",
        s.mode_width, leakage, bare, target_rate, calibration_distance,
    )
    return replace(s, mode_model=ModeModel.GAUSSIAN, leakage=leakage)

