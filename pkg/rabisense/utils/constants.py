"""Physical constants and the default experimental numbers.

Constants come from CODATA through `scipy.constants`; the defaults describe a
87Rb condensate next to a sapphire plate.
"""
from dataclasses import dataclass

from scipy import constants as _codata


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = _codata.hbar
    c_light: float = _codata.c
    k_boltzmann: float = _codata.k


CODATA = PhysicalConstants()

# Interferometer.
DEFAULT_NUM_PARTICLES = 2500
DEFAULT_EJ_RATE = 52.3  # E_J / hbar, 1/s
DEFAULT_DELTA_RATE = 4.4  # delta / hbar at d = 4 um, 1/s

# Surface and atom.
DEFAULT_WELL_SEPARATION = 4.8e-6  # m
DEFAULT_PLATE_DISTANCE = 4.0e-6  # m
SAPPHIRE_EPSILON0 = 9.4
RB87_ALPHA0 = 47.3e-30  # m^3
RETARDED_CP_PREFACTOR = 0.24
# Density width of the ground state of a ~1 kHz harmonic well for 87Rb.
DEFAULT_MODE_WIDTH = 0.24e-6  # m

# Noise.
DEFAULT_SIGMA_RES = 40.0  # particles
DEFAULT_GAMMA = 0.1

# Protocol.
DEFAULT_NUM_TIMES = 10
DEFAULT_REPETITIONS = 10
DEFAULT_OPTIMAL_SHOTS = 100

# Largest Dicke dimension evolved exactly.
MAX_EXACT_PARTICLES = 5000
