"""rabisense: double-well Rabi interferometry for atom-surface force sensing"""

from rabisense.core.spin_states import DickeState, make_css, make_gaussian_squeezed
from rabisense.core.dynamics import InterferometerParams
from rabisense.core.casimir import SurfaceSetup
from rabisense.core.estimation import MeasurementSchedule, NoiseModel, fit_ml
from rabisense.engine.arg_utils import ExperimentArgs

__version__ = "0.1.0"

__all__ = [
    "DickeState",
    "make_css",
    "make_gaussian_squeezed",
    "InterferometerParams",
    "SurfaceSetup",
    "MeasurementSchedule",
    "NoiseModel",
    "fit_ml",
    "ExperimentArgs",
]
