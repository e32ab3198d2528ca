from typing import Optional

from rabisense.core.casimir import ModeModel, SurfaceSetup, calibrate_modes
from rabisense.core.dynamics import GAMMA_MAX, InterferometerParams
from rabisense.core.estimation import MeasurementSchedule, NoiseModel
from rabisense.logger import init_logger
from rabisense.utils.constants import MAX_EXACT_PARTICLES
from rabisense.utils.utils import get_cpu_count

logger = init_logger(__name__)

_MODE_MODELS = ("point", "gaussian", "calibrated")


class InterferometerConfig:
    """Configuration for the double-well interferometer.

    Args:
        num_particles: Atom number N.
        ej_rate: Tunneling rate E_J / hbar in 1/s.
        delta_rate: Detuning delta / hbar in 1/s, used where delta is not
            derived from a surface setup.
        max_exact_particles: Largest N evolved exactly in the Dicke basis.
    """

    def __init__(
        self,
        num_particles: int,
        ej_rate: float,
        delta_rate: float,
        max_exact_particles: int = MAX_EXACT_PARTICLES,
    ) -> None:
        self.num_particles = num_particles
        self.ej_rate = ej_rate
        self.delta_rate = delta_rate
        self.max_exact_particles = max_exact_particles
        self._verify_args()

    def _verify_args(self) -> None:
        if self.num_particles < 1:
            raise ValueError(
                f"num_particles must be >= 1. Got {self.num_particles}."
            )
        if self.ej_rate <= 0:
            raise ValueError(f"ej_rate must be positive. Got {self.ej_rate}.")
        if self.max_exact_particles < 1:
            raise ValueError(
                f"max_exact_particles must be >= 1. Got {self.max_exact_particles}."
            )
        if self.num_particles > self.max_exact_particles:
            logger.info(
                "N=%d is above the exact-evolution cap %d; interacting records "
                "fall back to the first-order shift.",
                self.num_particles, self.max_exact_particles,
            )

    def get_params(self, delta_rate: Optional[float] = None) -> InterferometerParams:
        if delta_rate is None:
            delta_rate = self.delta_rate
        return InterferometerParams(self.ej_rate, delta_rate)


class NoiseConfig:
    """Configuration for the technical noise.

    Args:
        sigma_res: Detection resolution in particles per shot.
        gamma: Interaction strength N E_C / E_J.
    """

    def __init__(self, sigma_res: float, gamma: float) -> None:
        self.sigma_res = sigma_res
        self.gamma = gamma
        self._verify_args()

    def _verify_args(self) -> None:
        if self.sigma_res < 0:
            raise ValueError(f"sigma_res must be non-negative. Got {self.sigma_res}.")
        if self.gamma < 0:
            raise ValueError(f"gamma must be non-negative. Got {self.gamma}.")
        if self.gamma > GAMMA_MAX:
            raise ValueError(
                f"gamma must not exceed {GAMMA_MAX} (first-order regime). Got {self.gamma}."
            )

    def get_noise_model(self) -> NoiseModel:
        return NoiseModel(gamma=self.gamma, sigma_res=self.sigma_res)


class ScheduleConfig:
    """Configuration for the readout protocols.

    Args:
        num_times: k, points of the uniform grid over one Rabi period.
        repetitions: m, shots per point of the uniform grid.
        optimal_shots: mk, total shots of the optimal-point protocol.
    """

    def __init__(self, num_times: int, repetitions: int, optimal_shots: int) -> None:
        self.num_times = num_times
        self.repetitions = repetitions
        self.optimal_shots = optimal_shots
        self._verify_args()

    def _verify_args(self) -> None:
        if self.num_times < 1:
            raise ValueError(f"num_times must be >= 1. Got {self.num_times}.")
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1. Got {self.repetitions}.")
        if self.optimal_shots < 1:
            raise ValueError(f"optimal_shots must be >= 1. Got {self.optimal_shots}.")

    def uniform(self, p: InterferometerParams) -> MeasurementSchedule:
        return MeasurementSchedule.uniform(p, self.num_times, self.repetitions)

    def optimal_point(self, p: InterferometerParams) -> MeasurementSchedule:
        return MeasurementSchedule.optimal_point(p, self.optimal_shots)


class SurfaceConfig:
    """Configuration for the atom-plate setup.

    Args:
        well_separation: l in meters.
        epsilon0: Static dielectric constant of the plate.
        alpha0: Static polarizability in m^3.
        mode_model: "point" samples the potential at the well centres,
            "gaussian" averages it over Gaussian modes, "calibrated" also
            fixes the inter-well leakage so that the zero-temperature detuning
            at `calibration_distance` equals `calibration_target`.
        mode_width: Gaussian mode width in meters.
        calibration_target: Target delta / hbar in 1/s.
        calibration_distance: Plate distance of the calibration in meters.
    """

    def __init__(
        self,
        well_separation: float,
        epsilon0: float,
        alpha0: float,
        mode_model: str,
        mode_width: float,
        calibration_target: float,
        calibration_distance: float,
    ) -> None:
        self.well_separation = well_separation
        self.epsilon0 = epsilon0
        self.alpha0 = alpha0
        self.mode_model = mode_model.lower()
        self.mode_width = mode_width
        self.calibration_target = calibration_target
        self.calibration_distance = calibration_distance
        self._verify_args()
        self._calibrated: Optional[SurfaceSetup] = None

    def _verify_args(self) -> None:
        if self.mode_model not in _MODE_MODELS:
            raise ValueError(
                f"Unknown mode model: {self.mode_model}. Must be one of {_MODE_MODELS}."
            )
        if self.calibration_target <= 0:
            raise ValueError(
                f"calibration_target must be positive. Got {self.calibration_target}."
            )
        if self.calibration_distance <= 0:
            raise ValueError(
                f"calibration_distance must be positive. Got {self.calibration_distance}."
            )

    def get_setup(self, plate_distance: Optional[float] = None) -> SurfaceSetup:
        """Surface setup at `plate_distance` (the calibration distance by default)."""
        if plate_distance is None:
            plate_distance = self.calibration_distance
        if self.mode_model == "calibrated":
            if self._calibrated is None:
                base = SurfaceSetup(
                    plate_distance=self.calibration_distance,
                    well_separation=self.well_separation,
                    epsilon0=self.epsilon0,
                    alpha0=self.alpha0,
                    mode_width=self.mode_width,
                )
                self._calibrated = calibrate_modes(
                    base, self.calibration_target, self.calibration_distance
                )
            return self._calibrated.at_distance(plate_distance)
        model = ModeModel.POINT if self.mode_model == "point" else ModeModel.GAUSSIAN
        return SurfaceSetup(
            plate_distance=plate_distance,
            well_separation=self.well_separation,
            epsilon0=self.epsilon0,
            alpha0=self.alpha0,
            mode_model=model,
            mode_width=self.mode_width,
        )


class MonteCarloConfig:
    """Configuration for Monte-Carlo validation runs.

    Args:
        trials: Number of simulated records.
        seed: Base seed; trial i uses the stream (seed, i).
        threads: Worker threads. Defaults to the number of CPUs.
    """

    def __init__(self, trials: int, seed: int, threads: Optional[int] = None) -> None:
        self.trials = trials
        self.seed = seed
        self.threads = threads if threads is not None else get_cpu_count()
        self._verify_args()

    def _verify_args(self) -> None:
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1. Got {self.trials}.")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative. Got {self.seed}.")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1. Got {self.threads}.")
