import argparse
import dataclasses
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import toml

from rabisense.config import (
    InterferometerConfig,
    MonteCarloConfig,
    NoiseConfig,
    ScheduleConfig,
    SurfaceConfig,
)
from rabisense.utils.constants import (
    DEFAULT_DELTA_RATE,
    DEFAULT_EJ_RATE,
    DEFAULT_GAMMA,
    DEFAULT_MODE_WIDTH,
    DEFAULT_NUM_PARTICLES,
    DEFAULT_NUM_TIMES,
    DEFAULT_OPTIMAL_SHOTS,
    DEFAULT_PLATE_DISTANCE,
    DEFAULT_REPETITIONS,
    DEFAULT_SIGMA_RES,
    DEFAULT_WELL_SEPARATION,
    MAX_EXACT_PARTICLES,
    RB87_ALPHA0,
    SAPPHIRE_EPSILON0,
)
from rabisense.utils.errors import ConfigError

_D_GRID_UM = (3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0, 6.5, 7.0, 7.5, 8.0, 8.5, 9.0, 9.5, 10.0)
_VARIANCE_MODELS = ("full", "sharp_jx")
_WEIGHTINGS = ("ml", "lsq")
_MODE_MODELS = ("point", "gaussian", "calibrated")
# Fields that may be left unset.
_OPTIONAL = {"time": float, "threads": int, "record": str}


@dataclass
class ExperimentArgs:
    """Every tunable of the pipelines, with the defaults of the reference setup."""

    # Interferometer.
    num_particles: int = DEFAULT_NUM_PARTICLES
    ej_rate: float = DEFAULT_EJ_RATE
    delta_rate: float = DEFAULT_DELTA_RATE
    max_exact_particles: int = MAX_EXACT_PARTICLES
    # Input state and variance model.
    xi2: float = 1.0
    variance_model: str = "sharp_jx"
    # Noise.
    sigma_res: float = DEFAULT_SIGMA_RES
    gamma: float = DEFAULT_GAMMA
    # Protocols.
    num_times: int = DEFAULT_NUM_TIMES
    repetitions: int = DEFAULT_REPETITIONS
    optimal_shots: int = DEFAULT_OPTIMAL_SHOTS
    time: Optional[float] = None
    phase_points: int = 200
    # Fitting.
    weighting: str = "ml"
    search_half_width: float = 0.5
    record: Optional[str] = None
    # Surface.
    plate_distance: float = DEFAULT_PLATE_DISTANCE
    d_grid: Tuple[float, ...] = tuple(d * 1e-6 for d in _D_GRID_UM)
    temperatures: Tuple[float, ...] = (0.0, 300.0, 600.0)
    well_separation: float = DEFAULT_WELL_SEPARATION
    epsilon0: float = SAPPHIRE_EPSILON0
    alpha0: float = RB87_ALPHA0
    mode_model: str = "calibrated"
    mode_width: float = DEFAULT_MODE_WIDTH
    calibration_target: float = DEFAULT_DELTA_RATE
    calibration_distance: float = DEFAULT_PLATE_DISTANCE
    # Squeezing studies.
    xi2_values: Tuple[float, ...] = (1.0, 0.5, 0.017)
    xi2_grid: Tuple[float, ...] = (0.01, 0.017, 0.03, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0)
    particle_numbers: Tuple[int, ...] = (100, 200, 400, 800, 1600, 3200)
    # Monte Carlo.
    mc: bool = False
    trials: int = 1000
    seed: int = 0
    threads: Optional[int] = None

    def __post_init__(self) -> None:
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, list):
                setattr(self, f.name, tuple(value))
        self._verify_args()

    def _verify_args(self) -> None:
        def require(key: str, ok: bool, what: str) -> None:
            if not ok:
                raise ConfigError(f"must be {what}, got {getattr(self, key)!r}", key=key)

        require("num_particles", self.num_particles >= 1, ">= 1")
        require("ej_rate", self.ej_rate > 0, "positive")
        require("max_exact_particles", self.max_exact_particles >= 1, ">= 1")
        require("xi2", self.xi2 > 0, "positive")
        require("variance_model", self.variance_model in _VARIANCE_MODELS, f"one of {_VARIANCE_MODELS}")
        require("sigma_res", self.sigma_res >= 0, "non-negative")
        require("gamma", 0 <= self.gamma <= 0.5, "in [0, 0.5]")
        require("num_times", self.num_times >= 1, ">= 1")
        require("repetitions", self.repetitions >= 1, ">= 1")
        require("optimal_shots", self.optimal_shots >= 1, ">= 1")
        require("time", self.time is None or self.time > 0, "positive")
        require("phase_points", self.phase_points >= 3, ">= 3")
        require("weighting", self.weighting in _WEIGHTINGS, f"one of {_WEIGHTINGS}")
        require("search_half_width", 0 < self.search_half_width < 1, "in (0, 1)")
        require("plate_distance", self.plate_distance > 0, "positive")
        require("d_grid", len(self.d_grid) > 0 and min(self.d_grid) > 0, "a non-empty list of positive distances")
        require("temperatures", len(self.temperatures) > 0 and min(self.temperatures) >= 0, "a non-empty list of non-negative temperatures")
        require("well_separation", self.well_separation > 0, "positive")
        require("epsilon0", self.epsilon0 > 1, "> 1")
        require("alpha0", self.alpha0 > 0, "positive")
        require("mode_model", self.mode_model in _MODE_MODELS, f"one of {_MODE_MODELS}")
        require("mode_width", self.mode_width > 0, "positive")
        require("calibration_target", self.calibration_target > 0, "positive")
        require("calibration_distance", self.calibration_distance > 0, "positive")
        require("xi2_values", len(self.xi2_values) > 0 and min(self.xi2_values) > 0, "a non-empty list of positive values")
        require("xi2_grid", len(self.xi2_grid) > 0 and all(0 < x <= 1 for x in self.xi2_grid), "a non-empty list in (0, 1]")
        require("particle_numbers", len(self.particle_numbers) > 0 and min(self.particle_numbers) >= 2, "a non-empty list of counts >= 2")
        require("trials", self.trials >= 1, ">= 1")
        require("seed", self.seed >= 0, "non-negative")
        require("threads", self.threads is None or self.threads >= 1, ">= 1")

    @staticmethod
    def add_cli_args(parser: argparse.ArgumentParser) -> argparse.ArgumentParser:
        """Shared CLI arguments. Absent flags leave no attribute, so config files can fill them."""
        S = argparse.SUPPRESS
        parser.add_argument("--config", type=str, default=S, help="TOML config file; flags override its values")
        group = parser.add_argument_group("interferometer")
        group.add_argument("--num-particles", "-N", type=int, default=S, help=f"atom number N (default {DEFAULT_NUM_PARTICLES})")
        group.add_argument("--ej-rate", type=float, default=S, help=f"tunneling rate E_J/hbar in 1/s (default {DEFAULT_EJ_RATE})")
        group.add_argument("--delta-rate", type=float, default=S, help=f"detuning delta/hbar in 1/s (default {DEFAULT_DELTA_RATE})")
        group.add_argument("--max-exact-particles", type=int, default=S, help=f"cap for exact Dicke-basis evolution (default {MAX_EXACT_PARTICLES})")
        group.add_argument("--xi2", type=float, default=S, help="squeezing of the input state; >= 1 selects the coherent state (default 1.0)")
        group.add_argument("--variance-model", type=str, choices=_VARIANCE_MODELS, default=S, help="treat <Jx> as sharp or keep Var(Jx) (default sharp_jx)")
        group = parser.add_argument_group("noise")
        group.add_argument("--sigma-res", type=float, default=S, help=f"detection resolution in particles (default {DEFAULT_SIGMA_RES})")
        group.add_argument("--gamma", type=float, default=S, help=f"interaction strength N E_C / E_J (default {DEFAULT_GAMMA})")
        group = parser.add_argument_group("protocol")
        group.add_argument("--num-times", "-k", type=int, default=S, help=f"uniform-grid points k (default {DEFAULT_NUM_TIMES})")
        group.add_argument("--repetitions", "-m", type=int, default=S, help=f"shots per point m (default {DEFAULT_REPETITIONS})")
        group.add_argument("--optimal-shots", type=int, default=S, help=f"total shots mk at Omega=pi (default {DEFAULT_OPTIMAL_SHOTS})")
        group.add_argument("--time", "-t", type=float, default=S, help="single readout time in s (default pi/omega)")
        group.add_argument("--phase-points", type=int, default=S, help="Omega grid size of fig2a (default 200)")
        group.add_argument("--weighting", type=str, choices=_WEIGHTINGS, default=S, help="ml: model variance at the estimate; lsq: fixed weights (default ml)")
        group.add_argument("--search-half-width", type=float, default=S, help="fit interval delta*(1 -/+ w) (default 0.5)")
        group.add_argument("--record", type=str, default=S, help="record CSV (t_s, n_mean) for `fit`")
        group = parser.add_argument_group("surface")
        group.add_argument("--d", "--plate-distance", dest="plate_distance", type=float, default=S, help=f"plate distance in m (default {DEFAULT_PLATE_DISTANCE})")
        group.add_argument("--d-grid", type=float, nargs="+", default=S, help="plate distances in m for fig1 (default 3-10 um)")
        group.add_argument("--temperatures", type=float, nargs="+", default=S, help="temperatures in K; 0 selects the zero-temperature law (default 0 300 600)")
        group.add_argument("--well-separation", type=float, default=S, help=f"well separation l in m (default {DEFAULT_WELL_SEPARATION})")
        group.add_argument("--epsilon0", type=float, default=S, help=f"static dielectric constant (default {SAPPHIRE_EPSILON0})")
        group.add_argument("--alpha0", type=float, default=S, help=f"static polarizability in m^3 (default {RB87_ALPHA0})")
        group.add_argument("--mode-model", type=str, choices=_MODE_MODELS, default=S, help="how the well modes sample the potential (default calibrated)")
        group.add_argument("--mode-width", type=float, default=S, help=f"Gaussian mode width in m (default {DEFAULT_MODE_WIDTH})")
        group.add_argument("--calibration-target", type=float, default=S, help=f"zero-temperature delta/hbar at the calibration distance (default {DEFAULT_DELTA_RATE})")
        group.add_argument("--calibration-distance", type=float, default=S, help=f"calibration distance in m (default {DEFAULT_PLATE_DISTANCE})")
        group = parser.add_argument_group("squeezing studies")
        group.add_argument("--xi2-values", type=float, nargs="+", default=S, help="xi^2 curves of fig2a (default 1.0 0.5 0.017)")
        group.add_argument("--xi2-grid", type=float, nargs="+", default=S, help="xi^2 grid of fig2b")
        group.add_argument("--particle-numbers", type=int, nargs="+", default=S, help="N values of the scaling study")
        group = parser.add_argument_group("monte carlo")
        group.add_argument("--mc", action="store_true", default=S, help="validate Fisher errors by simulation")
        group.add_argument("--trials", type=int, default=S, help="Monte-Carlo trials (default 1000)")
        group.add_argument("--seed", type=int, default=S, help="base random seed (default 0)")
        group.add_argument("--threads", type=int, default=S, help="worker threads (default: number of CPUs)")
        return parser

    @classmethod
    def from_cli_args(cls, args: argparse.Namespace) -> "ExperimentArgs":
        values: Dict[str, Any] = {}
        config = getattr(args, "config", None)
        if config is not None:
            values.update(load_config(config))
        attrs = [attr.name for attr in dataclasses.fields(cls)]
        values.update({attr: getattr(args, attr) for attr in attrs if hasattr(args, attr)})
        return cls(**values)

    def to_params(self) -> Dict[str, Any]:
        """Resolved values; unset optional fields are left out."""
        return {
            f.name: getattr(self, f.name)
            for f in dataclasses.fields(self)
            if getattr(self, f.name) is not None
        }

    def create_configs(
        self,
    ) -> Tuple[InterferometerConfig, NoiseConfig, ScheduleConfig, SurfaceConfig, MonteCarloConfig]:
        interferometer_config = InterferometerConfig(
            self.num_particles, self.ej_rate, self.delta_rate, self.max_exact_particles
        )
        noise_config = NoiseConfig(self.sigma_res, self.gamma)
        schedule_config = ScheduleConfig(self.num_times, self.repetitions, self.optimal_shots)
        surface_config = SurfaceConfig(
            self.well_separation,
            self.epsilon0,
            self.alpha0,
            self.mode_model,
            self.mode_width,
            self.calibration_target,
            self.calibration_distance,
        )
        monte_carlo_config = MonteCarloConfig(self.trials, self.seed, self.threads)
        return (
            interferometer_config,
            noise_config,
            schedule_config,
            surface_config,
            monte_carlo_config,
        )


def _coerce(key: str, value: Any, default: Any) -> Any:
    if key in _OPTIONAL:
        expected = _OPTIONAL[key]
        if expected is float and isinstance(value, int) and not isinstance(value, bool):
            return float(value)
        if not isinstance(value, expected) or isinstance(value, bool):
            raise ConfigError(f"expected {expected.__name__}, got {value!r}", key=key)
        return value
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"expected true/false, got {value!r}", key=key)
        return value
    if isinstance(default, tuple):
        if not isinstance(value, list) or not value:
            raise ConfigError(f"expected a non-empty list, got {value!r}", key=key)
        return tuple(_coerce(key, v, default[0]) for v in value)
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"expected an integer, got {value!r}", key=key)
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"expected a number, got {value!r}", key=key)
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"expected a string, got {value!r}", key=key)
        return value
    return value


def parse_config(text: str, source: str = "<config>") -> Dict[str, Any]:
    """Validated key-value overrides from TOML text.

    Keys may sit at the top level or in a `[params]` table, so a run manifest
    doubles as a config file.
    """
    try:
        doc = toml.loads(text)
    except toml.TomlDecodeError as e:
        raise ConfigError(f"{source}: {e.msg}", lineno=e.lineno)
    if isinstance(doc.get("params"), dict):
        doc = doc["params"]
    defaults = {f.name: f.default for f in dataclasses.fields(ExperimentArgs)}
    values = {}
    for key, value in doc.items():
        if key not in defaults:
            raise ConfigError("unknown key", key=key)
        values[key] = _coerce(key, value, defaults[key])
    return values


def load_config(path: str) -> Dict[str, Any]:
    try:
        with open(path) as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read config file: {e}", key="config")
    return parse_config(text, source=path)


def load_experiment_args(path: Optional[str] = None) -> ExperimentArgs:
    """ExperimentArgs from a config file alone; omitted keys keep their defaults."""
    return ExperimentArgs(**(load_config(path) if path else {}))
