"""Measurement model, Fisher sensitivity and maximum-likelihood fitting of delta.

A record holds, for each time t_i of a schedule, the sample mean of m
imbalance measurements. Under the central limit theorem the sample mean is
Gaussian with mean <Jz(t_i, delta)> and variance (Var Jz + sigma_res^2) / m.
"""
import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import norm

from rabisense.core.dynamics import (
    GAMMA_MAX,
    GAMMA_WARN,
    ArrayLike,
    InterferometerParams,
    dyson_correction,
    ec_rate_from_gamma,
    evolve_exact_series,
    gamma_from_ec_rate,
    interacting_mean_jz,
    mean_jz_derivative,
    mean_jz_derivative_fd,
    var_jz,
)
from rabisense.core.spin_states import DickeState, StateLike, as_moments, moments
from rabisense.logger import init_logger
from rabisense.utils.constants import MAX_EXACT_PARTICLES
from rabisense.utils.errors import DivergentSensitivityError, FitError

logger = init_logger(__name__)

# Derivatives below this fraction of their natural scale count as zero.
DERIVATIVE_ZERO_RTOL = 1e-10
VARIANCE_FLOOR = 1e-12
MAX_REWEIGHTS = 20
FD_CHECK_ATOL = 1e-7


class VarianceModel(enum.Enum):
    """How Var(Jx) of the input state enters Var Jz(t).

    FULL keeps the exact quadratic form. SHARP_JX treats <Jx> as a c-number,
    dropping Var(Jx) and its covariances.
    """

    FULL = "full"
    SHARP_JX = "sharp_jx"


class Weighting(enum.Enum):
    ML = "ml"
    LSQ = "lsq"


@dataclass(frozen=True)
class MeasurementSchedule:
    """Times at which the imbalance is read out, each repeated m times.

    Args:
        times: Readout times t_i in seconds, strictly positive and increasing.
        repetitions: Shots m per time.
    """

    times: Tuple[float, ...]
    repetitions: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        self._verify_args()

    def _verify_args(self) -> None:
        if len(self.times) < 1:
            raise ValueError("A schedule needs at least one time.")
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}.")
        times = np.asarray(self.times)
        if np.any(~np.isfinite(times)) or np.any(times <= 0):
            raise ValueError(f"Times must be finite and positive, got {self.times}.")
        if np.any(np.diff(times) <= 0):
            raise ValueError(f"Times must be strictly increasing, got {self.times}.")

    @classmethod
    def uniform(
        cls, p: InterferometerParams, num_times: int, repetitions: int
    ) -> "MeasurementSchedule":
        """t_i = 2 pi i / (omega k), i = 1..k: one Rabi period, endpoint included."""
        if num_times < 1:
            raise ValueError(f"num_times must be >= 1, got {num_times}.")
        i = np.arange(1, num_times + 1)
        return cls(tuple(2.0 * math.pi * i / (p.omega * num_times)), repetitions)

    @classmethod
    def optimal_point(cls, p: InterferometerParams, shots: int) -> "MeasurementSchedule":
        """All shots at Omega = pi."""
        return cls((math.pi / p.omega,), shots)

    @property
    def num_times(self) -> int:
        return len(self.times)

    @property
    def total_shots(self) -> int:
        return self.num_times * self.repetitions


@dataclass(frozen=True)
class NoiseModel:
    """Technical noise channels.

    Args:
        gamma: N E_C / E_J, the residual interaction strength.
        sigma_res: Detection resolution in particles (per shot).
    """

    gamma: float = 0.0
    sigma_res: float = 0.0

    def __post_init__(self) -> None:
        self._verify_args()

    def _verify_args(self) -> None:
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise ValueError(f"gamma must be >= 0, got {self.gamma}.")
        if self.gamma > GAMMA_MAX:
            raise ValueError(
                f"gamma={self.gamma:.4g} is beyond the first-order regime (max {GAMMA_MAX})."
            )
        if not (math.isfinite(self.sigma_res) and self.sigma_res >= 0):
            raise ValueError(f"sigma_res must be >= 0, got {self.sigma_res}.")

    def ec_rate(self, p: InterferometerParams, num_particles: int) -> float:
        return ec_rate_from_gamma(self.gamma, p, num_particles)

    def without_detection_noise(self) -> "NoiseModel":
        return NoiseModel(self.gamma, 0.0)


@dataclass(frozen=True)
class FitDiagnostics:
    weighting: Weighting
    iterations: int
    function_evals: int
    chi2: float


@dataclass(frozen=True)
class EstimationResult:
    """Fitted detuning with its Cramer-Rao error.

    Attributes:
        delta_est: Estimated delta / hbar in 1/s.
        delta_err: Delta delta_ML in 1/s, (sum_i 1 / Delta^2 delta(t_i))^(-1/2).
        per_time_sensitivity: Delta^2 delta(t_i) at delta_est, inf where the
            signal derivative vanishes.
        diagnostics: Fit bookkeeping.
    """

    delta_est: float
    delta_err: float
    per_time_sensitivity: Tuple[float, ...]
    diagnostics: Optional[FitDiagnostics] = None

    def __post_init__(self) -> None:
        if not self.delta_err > 0:
            raise ValueError(f"delta_err must be positive, got {self.delta_err}.")


@dataclass(frozen=True)
class ShotDistribution:
    """Gaussian law of a recorded sample mean; a zero variance is a point mass."""

    mean: float
    variance: float

    @property
    def is_point_mass(self) -> bool:
        return self.variance == 0.0

    def pdf(self, n: ArrayLike) -> ArrayLike:
        if self.is_point_mass:
            hit = np.asarray(n) == self.mean
            out = np.where(hit, np.inf, 0.0)
            return float(out) if np.ndim(out) == 0 else out
        return norm.pdf(n, self.mean, math.sqrt(self.variance))


@dataclass(frozen=True)
class Record:
    """Sample means n_i recorded at the schedule times."""

    times: Tuple[float, ...]
    n_mean: Tuple[float, ...]
    repetitions: int = field(default=1)

    def __post_init__(self) -> None:
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        object.__setattr__(self, "n_mean", tuple(float(n) for n in self.n_mean))
        if len(self.times) != len(self.n_mean):
            raise ValueError(
                f"Record has {len(self.times)} times but {len(self.n_mean)} values."
            )


class SignalModel:
    """Mean, variance and slope of the recorded imbalance as functions of delta.

    Args:
        state: Input state (Dicke coefficients or their moments).
        ej_rate: Known E_J / hbar in 1/s.
        noise: Noise channels. With gamma > 0 the mean carries the
            first-order interaction shift unless `include_interactions` is off.
        variance_model: See `VarianceModel`.
        include_interactions: Whether the model knows about E_C.
    """

    def __init__(
        self,
        state: StateLike,
        ej_rate: float,
        noise: NoiseModel = NoiseModel(),
        variance_model: VarianceModel = VarianceModel.FULL,
        include_interactions: bool = True,
    ) -> None:
        self.moments = as_moments(state)
        self.num_particles = self.moments.num_particles
        self.ej_rate = ej_rate
        self.noise = noise
        self.variance_model = variance_model
        if variance_model is VarianceModel.SHARP_JX:
            self.variance_moments = self.moments.with_sharp_jx()
        else:
            self.variance_moments = self.moments
        gamma = noise.gamma if include_interactions else 0.0
        if gamma > GAMMA_WARN:
            logger.warning(
                "gamma=%.4g exceeds %.2g; the first-order interaction shift "
                "may be inaccurate.", gamma, GAMMA_WARN
            )
        self.ec_rate = gamma * ej_rate / self.num_particles

    def params(self, delta_rate: float) -> InterferometerParams:
        return InterferometerParams(self.ej_rate, delta_rate)

    def mean(self, delta_rate: float, t: ArrayLike) -> ArrayLike:
        return interacting_mean_jz(
            self.moments, self.params(delta_rate), t, self.ec_rate, warn=False
        )

    def shot_variance(self, delta_rate: float, t: ArrayLike) -> ArrayLike:
        variance = var_jz(self.variance_moments, self.params(delta_rate), t)
        return variance + self.noise.sigma_res**2

    def _interaction_slope(self, delta_rate: float, t: float) -> float:
        # The first-order shift is differentiated numerically.
        h = 1e-4 * max(abs(delta_rate), 1e-3 * self.ej_rate)
        hi = dyson_correction(
            self.moments, self.params(delta_rate + h), t, self.ec_rate, warn=False
        )
        lo = dyson_correction(
            self.moments, self.params(delta_rate - h), t, self.ec_rate, warn=False
        )
        return (hi - lo) / (2.0 * h)

    def derivative(self, delta_rate: float, t: ArrayLike) -> ArrayLike:
        p = self.params(delta_rate)
        slope = np.asarray(mean_jz_derivative(self.moments, p, t), dtype=np.float64)
        if self.ec_rate > 0:
            shift = [self._interaction_slope(delta_rate, ti) for ti in np.atleast_1d(t)]
            slope = slope + np.asarray(shift).reshape(np.shape(t))
        return float(slope) if np.ndim(slope) == 0 else slope

    def derivative_scale(self, delta_rate: float, t: ArrayLike) -> ArrayLike:
        """Natural size of d<Jz>/d delta, used to recognise exact zeros."""
        omega = self.params(delta_rate).omega
        return 0.5 * self.num_particles * (1.0 / omega + np.asarray(t))

    def sensitivity(
        self,
        delta_rate: float,
        t: ArrayLike,
        repetitions: int,
        strict: bool = False,
        check_derivative: bool = False,
    ) -> ArrayLike:
        """Delta^2 delta(t) = (Var Jz + sigma_res^2) / (m (d<Jz>/d delta)^2)."""
        if repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {repetitions}.")
        times = np.atleast_1d(t)
        slope = np.atleast_1d(self.derivative(delta_rate, t)).astype(np.float64)
        scale = np.atleast_1d(self.derivative_scale(delta_rate, t))
        divergent = np.abs(slope) <= DERIVATIVE_ZERO_RTOL * scale
        if check_derivative and self.ec_rate == 0:
            fd = np.atleast_1d(
                mean_jz_derivative_fd(self.moments, self.params(delta_rate), t)
            )
            # Rounding in the difference quotient sets an absolute floor near slope zeros.
            tolerance = 1e-6 * np.abs(slope) + FD_CHECK_ATOL * scale
            mismatch = (np.abs(fd - slope) > tolerance) & ~divergent
            if np.any(mismatch):
                logger.warning(
                    "Analytic and finite-difference slopes disagree at t=%s.",
                    times[mismatch],
                )
        if strict and np.any(divergent):
            raise DivergentSensitivityError(
                f"d<Jz>/d delta vanishes at t={times[divergent]}."
            )
        variance = np.atleast_1d(self.shot_variance(delta_rate, t))
        with np.errstate(divide="ignore", invalid="ignore"):
            result = np.where(divergent, np.inf, variance / (repetitions * slope**2))
        return float(result[0]) if np.ndim(t) == 0 else result


def shot_distribution(
    t: float,
    delta_rate: float,
    state: StateLike,
    p: InterferometerParams,
    noise: NoiseModel,
    repetitions: int,
    variance_model: VarianceModel = VarianceModel.FULL,
) -> ShotDistribution:
    if repetitions < 1:
        raise ValueError(f"repetitions must be >= 1, got {repetitions}.")
    model = SignalModel(state, p.ej_rate, noise, variance_model)
    variance = float(model.shot_variance(delta_rate, t)) / repetitions
    return ShotDistribution(float(model.mean(delta_rate, t)), variance)


def shot_probability(
    n: ArrayLike,
    t: float,
    delta_rate: float,
    state: StateLike,
    p: InterferometerParams,
    noise: NoiseModel,
    repetitions: int,
    variance_model: VarianceModel = VarianceModel.FULL,
) -> ArrayLike:
    """p(n | delta) for a sample mean of `repetitions` shots at time t."""
    dist = shot_distribution(t, delta_rate, state, p, noise, repetitions, variance_model)
    if dist.is_point_mass:
        logger.debug("Zero variance at t=%g: returning a point mass at %g.", t, dist.mean)
    return dist.pdf(n)


def single_time_sensitivity(
    state: StateLike,
    p: InterferometerParams,
    t: ArrayLike,
    repetitions: int,
    noise: NoiseModel = NoiseModel(),
    variance_model: VarianceModel = VarianceModel.FULL,
    strict: bool = False,
    check_derivative: bool = True,
) -> ArrayLike:
    """Delta^2 delta(t) at the true delta of `p`; inf where the slope vanishes.

    With `check_derivative` the analytic slope is compared with central finite
    differences and disagreements are logged.
    """
    model = SignalModel(state, p.ej_rate, noise, variance_model)
    return model.sensitivity(
        p.delta_rate, t, repetitions, strict=strict, check_derivative=check_derivative
    )


def aggregate_sensitivity(per_time: Sequence[float]) -> float:
    """Delta delta_ML = (sum_i 1 / Delta^2 delta(t_i))^(-1/2); divergent points add nothing."""
    values = np.asarray(per_time, dtype=np.float64).reshape(-1)
    if values.size == 0:
        raise ValueError("No per-time sensitivities to aggregate.")
    if np.any(np.isnan(values)) or np.any(values <= 0):
        raise ValueError(f"Sensitivities must be positive, got {values}.")
    information = np.sum(1.0 / values)
    if information == 0:
        raise DivergentSensitivityError("Every time point has a divergent sensitivity.")
    return float(information ** -0.5)


def protocol_sensitivity(
    state: StateLike,
    p: InterferometerParams,
    schedule: MeasurementSchedule,
    noise: NoiseModel = NoiseModel(),
    variance_model: VarianceModel = VarianceModel.FULL,
) -> EstimationResult:
    """Fisher error of the whole schedule at the true delta, without fitting."""
    per_time = np.atleast_1d(
        single_time_sensitivity(
            state, p, np.asarray(schedule.times), schedule.repetitions, noise, variance_model
        )
    )
    return EstimationResult(
        p.delta_rate, aggregate_sensitivity(per_time), tuple(float(x) for x in per_time)
    )


def css_relative_sensitivity(
    p: InterferometerParams, t: ArrayLike, num_particles: int, repetitions: int = 1
) -> ArrayLike:
    """Exact closed form of Delta delta(t) / delta for the coherent state."""
    s, c = p.sin_alpha, p.cos_alpha
    phase = p.omega * np.asarray(t, dtype=np.float64)
    u = s * c * (np.cos(phase) - 1.0)
    bracket = (c * c - s * s) * (np.cos(phase) - 1.0) - s * s * phase * np.sin(phase)
    with np.errstate(divide="ignore"):
        out = np.sqrt(1.0 - u * u) / (
            math.sqrt(repetitions * num_particles) * abs(s * c) * np.abs(bracket)
        )
    return float(out) if np.ndim(out) == 0 else out


def css_relative_sensitivity_printed(
    p: InterferometerParams, t: ArrayLike, num_particles: int, repetitions: int = 1
) -> ArrayLike:
    """Small-angle form 1 / (sqrt(mN) tan a) |cos W - 1 - (sin^2 a / cos a) W sin W|^-1."""
    s, c = p.sin_alpha, p.cos_alpha
    phase = p.omega * np.asarray(t, dtype=np.float64)
    bracket = np.cos(phase) - 1.0 - (s * s / c) * phase * np.sin(phase)
    with np.errstate(divide="ignore"):
        out = 1.0 / (math.sqrt(repetitions * num_particles) * abs(s / c) * np.abs(bracket))
    return float(out) if np.ndim(out) == 0 else out


def optimal_point_relative_sensitivity(
    xi2: float, p: InterferometerParams, num_particles: int, shots: int
) -> float:
    """xi omega / (2 delta sqrt(N) sqrt(mk)) for a symmetric state read out at Omega = pi."""
    return math.sqrt(xi2) * p.omega / (
        2.0 * p.delta_rate * math.sqrt(num_particles) * math.sqrt(shots)
    )


def improvement_factor(xi2: float) -> float:
    """Optimal-point gain 1 / xi of a squeezed input over the coherent state."""
    if not xi2 > 0:
        raise ValueError(f"xi^2 must be positive, got {xi2}.")
    return 1.0 / math.sqrt(xi2)


def crossover_time(p: InterferometerParams) -> float:
    """Time where (sin^2 a / cos a) Omega = 1; beyond it the CSS sensitivity falls as 1/t."""
    if p.delta_rate == 0:
        return math.inf
    s, c = p.sin_alpha, p.cos_alpha
    return c / (s * s * p.omega)


class RecordGenerator:
    """Draws records for one true delta from precomputed means and shot spreads.

    With gamma > 0 and a Dicke state as input, the means and variances come
    from exact evolution with E_C Jz^2; with moments only, the mean carries the
    first-order interaction shift.
    """

    def __init__(
        self,
        true_delta: float,
        state: StateLike,
        p: InterferometerParams,
        schedule: MeasurementSchedule,
        noise: NoiseModel = NoiseModel(),
        variance_model: VarianceModel = VarianceModel.FULL,
        max_particles: int = MAX_EXACT_PARTICLES,
    ) -> None:
        self.schedule = schedule
        p_true = p.with_delta(true_delta)
        times = np.asarray(schedule.times)
        exact = (
            noise.gamma > 0
            and isinstance(state, DickeState)
            and state.num_particles <= max_particles
        )
        if exact:
            ec_rate = noise.ec_rate(p_true, state.num_particles)
            evolved = evolve_exact_series(state, p_true, times, ec_rate, max_particles)
            jz = [moments(e) for e in evolved]
            self.means = np.array([m.mean[2] for m in jz])
            self.shot_variances = np.array(
                [max(m.second[2, 2] - m.mean[2] ** 2, 0.0) for m in jz]
            ) + noise.sigma_res**2
        else:
            if noise.gamma > 0 and isinstance(state, DickeState):
                logger.warning(
                    "N=%d exceeds the exact-evolution cap; records use the "
                    "first-order interaction shift.", state.num_particles
                )
            model = SignalModel(state, p.ej_rate, noise, variance_model)
            self.means = np.atleast_1d(model.mean(true_delta, times))
            self.shot_variances = np.atleast_1d(model.shot_variance(true_delta, times))
        self.shot_std = np.sqrt(self.shot_variances)

    def from_normals(self, z: np.ndarray) -> Record:
        """Record from standard normals z of shape (k, m), one per shot."""
        z = np.asarray(z, dtype=np.float64)
        if z.shape != (self.schedule.num_times, self.schedule.repetitions):
            raise ValueError(
                f"Expected normals of shape {(self.schedule.num_times, self.schedule.repetitions)}, "
                f"got {z.shape}."
            )
        # The mean of m unit normals carries the 1/sqrt(m) of the sample mean.
        values = self.means + self.shot_std * z.mean(axis=1)
        return Record(self.schedule.times, tuple(values), self.schedule.repetitions)

    def draw(self, rng: np.random.Generator) -> Record:
        return self.from_normals(
            rng.standard_normal((self.schedule.num_times, self.schedule.repetitions))
        )

    def noiseless(self) -> Record:
        return Record(self.schedule.times, tuple(self.means), self.schedule.repetitions)


def simulate_record(
    true_delta: float,
    state: StateLike,
    p: InterferometerParams,
    schedule: MeasurementSchedule,
    noise: NoiseModel,
    seed: int,
    variance_model: VarianceModel = VarianceModel.FULL,
) -> Record:
    """Sample means of m Gaussian shots per time; deterministic given `seed`."""
    generator = RecordGenerator(true_delta, state, p, schedule, noise, variance_model)
    return generator.draw(np.random.default_rng(seed))


def _chi2(
    model: SignalModel, delta_rate: float, record: Record, weights: np.ndarray
) -> float:
    residual = np.asarray(record.n_mean) - np.atleast_1d(model.mean(delta_rate, np.asarray(record.times)))
    return float(np.sum(weights * residual**2))


def _weights(model: SignalModel, delta_rate: float, record: Record) -> np.ndarray:
    variance = np.atleast_1d(model.shot_variance(delta_rate, np.asarray(record.times)))
    return record.repetitions / np.maximum(variance, VARIANCE_FLOOR)


def fit_ml(
    record: Record,
    state: StateLike,
    p_known_ej: InterferometerParams,
    schedule: MeasurementSchedule,
    noise: NoiseModel,
    search_interval: Tuple[float, float],
    weighting: Weighting = Weighting.ML,
    variance_model: VarianceModel = VarianceModel.FULL,
    include_interactions: bool = True,
) -> EstimationResult:
    """Maximize the Gaussian likelihood of `record` over delta.

    ML weighting re-evaluates the model variance at each new estimate until
    the estimate is stable (iteratively reweighted least squares). LSQ
    weighting fixes the weights at the centre of the search interval.
    """
    lo, hi = (float(x) for x in search_interval)
    if not lo < hi:
        raise ValueError(f"Search interval must satisfy lo < hi, got {search_interval}.")
    if tuple(record.times) != schedule.times or record.repetitions != schedule.repetitions:
        raise ValueError("Record does not match the schedule.")
    model = SignalModel(state, p_known_ej.ej_rate, noise, variance_model, include_interactions)
    xatol = 1e-7 * max(abs(lo), abs(hi))
    center = 0.5 * (lo + hi)

    center_slopes = np.atleast_1d(model.derivative(center, np.asarray(schedule.times)))
    center_scale = np.atleast_1d(model.derivative_scale(center, np.asarray(schedule.times)))
    if np.all(np.abs(center_slopes) <= DERIVATIVE_ZERO_RTOL * center_scale):
        raise FitError("Flat likelihood: the signal does not depend on delta at any time.")

    estimate = center
    evals = 0
    iterations = 0
    max_iterations = MAX_REWEIGHTS if weighting is Weighting.ML else 1
    weights = _weights(model, center, record)
    for iterations in range(1, max_iterations + 1):
        res = minimize_scalar(
            lambda d: _chi2(model, d, record, weights),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": xatol, "maxiter": 500},
        )
        evals += int(res.nfev)
        previous, estimate = estimate, float(res.x)
        if weighting is Weighting.LSQ or abs(estimate - previous) <= xatol:
            break
        weights = _weights(model, estimate, record)
    else:
        logger.warning("Reweighting did not settle after %d passes.", max_iterations)

    if min(estimate - lo, hi - estimate) <= 10 * xatol:
        raise FitError(
            f"Optimum {estimate!r} sits at the search bound {search_interval}; "
            "the interval does not bracket the estimate."
        )
    per_time = np.atleast_1d(
        model.sensitivity(estimate, np.asarray(schedule.times), schedule.repetitions)
    )
    diagnostics = FitDiagnostics(
        weighting=weighting,
        iterations=iterations,
        function_evals=evals,
        chi2=_chi2(model, estimate, record, weights),
    )
    logger.debug(
        "fit_ml: delta=%.10g after %d passes, %d evaluations.", estimate, iterations, evals
    )
    return EstimationResult(
        estimate,
        aggregate_sensitivity(per_time),
        tuple(float(x) for x in per_time),
        diagnostics,
    )


class InteractionBias(NamedTuple):
    naive_bias: float
    aware_bias: float
    delta_err: float

    @property
    def naive_ratio(self) -> float:
        return abs(self.naive_bias) / self.delta_err

    @property
    def aware_ratio(self) -> float:
        return abs(self.aware_bias) / self.delta_err


def interaction_bias(
    state: DickeState,
    p: InterferometerParams,
    schedule: MeasurementSchedule,
    noise: NoiseModel,
    search_interval: Optional[Tuple[float, float]] = None,
) -> InteractionBias:
    """Bias of delta_est on noiseless exact-evolution data with E_C Jz^2.

    The naive fit ignores interactions; the aware fit includes the
    first-order shift. Both are reported with Delta delta_ML of the aware model.
    """
    if noise.gamma <= 0:
        raise ValueError("interaction_bias needs gamma > 0.")
    if search_interval is None:
        search_interval = (0.5 * p.delta_rate, 1.5 * p.delta_rate)
    record = RecordGenerator(p.delta_rate, state, p, schedule, noise).noiseless()
    naive = fit_ml(record, state, p, schedule, noise, search_interval, include_interactions=False)
    aware = fit_ml(record, state, p, schedule, noise, search_interval, include_interactions=True)
    gamma = gamma_from_ec_rate(noise.ec_rate(p, state.num_particles), p, state.num_particles)
    logger.info(
        "Interaction bias at gamma=%.3g: naive %.3g, first-order %.3g (Delta delta_ML=%.3g).",
        gamma, naive.delta_est - p.delta_rate, aware.delta_est - p.delta_rate, aware.delta_err,
    )
    return InteractionBias(
        naive.delta_est - p.delta_rate, aware.delta_est - p.delta_rate, aware.delta_err
    )


def noise_inflation(
    state: StateLike,
    p: InterferometerParams,
    schedule: MeasurementSchedule,
    noise: NoiseModel,
    variance_model: VarianceModel = VarianceModel.FULL,
) -> float:
    """Ratio of Delta delta_ML with and without detection noise."""
    noisy = protocol_sensitivity(state, p, schedule, noise, variance_model)
    clean = protocol_sensitivity(state, p, schedule, noise.without_detection_noise(), variance_model)
    return noisy.delta_err / clean.delta_err


def scaling_exponent(results: Sequence[Tuple[float, float]]) -> float:
    """beta in Delta delta ~ N^-beta from a least-squares fit in log-log space."""
    table = np.asarray(results, dtype=np.float64)
    if table.ndim != 2 or table.shape[1] != 2:
        raise ValueError("Expected (N, delta_err) pairs.")
    n, err = table[:, 0], table[:, 1]
    if np.unique(n).size < 4:
        raise ValueError("At least four distinct particle numbers are needed.")
    if n.min() <= 0 or n.max() / n.min() < 10:
        raise ValueError("Particle numbers must be positive and span at least one decade.")
    if np.any(~np.isfinite(err)) or np.any(err <= 0):
        raise ValueError("Sensitivities must be finite and positive.")
    if np.all(err == err[0]):
        raise ValueError("Degenerate input: every sensitivity is identical.")
    slope, _ = np.polyfit(np.log(n), np.log(err), 1)
    return float(-slope)


def uniform_fit_interval(p: InterferometerParams, half_width: float = 0.5) -> Tuple[float, float]:
    """Default search interval delta (1 -/+ half_width)."""
    d = abs(p.delta_rate)
    return (p.delta_rate - half_width * d, p.delta_rate + half_width * d)

