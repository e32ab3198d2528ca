"""A Monte-Carlo worker that simulates records and fits them."""
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from rabisense.core.dynamics import InterferometerParams
from rabisense.core.estimation import (
    MeasurementSchedule,
    NoiseModel,
    RecordGenerator,
    VarianceModel,
    Weighting,
    fit_ml,
    protocol_sensitivity,
    uniform_fit_interval,
)
from rabisense.core.spin_states import StateLike
from rabisense.logger import init_logger
from rabisense.utils.errors import FitError
from rabisense.utils.utils import parallel_map, trial_rng

logger = init_logger(__name__)


@dataclass(frozen=True)
class MonteCarloSummary:
    """Spread of fitted estimates around the truth.

    Attributes:
        estimates: delta_est per trial in trial order; NaN for failed fits.
        true_delta: delta used to generate the records.
        fisher_err: Delta delta_ML predicted at the true delta.
    """

    estimates: Tuple[float, ...]
    true_delta: float
    fisher_err: float

    @property
    def _valid(self) -> np.ndarray:
        values = np.asarray(self.estimates)
        return values[np.isfinite(values)]

    @property
    def trials(self) -> int:
        return len(self.estimates)

    @property
    def failures(self) -> int:
        return self.trials - self._valid.size

    @property
    def bias(self) -> float:
        return float(np.mean(self._valid) - self.true_delta)

    @property
    def rmse(self) -> float:
        return float(np.sqrt(np.mean((self._valid - self.true_delta) ** 2)))

    @property
    def rmse_ratio(self) -> float:
        """RMSE over the Fisher prediction; about one when the bound is saturated."""
        return self.rmse / self.fisher_err


class MonteCarloWorker:
    """Simulates and fits one trial at a time.

    Trial i draws its shots from a stream seeded by (seed, i) only, so the
    same seed gives the same normals for any noise setting or thread count.
    """

    def __init__(
        self,
        true_delta: float,
        state: StateLike,
        p: InterferometerParams,
        schedule: MeasurementSchedule,
        noise: NoiseModel,
        seed: int,
        search_interval: Optional[Tuple[float, float]] = None,
        weighting: Weighting = Weighting.ML,
        variance_model: VarianceModel = VarianceModel.FULL,
    ) -> None:
        self.true_delta = true_delta
        self.state = state
        self.p = p.with_delta(true_delta)
        self.schedule = schedule
        self.noise = noise
        self.seed = seed
        self.search_interval = search_interval or uniform_fit_interval(self.p)
        self.weighting = weighting
        self.variance_model = variance_model
        self.generator = RecordGenerator(
            true_delta, state, self.p, schedule, noise, variance_model
        )

    def normals(self, trial: int) -> np.ndarray:
        rng = trial_rng(self.seed, trial)
        return rng.standard_normal((self.schedule.num_times, self.schedule.repetitions))

    def run_trial(self, trial: int) -> float:
        record = self.generator.from_normals(self.normals(trial))
        try:
            result = fit_ml(
                record,
                self.state,
                self.p,
                self.schedule,
                self.noise,
                self.search_interval,
                weighting=self.weighting,
                variance_model=self.variance_model,
            )
        except FitError as e:
            logger.debug("Trial %d failed: %s", trial, e)
            return math.nan
        return result.delta_est


def run_monte_carlo(
    true_delta: float,
    state: StateLike,
    p: InterferometerParams,
    schedule: MeasurementSchedule,
    noise: NoiseModel,
    trials: int,
    seed: int,
    search_interval: Optional[Tuple[float, float]] = None,
    weighting: Weighting = Weighting.ML,
    variance_model: VarianceModel = VarianceModel.FULL,
    threads: Optional[int] = None,
) -> MonteCarloSummary:
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}.")
    worker = MonteCarloWorker(
        true_delta, state, p, schedule, noise, seed, search_interval, weighting, variance_model
    )
    estimates = parallel_map(worker.run_trial, range(trials), threads)
    fisher = protocol_sensitivity(state, worker.p, schedule, noise, variance_model)
    summary = MonteCarloSummary(tuple(estimates), true_delta, fisher.delta_err)
    if summary.failures:
        logger.warning("%d of %d fits failed.", summary.failures, trials)
    logger.info(
        "Monte Carlo (%d trials, seed %d): bias=%.3g, RMSE=%.4g, Fisher=%.4g.",
        trials, seed, summary.bias, summary.rmse, summary.fisher_err,
    )
    return summary
