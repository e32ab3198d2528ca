"""Pipelines that assemble the core modules into plot-ready tables.

Every `run_*` function takes resolved `ExperimentArgs` and returns an
`ExperimentResult`; nothing here touches the filesystem except `run_fit`
reading its input record.
"""
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from rabisense.core.casimir import ModeModel, SurfaceSetup, detuning_at
from rabisense.core.dynamics import InterferometerParams
from rabisense.core.estimation import (
    MeasurementSchedule,
    NoiseModel,
    Record,
    VarianceModel,
    Weighting,
    crossover_time,
    fit_ml,
    improvement_factor,
    optimal_point_relative_sensitivity,
    protocol_sensitivity,
    scaling_exponent,
    simulate_record,
    single_time_sensitivity,
    uniform_fit_interval,
)
from rabisense.core.spin_states import (
    DickeState,
    make_css,
    make_gaussian_squeezed,
    moments,
    optimal_squeezing_width,
    sigma_for_squeezing,
    state_for_squeezing,
)
from rabisense.engine.arg_utils import ExperimentArgs
from rabisense.logger import init_logger
from rabisense.utils.io import RECORD_HEADER, RESULT_HEADER, read_record_csv
from rabisense.utils.utils import parallel_map
from rabisense.worker.monte_carlo import run_monte_carlo

logger = init_logger(__name__)


@dataclass
class ExperimentResult:
    """A table plus the scalar findings and provenance of one pipeline run."""

    name: str
    header: Tuple[str, ...]
    rows: List[Tuple[Any, ...]]
    summary: Dict[str, Any] = field(default_factory=dict)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def column(self, name: str) -> List[Any]:
        idx = self.header.index(name)
        return [row[idx] for row in self.rows]


def _temperature_label(temperature: float) -> str:
    return f"delta_{temperature:g}K_persec"


def _surface_metadata(setup: SurfaceSetup) -> Dict[str, Any]:
    meta = {
        "mode_model": setup.mode_model.name.lower(),
        "well_separation_m": setup.well_separation,
    }
    if setup.mode_model is ModeModel.GAUSSIAN:
        meta["mode_width_m"] = setup.mode_width
        meta["leakage"] = setup.leakage
    return meta


def _variance_model(cfg: ExperimentArgs) -> VarianceModel:
    return VarianceModel(cfg.variance_model)


def _input_state(cfg: ExperimentArgs, num_particles: Optional[int] = None) -> DickeState:
    return state_for_squeezing(cfg.xi2, num_particles or cfg.num_particles)


def run_detuning(cfg: ExperimentArgs) -> ExperimentResult:
    """delta / hbar at one plate distance for every configured temperature."""
    _, _, _, surface_config, _ = cfg.create_configs()
    setup = surface_config.get_setup(cfg.plate_distance)
    row = (cfg.plate_distance,) + tuple(detuning_at(setup, T) for T in cfg.temperatures)
    header = ("d_m",) + tuple(_temperature_label(T) for T in cfg.temperatures)
    return ExperimentResult("detuning", header, [row], metadata=_surface_metadata(setup))


def run_fig1(cfg: ExperimentArgs) -> ExperimentResult:
    """Detuning curves with coherent-state error bars of the uniform k x m protocol.

    The error bar at each distance is Delta delta_ML at the zero-temperature
    detuning with both noise channels; `significance` is the separation of the
    300 K (or first finite-temperature) curve from the zero-temperature one in
    units of it.
    """
    interferometer_config, noise_config, schedule_config, surface_config, mc_config = (
        cfg.create_configs()
    )
    noise = noise_config.get_noise_model()
    state = make_css(cfg.num_particles)
    state_m = moments(state)
    temperatures = list(cfg.temperatures)
    if 0.0 not in temperatures:
        temperatures.insert(0, 0.0)
    finite = [T for T in temperatures if T > 0]
    compare_to = 300.0 if 300.0 in finite else (finite[0] if finite else None)
    # Calibrated modes are fitted here, before the worker threads share the config.
    reference = surface_config.get_setup(cfg.calibration_distance)

    def row_at(d: float) -> Tuple[Any, ...]:
        setup = surface_config.get_setup(d)
        deltas = {T: detuning_at(setup, T) for T in temperatures}
        p = interferometer_config.get_params(deltas[0.0])
        schedule = schedule_config.uniform(p)
        err = protocol_sensitivity(state_m, p, schedule, noise).delta_err
        row = (d,) + tuple(deltas[T] for T in temperatures) + (err,)
        if compare_to is not None:
            row += (abs(deltas[compare_to] - deltas[0.0]) / err,)
        if cfg.mc:
            summary = run_monte_carlo(
                deltas[0.0], state, p, schedule, noise, mc_config.trials, mc_config.seed,
                threads=1,
            )
            row += (summary.rmse,)
        return row

    rows = parallel_map(row_at, cfg.d_grid, cfg.threads)
    header = ("d_m",) + tuple(_temperature_label(T) for T in temperatures) + ("err_persec",)
    if compare_to is not None:
        header += ("significance",)
    if cfg.mc:
        header += ("mc_rmse_persec",)
    metadata = _surface_metadata(reference)
    metadata["calibration_target_persec"] = cfg.calibration_target
    metadata["calibration_distance_m"] = cfg.calibration_distance
    return ExperimentResult("fig1", header, rows, metadata=metadata)


def _relative_curve(
    state_m, p: InterferometerParams, times: np.ndarray, variance_model: VarianceModel
) -> np.ndarray:
    delta2 = single_time_sensitivity(state_m, p, times, 1, variance_model=variance_model)
    return np.sqrt(delta2) / p.delta_rate


def _locate_minimum(
    state_m, p: InterferometerParams, variance_model: VarianceModel
) -> Tuple[float, float]:
    """Phase and value of the smallest Delta delta / delta with Omega in (pi/2, 3pi/2)."""

    def objective(phase: float) -> float:
        t = phase / p.omega
        return float(_relative_curve(state_m, p, np.array([t]), variance_model)[0])

    res = minimize_scalar(
        objective, bounds=(0.5 * math.pi, 1.5 * math.pi), method="bounded",
        options={"xatol": 1e-8},
    )
    return float(res.x), float(res.fun)


def run_fig2a(cfg: ExperimentArgs) -> ExperimentResult:
    """Single-shot Delta delta(t) / delta over one Rabi period for several xi^2."""
    p = InterferometerParams(cfg.ej_rate, cfg.delta_rate)
    variance_model = _variance_model(cfg)
    phases = np.linspace(0.0, 2.0 * math.pi, cfg.phase_points)
    times = phases / p.omega
    curves = []
    minima: List[Dict[str, float]] = []
    for xi2 in cfg.xi2_values:
        state_m = moments(state_for_squeezing(xi2, cfg.num_particles))
        curves.append(_relative_curve(state_m, p, times, variance_model))
        phase_min, value_min = _locate_minimum(state_m, p, variance_model)
        at_pi = float(_relative_curve(state_m, p, np.array([math.pi / p.omega]), variance_model)[0])
        minima.append({
            "xi2": xi2,
            "min_phase": phase_min,
            "min_rel_err": value_min,
            "rel_err_at_pi": at_pi,
        })
        logger.info(
            "fig2a xi2=%g: minimum %.5g at Omega=%.4f (pi=%.4f).",
            xi2, value_min, phase_min, math.pi,
        )
    rows = []
    for i, (phase, t) in enumerate(zip(phases, times)):
        values = [float(c[i]) for c in curves]
        divergent = not all(math.isfinite(v) for v in values)
        # Divergent points are flagged; their value cells stay empty.
        cells = tuple(v if math.isfinite(v) else None for v in values)
        rows.append((float(phase), float(t)) + cells + (divergent,))
    header = ("phase", "t_s") + tuple(f"rel_err_xi2_{x:g}" for x in cfg.xi2_values) + ("divergent",)
    return ExperimentResult("fig2a", header, rows, summary={"minima": minima})


def run_fig2b(cfg: ExperimentArgs) -> ExperimentResult:
    """Optimal-point versus uniform-grid Delta delta_ML / delta across xi^2."""
    _, _, schedule_config, _, _ = cfg.create_configs()
    p = InterferometerParams(cfg.ej_rate, cfg.delta_rate)
    variance_model = _variance_model(cfg)
    optimal = schedule_config.optimal_point(p)
    uniform = schedule_config.uniform(p)
    rows = []
    for xi2 in cfg.xi2_grid:
        state = state_for_squeezing(xi2, cfg.num_particles)
        state_m = moments(state)
        best = protocol_sensitivity(state_m, p, optimal, NoiseModel(), variance_model)
        grid = protocol_sensitivity(state_m, p, uniform, NoiseModel(), variance_model)
        sigma = sigma_for_squeezing(xi2, cfg.num_particles) if xi2 < 1 else None
        rows.append(
            (
                xi2,
                sigma,
                best.delta_err / p.delta_rate,
                grid.delta_err / p.delta_rate,
                grid.delta_err / best.delta_err,
                optimal_point_relative_sensitivity(xi2, p, cfg.num_particles, optimal.total_shots),
                improvement_factor(xi2),
            )
        )
    header = (
        "xi2",
        "sigma",
        "optimal_rel_err",
        "uniform_rel_err",
        "uniform_over_optimal",
        "optimal_formula_rel_err",
        "improvement_factor",
    )
    return ExperimentResult("fig2b", header, rows)


def run_scaling(cfg: ExperimentArgs) -> ExperimentResult:
    """Particle-number scaling of the optimal-point error: coherent vs sigma = 1/2 inputs."""
    p = InterferometerParams(cfg.ej_rate, cfg.delta_rate)
    variance_model = _variance_model(cfg)
    schedule = MeasurementSchedule.optimal_point(p, cfg.optimal_shots)

    def row_at(n: int) -> Tuple[Any, ...]:
        css = protocol_sensitivity(moments(make_css(n)), p, schedule, NoiseModel(), variance_model)
        squeezed = protocol_sensitivity(
            moments(make_gaussian_squeezed(n, 0.5)), p, schedule, NoiseModel(), variance_model
        )
        best = optimal_squeezing_width(n)
        return (n, css.delta_err, squeezed.delta_err, best.sigma, best.xi2_exact, math.e / n)

    rows = parallel_map(row_at, cfg.particle_numbers, cfg.threads)
    beta_css = scaling_exponent([(r[0], r[1]) for r in rows])
    beta_squeezed = scaling_exponent([(r[0], r[2]) for r in rows])
    logger.info("Scaling exponents: coherent %.4f, sigma=1/2 %.4f.", beta_css, beta_squeezed)
    header = (
        "num_particles",
        "css_err_persec",
        "squeezed_err_persec",
        "sigma_star",
        "xi2_exact_at_sigma_star",
        "e_over_n",
    )
    return ExperimentResult(
        "scaling",
        header,
        rows,
        summary={"beta_css": beta_css, "beta_squeezed": beta_squeezed},
    )


def run_crossover(cfg: ExperimentArgs) -> ExperimentResult:
    """Time beyond which the coherent-state sensitivity improves as 1/t."""
    p = InterferometerParams(cfg.ej_rate, cfg.delta_rate)
    t_star = crossover_time(p)
    rows = [(t_star, p.omega, p.alpha, p.rabi_period)]
    return ExperimentResult(
        "crossover",
        ("t_star_s", "omega_persec", "alpha_rad", "rabi_period_s"),
        rows,
        summary={"t_star_s": t_star},
    )


def run_sensitivity(cfg: ExperimentArgs) -> ExperimentResult:
    """Fisher errors of a single readout time and of both protocols."""
    interferometer_config, noise_config, schedule_config, _, _ = cfg.create_configs()
    p = interferometer_config.get_params()
    noise = noise_config.get_noise_model()
    variance_model = _variance_model(cfg)
    state_m = moments(_input_state(cfg))
    t = cfg.time if cfg.time is not None else math.pi / p.omega
    single = float(
        single_time_sensitivity(state_m, p, t, cfg.repetitions, noise, variance_model)
    )
    single_err = math.sqrt(single)
    rows = [("single", t, 1, cfg.repetitions, single_err, single_err / p.delta_rate)]
    for name, schedule in (
        ("uniform", schedule_config.uniform(p)),
        ("optimal", schedule_config.optimal_point(p)),
    ):
        err = protocol_sensitivity(state_m, p, schedule, noise, variance_model).delta_err
        rows.append(
            (name, schedule.times[-1], schedule.num_times, schedule.repetitions, err, err / p.delta_rate)
        )
    header = ("protocol", "t_last_s", "k", "m", "delta_err_persec", "relative_err")
    return ExperimentResult("sensitivity", header, rows)


def _simulated_record(cfg: ExperimentArgs, p: InterferometerParams, noise: NoiseModel) -> Record:
    schedule = MeasurementSchedule.uniform(p, cfg.num_times, cfg.repetitions)
    return simulate_record(
        p.delta_rate, _input_state(cfg), p, schedule, noise, cfg.seed, _variance_model(cfg)
    )


def run_simulate(cfg: ExperimentArgs) -> ExperimentResult:
    """One record of the uniform protocol at the configured delta."""
    interferometer_config, noise_config, _, _, _ = cfg.create_configs()
    p = interferometer_config.get_params()
    record = _simulated_record(cfg, p, noise_config.get_noise_model())
    rows = list(zip(record.times, record.n_mean))
    return ExperimentResult("simulate", RECORD_HEADER, rows)


def run_fit(cfg: ExperimentArgs) -> ExperimentResult:
    """Fit delta to a record file, or to a freshly simulated record when none is given."""
    interferometer_config, noise_config, _, _, _ = cfg.create_configs()
    p = interferometer_config.get_params()
    noise = noise_config.get_noise_model()
    if cfg.record is not None:
        pairs = read_record_csv(cfg.record)
        record = Record(
            tuple(t for t, _ in pairs), tuple(n for _, n in pairs), cfg.repetitions
        )
    else:
        record = _simulated_record(cfg, p, noise)
    schedule = MeasurementSchedule(record.times, cfg.repetitions)
    result = fit_ml(
        record,
        _input_state(cfg),
        p,
        schedule,
        noise,
        uniform_fit_interval(p, cfg.search_half_width),
        weighting=Weighting(cfg.weighting),
        variance_model=_variance_model(cfg),
    )
    row = (
        result.delta_est,
        result.delta_err,
        schedule.num_times,
        schedule.repetitions,
        cfg.xi2,
        cfg.sigma_res,
        cfg.gamma,
        cfg.seed,
    )
    return ExperimentResult(
        "fit",
        RESULT_HEADER,
        [row],
        summary={"iterations": result.diagnostics.iterations, "chi2": result.diagnostics.chi2},
    )


EXPERIMENTS = {
    "detuning": run_detuning,
    "sensitivity": run_sensitivity,
    "simulate": run_simulate,
    "fit": run_fit,
    "fig1": run_fig1,
    "fig2a": run_fig2a,
    "fig2b": run_fig2b,
    "scaling": run_scaling,
    "crossover": run_crossover,
}


def run_experiment(name: str, cfg: ExperimentArgs) -> ExperimentResult:
    if name not in EXPERIMENTS:
        raise ValueError(f"Unknown experiment: {name}. Must be one of {sorted(EXPERIMENTS)}.")
    logger.info("Running %s", name)
    return EXPERIMENTS[name](cfg)
