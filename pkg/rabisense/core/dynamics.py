"""Collective-spin dynamics under H = -E_J Jx + delta Jz + E_C Jz^2.

All energies are angular rates (energy / hbar, in 1/s); time is in seconds.
The non-interacting part is a rotation, so the Heisenberg-picture imbalance is
Jz(t) = u Jx + v Jy + w Jz. The exact propagator works on the Dicke
coefficients, where H is tridiagonal.
"""
import math
from dataclasses import dataclass, replace
from typing import List, NamedTuple, Sequence, Union

import numpy as np
import scipy.sparse as sp
from scipy.integrate import quad
from scipy.sparse.linalg import expm_multiply

from rabisense.core.spin_states import (
    DickeState,
    SpinMoments,
    ladder_coefficients,
    jz_eigenvalues,
)
from rabisense.logger import init_logger
from rabisense.utils.constants import MAX_EXACT_PARTICLES
from rabisense.utils.errors import EvolutionError, QuadratureError

logger = init_logger(__name__)

ArrayLike = Union[float, np.ndarray]

NORM_DRIFT_TOL = 1e-10
GAMMA_WARN = 0.2
GAMMA_MAX = 0.5
DYSON_TRUST_FRACTION = 0.1


@dataclass(frozen=True)
class InterferometerParams:
    """Tunneling and detuning rates of the double well.

    Args:
        ej_rate: E_J / hbar in 1/s. Must be positive.
        delta_rate: delta / hbar in 1/s. Positive when the plate-side well is
            lower in energy.
    """

    ej_rate: float
    delta_rate: float

    def __post_init__(self) -> None:
        self._verify_args()

    def _verify_args(self) -> None:
        if not (math.isfinite(self.ej_rate) and self.ej_rate > 0):
            raise ValueError(f"ej_rate must be positive, got {self.ej_rate}.")
        if not math.isfinite(self.delta_rate):
            raise ValueError(f"delta_rate must be finite, got {self.delta_rate}.")

    @property
    def omega(self) -> float:
        return math.hypot(self.ej_rate, self.delta_rate)

    @property
    def alpha(self) -> float:
        return math.atan2(self.delta_rate, self.ej_rate)

    @property
    def cos_alpha(self) -> float:
        return self.ej_rate / self.omega

    @property
    def sin_alpha(self) -> float:
        return self.delta_rate / self.omega

    @property
    def rabi_period(self) -> float:
        return 2.0 * math.pi / self.omega

    def time_at_phase(self, phase: ArrayLike) -> ArrayLike:
        """Time t at which Omega = omega t equals `phase`."""
        return np.asarray(phase, dtype=np.float64) / self.omega

    def with_delta(self, delta_rate: float) -> "InterferometerParams":
        return replace(self, delta_rate=delta_rate)


class RotationCoefficients(NamedTuple):
    """Row (u, v, w) of the rotation taking Jz(0) to Jz(t)."""

    u: ArrayLike
    v: ArrayLike
    w: ArrayLike

    def as_array(self) -> np.ndarray:
        return np.stack(np.broadcast_arrays(self.u, self.v, self.w))


def _check_times(t: ArrayLike) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    if np.any(~np.isfinite(t)) or np.any(t < 0):
        raise ValueError(f"Evolution times must be finite and >= 0, got {t}.")
    return t


def _unwrap(x: np.ndarray) -> ArrayLike:
    return float(x) if np.ndim(x) == 0 else x


def rotation_coefficients(p: InterferometerParams, t: ArrayLike) -> RotationCoefficients:
    t = _check_times(t)
    phase = p.omega * t
    s, c = p.sin_alpha, p.cos_alpha
    cos_phase = np.cos(phase)
    u = s * c * (cos_phase - 1.0)
    v = -c * np.sin(phase)
    w = c * c * cos_phase + s * s
    return RotationCoefficients(_unwrap(u), _unwrap(v), _unwrap(w))


def rotation_derivatives(p: InterferometerParams, t: ArrayLike) -> RotationCoefficients:
    """d(u, v, w)/d delta at fixed E_J and t."""
    t = _check_times(t)
    omega = p.omega
    s, c = p.sin_alpha, p.cos_alpha
    phase = omega * t
    cos_phase, sin_phase = np.cos(phase), np.sin(phase)
    d_alpha = p.ej_rate / omega**2
    d_phase = t * p.delta_rate / omega
    du = (c * c - s * s) * (cos_phase - 1.0) * d_alpha - s * c * sin_phase * d_phase
    dv = s * sin_phase * d_alpha - c * cos_phase * d_phase
    dw = 2.0 * s * c * (1.0 - cos_phase) * d_alpha - c * c * sin_phase * d_phase
    return RotationCoefficients(_unwrap(du), _unwrap(dv), _unwrap(dw))


def mean_jz(state_m: SpinMoments, p: InterferometerParams, t: ArrayLike) -> ArrayLike:
    r = rotation_coefficients(p, t).as_array()
    return _unwrap(np.tensordot(state_m.mean, r, axes=1))


def var_jz(state_m: SpinMoments, p: InterferometerParams, t: ArrayLike) -> ArrayLike:
    r = rotation_coefficients(p, t).as_array()
    second = np.einsum("i...,ij,j...->...", r, state_m.second, r)
    first = np.tensordot(state_m.mean, r, axes=1)
    # Round-off can push a vanishing variance slightly below zero.
    return _unwrap(np.maximum(second - first**2, 0.0))


def mean_jz_derivative(
    state_m: SpinMoments, p: InterferometerParams, t: ArrayLike
) -> ArrayLike:
    """d<Jz(t)>/d delta from the closed-form derivatives of (u, v, w)."""
    dr = rotation_derivatives(p, t).as_array()
    return _unwrap(np.tensordot(state_m.mean, dr, axes=1))


def mean_jz_derivative_fd(
    state_m: SpinMoments, p: InterferometerParams, t: ArrayLike, rel_step: float = 1e-6
) -> ArrayLike:
    """Central finite-difference cross-check of `mean_jz_derivative`."""
    h = rel_step * max(abs(p.delta_rate), 1e-3 * p.ej_rate)
    hi = mean_jz(state_m, p.with_delta(p.delta_rate + h), t)
    lo = mean_jz(state_m, p.with_delta(p.delta_rate - h), t)
    return _unwrap((np.asarray(hi) - np.asarray(lo)) / (2.0 * h))


def css_mean_signal(p: InterferometerParams, t: ArrayLike, num_particles: int) -> ArrayLike:
    """Small-angle form (N/2) tan(alpha) (cos(Omega) - 1) of the coherent-state signal.

    `mean_jz` is exact; this differs from it by a factor cos^2(alpha).
    """
    phase = p.omega * _check_times(t)
    return _unwrap(0.5 * num_particles * math.tan(p.alpha) * (np.cos(phase) - 1.0))


def ec_rate_from_gamma(gamma: float, p: InterferometerParams, num_particles: int) -> float:
    return gamma * p.ej_rate / num_particles


def gamma_from_ec_rate(ec_rate: float, p: InterferometerParams, num_particles: int) -> float:
    return num_particles * ec_rate / p.ej_rate


def hamiltonian(
    num_particles: int, p: InterferometerParams, ec_rate: float = 0.0
) -> sp.csr_matrix:
    """Tridiagonal H / hbar in the Dicke basis."""
    m = jz_eigenvalues(num_particles)
    diag = p.delta_rate * m + ec_rate * m * m
    off = -0.5 * p.ej_rate * ladder_coefficients(num_particles)
    return sp.diags([off, diag, off], [-1, 0, 1], format="csr")


def _verify_evolution_args(state: DickeState, ec_rate: float, max_particles: int) -> None:
    if state.num_particles > max_particles:
        raise ValueError(
            f"N={state.num_particles} exceeds the exact-evolution cap of "
            f"{max_particles} particles."
        )
    if not (math.isfinite(ec_rate) and ec_rate >= 0):
        raise ValueError(f"ec_rate must be finite and >= 0, got {ec_rate}.")


def _checked_state(coeffs: np.ndarray, label: str) -> DickeState:
    drift = abs(float(np.vdot(coeffs, coeffs).real) - 1.0)
    if drift > NORM_DRIFT_TOL:
        raise EvolutionError("Propagation lost unitarity", drift)
    return DickeState(coeffs, label=label, norm_tol=NORM_DRIFT_TOL)


def evolve_exact(
    state: DickeState,
    p: InterferometerParams,
    t: float,
    ec_rate: float = 0.0,
    max_particles: int = MAX_EXACT_PARTICLES,
) -> DickeState:
    """Apply exp(-i H t) to the coefficient vector with a Krylov/Taylor action."""
    return evolve_exact_series(state, p, [t], ec_rate, max_particles)[0]


def evolve_exact_series(
    state: DickeState,
    p: InterferometerParams,
    times: Sequence[float],
    ec_rate: float = 0.0,
    max_particles: int = MAX_EXACT_PARTICLES,
) -> List[DickeState]:
    """Evolve to every time in `times`, propagating incrementally in sorted order.

    Results are returned in the order of `times`.
    """
    _verify_evolution_args(state, ec_rate, max_particles)
    times = _check_times(times).reshape(-1)
    h = hamiltonian(state.num_particles, p, ec_rate)
    order = np.argsort(times, kind="stable")
    results: List[DickeState] = [None] * len(times)  # type: ignore
    coeffs = state.coeffs.astype(np.complex128)
    now = 0.0
    for idx in order:
        step = float(times[idx]) - now
        if step > 0:
            coeffs = expm_multiply(-1j * step * h, coeffs)
            now = float(times[idx])
        results[idx] = _checked_state(coeffs, f"{state.label or 'state'}(t={now:.6g})")
    logger.debug(
        "Evolved N=%d over %d times up to t=%.4g s (E_C=%.4g/s).",
        state.num_particles, len(times), now, ec_rate,
    )
    return results


def _check_gamma(gamma: float) -> None:
    if gamma > GAMMA_MAX:
        raise ValueError(
            f"gamma={gamma:.4g} is beyond the first-order regime (max {GAMMA_MAX})."
        )
    if gamma > GAMMA_WARN:
        logger.warning(
            "gamma=%.4g exceeds %.2g; the first-order interaction correction "
            "may be inaccurate.", gamma, GAMMA_WARN
        )


def dyson_correction(
    state_m: SpinMoments,
    p: InterferometerParams,
    t: float,
    ec_rate: float,
    warn: bool = True,
) -> float:
    """First-order-in-E_C shift of <Jz(t)>.

    The interaction-picture commutator integral reduces to
    -2 E_C int_0^t r(s)^T S (r(s) x r(t)) ds, with r the rotation row and S the
    symmetrized second moments of the input state.
    """
    if ec_rate == 0.0:
        return 0.0
    if ec_rate < 0:
        raise ValueError(f"ec_rate must be >= 0, got {ec_rate}.")
    t = float(_check_times(t))
    if t == 0.0:
        return 0.0
    if warn:
        _check_gamma(gamma_from_ec_rate(ec_rate, p, state_m.num_particles))
    r_t = rotation_coefficients(p, t).as_array()
    second = state_m.second

    def integrand(s: float) -> float:
        r_s = rotation_coefficients(p, s).as_array()
        return float(r_s @ second @ np.cross(r_s, r_t))

    periods = p.omega * t / (2.0 * math.pi)
    result = quad(
        integrand,
        0.0,
        t,
        epsabs=1e-12 * float(np.trace(second)),
        epsrel=1e-10,
        limit=max(200, int(50 * math.ceil(periods))),
        full_output=1,
    )
    if len(result) > 3:
        raise QuadratureError(f"Interaction integral did not converge at t={t}: {result[3]}")
    correction = -2.0 * ec_rate * result[0]
    if warn:
        signal = mean_jz(state_m, p, t)
        if abs(correction) > DYSON_TRUST_FRACTION * abs(signal):
            logger.warning(
                "Interaction correction %.4g exceeds %d%% of the signal %.4g at "
                "t=%.4g s; the first-order expansion is not trustworthy.",
                correction, int(100 * DYSON_TRUST_FRACTION), signal, t,
            )
    return correction


def interacting_mean_jz(
    state_m: SpinMoments,
    p: InterferometerParams,
    t: ArrayLike,
    ec_rate: float,
    warn: bool = True,
) -> ArrayLike:
    """<Jz(t)> including the first-order interaction shift."""
    bare = np.asarray(mean_jz(state_m, p, t))
    if ec_rate == 0.0:
        return _unwrap(bare)
    times = np.atleast_1d(_check_times(t))
    shift = np.array(
        [dyson_correction(state_m, p, ti, ec_rate, warn=warn) for ti in times]
    )
    return _unwrap((bare.reshape(-1) + shift).reshape(np.shape(t)))
