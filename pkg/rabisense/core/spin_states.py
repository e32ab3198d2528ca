"""Collective-spin input states in the Dicke basis |n, N-n>.

n is the occupation of well a, so Jz = n - N/2. States are stored as a
coefficient vector c_0..c_N; the constructors only produce real vectors, the
exact evolution in `dynamics` produces complex ones.
"""
import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import gammaln

from rabisense.logger import init_logger
from rabisense.utils.errors import NumericalError, UndefinedSqueezingError

logger = init_logger(__name__)

NORM_TOL = 1e-12
SYMMETRY_TOL = 1e-12
TRACE_RTOL = 1e-9


class Statistics(enum.Enum):
    """Particle statistics of the trapped gas."""

    BOSON = enum.auto()
    FERMION = enum.auto()


class DickeState:
    """A pure N-particle state in the two-mode Dicke basis.

    Args:
        coeffs: Amplitudes c_0..c_N over |n, N-n>. Real or complex.
        label: Free-form description carried into logs and text dumps.
        norm_tol: Allowed deviation of sum |c_n|^2 from one.
    """

    def __init__(
        self,
        coeffs: np.ndarray,
        label: Optional[str] = None,
        norm_tol: float = NORM_TOL,
    ) -> None:
        coeffs = np.array(coeffs)
        if np.iscomplexobj(coeffs):
            coeffs = coeffs.astype(np.complex128)
        else:
            coeffs = coeffs.astype(np.float64)
        coeffs.setflags(write=False)
        self.coeffs = coeffs
        self.label = label
        self.norm_tol = norm_tol
        self._verify_args()

    def _verify_args(self) -> None:
        if self.coeffs.ndim != 1 or self.coeffs.size < 2:
            raise ValueError(
                f"Coefficients must be a vector of length N+1 >= 2, got shape "
                f"{self.coeffs.shape}."
            )
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("Coefficients must be finite.")
        norm2 = float(np.sum(np.abs(self.coeffs) ** 2))
        if abs(norm2 - 1.0) > self.norm_tol:
            raise ValueError(
                f"State is not normalized: sum |c_n|^2 = {norm2!r} "
                f"(tolerance {self.norm_tol:g})."
            )

    @property
    def num_particles(self) -> int:
        return self.coeffs.size - 1

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.coeffs)

    @property
    def is_symmetric(self) -> bool:
        """c_n = c_{N-n} for all n."""
        return bool(
            np.allclose(self.coeffs, self.coeffs[::-1], rtol=0.0, atol=SYMMETRY_TOL)
        )

    def overlap(self, other: "DickeState") -> complex:
        if other.num_particles != self.num_particles:
            raise ValueError(
                f"Particle numbers differ: {self.num_particles} vs "
                f"{other.num_particles}."
            )
        return complex(np.vdot(self.coeffs, other.coeffs))

    def to_text(self) -> str:
        """Two columns `n c_n` (three, `n re im`, for complex states)."""
        lines = [f"# {self.label or 'dicke state'} N={self.num_particles}"]
        for n, c in enumerate(self.coeffs):
            if self.is_real:
                lines.append(f"{n} {float(c)!r}")
            else:
                lines.append(f"{n} {c.real!r} {c.imag!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, norm_tol: float = NORM_TOL) -> "DickeState":
        rows = []
        label = None
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                label = line[1:].strip().rsplit(" N=", 1)[0]
                continue
            rows.append([float(tok) for tok in line.split()])
        if not rows:
            raise ValueError("No coefficient rows found.")
        table = np.array(rows)
        if not np.array_equal(table[:, 0], np.arange(len(rows))):
            raise ValueError("Rows must list n = 0..N in order.")
        if table.shape[1] == 3:
            coeffs = table[:, 1] + 1j * table[:, 2]
        else:
            coeffs = table[:, 1]
        return cls(coeffs, label=label, norm_tol=norm_tol)

    def __repr__(self) -> str:
        return (
            f"DickeState(N={self.num_particles}, label={self.label!r}, "
            f"real={self.is_real}, symmetric={self.is_symmetric})"
        )


@dataclass(frozen=True)
class SpinMoments:
    """First and symmetrized second moments of (Jx, Jy, Jz).

    Attributes:
        mean: (<Jx>, <Jy>, <Jz>).
        second: 3x3 matrix of <(J_i J_j + J_j J_i)/2>.
        num_particles: N; the spin length is N/2.
    """

    mean: np.ndarray
    second: np.ndarray
    num_particles: int

    def __post_init__(self) -> None:
        mean = np.array(self.mean, dtype=np.float64)
        second = np.array(self.second, dtype=np.float64)
        mean.setflags(write=False)
        second.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "second", second)
        self._verify_args()

    def _verify_args(self) -> None:
        if self.mean.shape != (3,) or self.second.shape != (3, 3):
            raise ValueError(
                f"Expected a 3-vector and a 3x3 matrix, got {self.mean.shape} "
                f"and {self.second.shape}."
            )
        scale = max(1.0, float(np.max(np.abs(self.second))))
        if not np.allclose(self.second, self.second.T, rtol=0.0, atol=1e-12 * scale):
            raise ValueError("Second-moment matrix must be symmetric.")
        if np.any(np.diag(self.second) < self.mean**2 - 1e-9 * scale):
            raise ValueError("Second moments imply a negative variance.")

    def covariance(self) -> np.ndarray:
        return self.second - np.outer(self.mean, self.mean)

    def with_sharp_jx(self) -> "SpinMoments":
        """Moments with <Jx> treated as a c-number: Var(Jx) and all Jx covariances vanish."""
        second = np.array(self.second)
        second[0, :] = self.mean[0] * self.mean
        second[:, 0] = self.mean[0] * self.mean
        return SpinMoments(self.mean, second, self.num_particles)


class GaussianMoments(NamedTuple):
    jx_mean: float
    jx2: float
    jy2: float
    jz2: float


class OptimalSqueezing(NamedTuple):
    sigma: float
    xi2_gaussian: float
    xi2_exact: float


def ladder_coefficients(num_particles: int) -> np.ndarray:
    # <n+1| J+ |n> = sqrt((n+1)(N-n)), n = 0..N-1
    n = np.arange(num_particles, dtype=np.float64)
    return np.sqrt((n + 1.0) * (num_particles - n))


def jz_eigenvalues(num_particles: int) -> np.ndarray:
    return np.arange(num_particles + 1, dtype=np.float64) - num_particles / 2.0


def apply_spin_operators(coeffs: np.ndarray) -> np.ndarray:
    """Return the 3 x (N+1) array (Jx c, Jy c, Jz c) using the tridiagonal ladder action."""
    num_particles = coeffs.size - 1
    b = ladder_coefficients(num_particles)
    c = coeffs.astype(np.complex128)
    raised = np.zeros_like(c)
    lowered = np.zeros_like(c)
    raised[1:] = b * c[:-1]
    lowered[:-1] = b * c[1:]
    jx = 0.5 * (raised + lowered)
    jy = -0.5j * (raised - lowered)
    jz = jz_eigenvalues(num_particles) * c
    return np.stack([jx, jy, jz])


def moments(state: DickeState) -> SpinMoments:
    """Exact first and symmetrized second moments of a Dicke-basis state."""
    c = state.coeffs.astype(np.complex128)
    applied = apply_spin_operators(c)
    mean = np.real(applied @ np.conj(c))
    # <J_i J_j> = <J_i psi | J_j psi>; the real part is the symmetrized product.
    second = np.real(np.conj(applied) @ applied.T)
    second = 0.5 * (second + second.T)
    num_particles = state.num_particles
    spin = num_particles / 2.0
    casimir = spin * (spin + 1.0)
    trace = float(np.trace(second))
    if abs(trace - casimir) > TRACE_RTOL * casimir:
        raise NumericalError(
            f"Tr<J J> = {trace!r} differs from j(j+1) = {casimir!r}; "
            "state is not a pure N-particle state."
        )
    return SpinMoments(mean, second, num_particles)


def make_css(
    num_particles: int, statistics: Statistics = Statistics.BOSON
) -> DickeState:
    """Coherent spin state along +x: c_n = sqrt(binom(N, n)) / 2^(N/2).

    For fermions the product over N occupied transverse modes has the same
    collective-spin moments as the bosonic state, so both map to this vector
    with N the number of occupied modes.
    """
    if num_particles < 1:
        raise ValueError(f"A coherent state needs N >= 1, got {num_particles}.")
    n = np.arange(num_particles + 1)
    log_c = 0.5 * (
        gammaln(num_particles + 1) - gammaln(n + 1) - gammaln(num_particles - n + 1)
    ) - 0.5 * num_particles * math.log(2.0)
    coeffs = np.exp(log_c)
    coeffs /= np.linalg.norm(coeffs)
    if statistics is Statistics.FERMION:
        logger.debug(
            "Fermionic CSS with %d occupied transverse modes mapped onto the "
            "bosonic Dicke state.", num_particles
        )
    return DickeState(coeffs, label=f"css[{statistics.name.lower()}]")


def make_gaussian_squeezed(num_particles: int, sigma: float) -> DickeState:
    """Symmetric Gaussian state c_n ~ exp(-(n - N/2)^2 / (4 sigma^2)), truncated to [0, N]."""
    if num_particles < 2:
        raise ValueError(f"A squeezed state needs N >= 2, got {num_particles}.")
    if not sigma > 0:
        raise ValueError(f"Gaussian width must be positive, got {sigma}.")
    if sigma > math.sqrt(num_particles) / 2.0:
        logger.warning(
            "sigma=%.4g is wider than the coherent state (sqrt(N)/2=%.4g): the "
            "state is anti-squeezed.", sigma, math.sqrt(num_particles) / 2.0
        )
    log_c = -(jz_eigenvalues(num_particles) ** 2) / (4.0 * sigma**2)
    coeffs = np.exp(log_c - log_c.max())
    coeffs /= np.linalg.norm(coeffs)
    return DickeState(coeffs, label=f"gaussian[sigma={sigma:.6g}]")


def make_twin_fock(num_particles: int) -> DickeState:
    if num_particles < 2 or num_particles % 2:
        raise ValueError(f"Twin-Fock states need an even N >= 2, got {num_particles}.")
    coeffs = np.zeros(num_particles + 1)
    coeffs[num_particles // 2] = 1.0
    return DickeState(coeffs, label="twin-fock")


def squeezing_parameter(
    m: SpinMoments, num_particles: Optional[int] = None
) -> float:
    """xi^2 = N <Jz^2> / <Jx>^2."""
    if num_particles is None:
        num_particles = m.num_particles
    jx = float(m.mean[0])
    if abs(jx) <= 1e-12 * max(1, num_particles):
        raise UndefinedSqueezingError(
            "<Jx> vanishes; xi^2 is undefined for this state. Use "
            "gaussian_squeezing_parameter for the sigma-parameterized family."
        )
    return num_particles * float(m.second[2, 2]) / jx**2


def gaussian_squeezing_parameter(sigma: float, num_particles: int) -> float:
    """Large-N Gaussian approximation 4 sigma^2 exp(1/(4 sigma^2)) / N."""
    if not sigma > 0:
        raise ValueError(f"Gaussian width must be positive, got {sigma}.")
    return 4.0 * sigma**2 * math.exp(1.0 / (4.0 * sigma**2)) / num_particles


def gaussian_moment_approximations(sigma: float, num_particles: int) -> GaussianMoments:
    n = num_particles
    return GaussianMoments(
        jx_mean=0.5 * n * math.exp(-1.0 / (8.0 * sigma**2)),
        jx2=n**2 / 8.0 * (1.0 + math.exp(-1.0 / (2.0 * sigma**2))),
        jy2=n**2 / 8.0 * (1.0 - math.exp(-1.0 / (2.0 * sigma**2))),
        jz2=sigma**2,
    )


def sigma_for_squeezing(xi2: float, num_particles: int) -> float:
    """Invert the Gaussian approximation on the sigma >= 1/2 branch."""
    xi2_min = gaussian_squeezing_parameter(0.5, num_particles)
    if xi2 < xi2_min:
        raise ValueError(
            f"xi^2={xi2} is below the Gaussian-family minimum e/N={xi2_min:.4g}."
        )
    if xi2 == xi2_min:
        return 0.5
    hi = math.sqrt(num_particles * xi2) + 1.0
    return brentq(
        lambda s: gaussian_squeezing_parameter(s, num_particles) - xi2,
        0.5,
        hi,
        xtol=1e-14,
        rtol=1e-14,
    )


def state_for_squeezing(xi2: float, num_particles: int) -> DickeState:
    """Input state with (approximately) the requested xi^2; xi^2 >= 1 means the coherent state."""
    if not xi2 > 0:
        raise ValueError(f"xi^2 must be positive, got {xi2}.")
    if xi2 >= 1.0:
        return make_css(num_particles)
    return make_gaussian_squeezed(num_particles, sigma_for_squeezing(xi2, num_particles))


def optimal_squeezing_width(num_particles: int) -> OptimalSqueezing:
    """Width minimizing the Gaussian-approximation xi^2, with the exact xi^2 there."""
    res = minimize_scalar(
        lambda s: gaussian_squeezing_parameter(s, num_particles),
        bounds=(0.1, max(1.0, math.sqrt(num_particles) / 2.0)),
        method="bounded",
        options={"xatol": 1e-8},
    )
    sigma = float(res.x)
    exact = squeezing_parameter(moments(make_gaussian_squeezed(num_particles, sigma)))
    return OptimalSqueezing(sigma, float(res.fun), exact)


StateLike = Union[DickeState, SpinMoments]


def as_moments(state: StateLike) -> SpinMoments:
    if isinstance(state, SpinMoments):
        return state
    return moments(state)
