import math

import numpy as np
import pytest

from rabisense.core.spin_states import (
    DickeState,
    SpinMoments,
    Statistics,
    gaussian_moment_approximations,
    gaussian_squeezing_parameter,
    make_css,
    make_gaussian_squeezed,
    make_twin_fock,
    moments,
    optimal_squeezing_width,
    sigma_for_squeezing,
    squeezing_parameter,
    state_for_squeezing,
)
from rabisense.utils.errors import UndefinedSqueezingError


@pytest.mark.parametrize("n", [1, 10, 2500])
def test_css_moments(n):
    m = moments(make_css(n))
    assert m.mean[0] == pytest.approx(n / 2, rel=1e-12)
    assert m.mean[1] == pytest.approx(0.0, abs=1e-9)
    assert m.mean[2] == pytest.approx(0.0, abs=1e-9)
    assert m.second[1, 1] == pytest.approx(n / 4, rel=1e-9)
    assert m.second[2, 2] == pytest.approx(n / 4, rel=1e-9)
    assert m.covariance()[0, 0] == pytest.approx(0.0, abs=1e-6 * n)
    assert np.trace(m.second) == pytest.approx(n / 2 * (n / 2 + 1), rel=1e-12)


def test_css_is_coherent():
    assert squeezing_parameter(moments(make_css(400))) == pytest.approx(1.0, rel=1e-10)


def test_fermion_css_matches_boson():
    boson = make_css(50)
    fermion = make_css(50, Statistics.FERMION)
    np.testing.assert_allclose(boson.coeffs, fermion.coeffs)
    assert "fermion" in fermion.label


def test_unnormalized_state_rejected():
    with pytest.raises(ValueError):
        DickeState(np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        DickeState(np.array([1.0]))


def test_state_is_read_only():
    state = make_css(4)
    with pytest.raises(ValueError):
        state.coeffs[0] = 0.0


def test_text_dump_restores_state():
    state = make_gaussian_squeezed(20, 1.0)
    restored = DickeState.from_text(state.to_text())
    np.testing.assert_array_equal(restored.coeffs, state.coeffs)
    assert restored.label == state.label
    assert abs(restored.overlap(state)) == pytest.approx(1.0)


def test_text_dump_of_complex_state():
    coeffs = np.array([1.0, 1.0j]) / math.sqrt(2)
    restored = DickeState.from_text(DickeState(coeffs).to_text())
    assert not restored.is_real
    np.testing.assert_allclose(restored.coeffs, coeffs)


def test_gaussian_state_is_symmetric():
    state = make_gaussian_squeezed(100, 2.0)
    assert state.is_symmetric
    assert moments(state).mean[2] == pytest.approx(0.0, abs=1e-12)


def test_narrowest_gaussian_squeezing():
    xi2 = squeezing_parameter(moments(make_gaussian_squeezed(100, 0.5)))
    assert xi2 == pytest.approx(0.02428, rel=0.15)
    assert gaussian_squeezing_parameter(0.5, 100) == pytest.approx(math.e / 100)


def test_twin_fock_squeezing_is_undefined():
    m = moments(make_twin_fock(10))
    with pytest.raises(UndefinedSqueezingError):
        squeezing_parameter(m)
    with pytest.raises(ValueError):
        make_twin_fock(9)


def test_sigma_for_squeezing_inverts_gaussian_law():
    sigma = sigma_for_squeezing(0.1, 2500)
    assert sigma > 0.5
    assert gaussian_squeezing_parameter(sigma, 2500) == pytest.approx(0.1, rel=1e-10)
    with pytest.raises(ValueError):
        sigma_for_squeezing(0.5 * math.e / 2500, 2500)


def test_state_for_squeezing():
    assert state_for_squeezing(1.0, 30).label.startswith("css")
    assert state_for_squeezing(2.0, 30).label.startswith("css")
    squeezed = state_for_squeezing(0.3, 2500)
    assert squeezing_parameter(moments(squeezed)) == pytest.approx(0.3, rel=0.05)


def test_optimal_squeezing_width():
    best = optimal_squeezing_width(1000)
    assert best.sigma == pytest.approx(0.5, abs=1e-4)
    assert best.xi2_gaussian == pytest.approx(math.e / 1000, rel=1e-6)
    assert best.xi2_exact < 1.0


def test_sharp_jx_drops_jx_fluctuations():
    m = moments(make_gaussian_squeezed(100, 1.0))
    sharp = m.with_sharp_jx()
    cov = sharp.covariance()
    np.testing.assert_allclose(cov[0], 0.0, atol=1e-9)
    np.testing.assert_allclose(cov[:, 0], 0.0, atol=1e-9)
    assert sharp.second[2, 2] == m.second[2, 2]


def test_moments_validation():
    with pytest.raises(ValueError):
        SpinMoments(np.zeros(3), np.diag([1.0, 1.0, -1.0]), 2)
    with pytest.raises(ValueError):
        SpinMoments(np.zeros(2), np.eye(3), 2)


def _moment_values(m: SpinMoments):
    return (m.mean[0], m.second[0, 0], m.second[1, 1], m.second[2, 2])


@pytest.mark.parametrize("n", [400, 2500])
def test_gaussian_moment_formulas_within_width_bound(n):
    for sigma in np.linspace(2.0, math.sqrt(n) / 2, 6):
        exact = _moment_values(moments(make_gaussian_squeezed(n, sigma)))
        approx = gaussian_moment_approximations(sigma, n)
        for e, a in zip(exact, approx):
            assert abs(a - e) <= 3.0 / sigma**2 * abs(e)


def test_gaussian_moments_at_width_ten():
    n, sigma = 2500, 10.0
    m = moments(make_gaussian_squeezed(n, sigma))
    approx = gaussian_moment_approximations(sigma, n)
    assert m.mean[0] == pytest.approx(n / 2 * math.exp(-1 / (8 * sigma**2)), rel=1e-3)
    assert m.mean[0] == pytest.approx(approx.jx_mean, rel=1e-3)
    assert m.second[0, 0] == pytest.approx(approx.jx2, rel=1e-2)
    assert m.second[1, 1] == pytest.approx(approx.jy2, rel=1e-2)
    assert m.second[2, 2] == pytest.approx(sigma**2, rel=1e-2)


def test_twin_fock_moments():
    n = 100
    m = moments(make_twin_fock(n))
    np.testing.assert_allclose(m.mean, 0.0, atol=1e-12)
    assert m.second[2, 2] == pytest.approx(0.0, abs=1e-12)
    expected = (n / 2) * (n / 2 + 1) / 2
    assert m.second[0, 0] == pytest.approx(expected, rel=1e-12)
    assert m.second[1, 1] == pytest.approx(expected, rel=1e-12)


def test_narrow_gaussian_converges_to_twin_fock():
    n = 100
    fock = make_twin_fock(n).coeffs
    distances = [
        np.linalg.norm(make_gaussian_squeezed(n, sigma).coeffs - fock) for sigma in (0.5, 0.3, 0.1)
    ]
    assert distances[0] > distances[1] > distances[2]
    assert distances[2] < 1e-9


@pytest.mark.parametrize("n", [400, 2500])
def test_coherent_width_gaussian_matches_css(n):
    wide = moments(make_gaussian_squeezed(n, math.sqrt(n) / 2))
    css = moments(make_css(n))
    assert squeezing_parameter(wide) == pytest.approx(1.0, rel=2e-2)
    np.testing.assert_allclose(wide.mean, css.mean, rtol=2e-2, atol=1e-9 * n)
    np.testing.assert_allclose(wide.second, css.second, rtol=2e-2, atol=1e-9 * n**2)
