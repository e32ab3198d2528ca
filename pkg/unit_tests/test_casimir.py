import pytest

from rabisense.core.casimir import (
    ModeModel,
    Potential,
    SurfaceSetup,
    calibrate_modes,
    detuning,
    detuning_at,
    detuning_curve,
    regime_crossover_separation,
    thermal_wavelength,
    v_cp_thermal,
    v_cp_zero_temperature,
)

L = 4.8e-6


def test_potentials_at_four_microns():
    s = SurfaceSetup(plate_distance=4e-6)
    assert v_cp_zero_temperature(-L / 2, s) == pytest.approx(-1.13234e-33, rel=1e-4)
    assert v_cp_thermal(-L / 2, s) == pytest.approx(-6.18118e-34, rel=1e-4)


def test_potential_rejects_points_behind_the_plate():
    s = SurfaceSetup(plate_distance=4e-6)
    with pytest.raises(ValueError):
        v_cp_zero_temperature(-L / 2 - 5e-6, s)


def test_point_detuning():
    s = SurfaceSetup(plate_distance=4e-6)
    assert detuning(s) == pytest.approx(5.1396, rel=1e-4)
    assert detuning_at(s, 300.0) == pytest.approx(2.6555, rel=1e-4)
    assert detuning_at(s, 600.0) == pytest.approx(2 * detuning_at(s, 300.0))
    with pytest.raises(ValueError):
        detuning(s.at_temperature(0.0), Potential.THERMAL)


def test_regime_crossover():
    assert thermal_wavelength(300.0) == pytest.approx(7.633e-6, rel=1e-3)
    r = regime_crossover_separation(300.0)
    assert r == pytest.approx(0.96 * thermal_wavelength(300.0))
    s = SurfaceSetup(plate_distance=r)
    assert v_cp_zero_temperature(-L / 2, s) == pytest.approx(v_cp_thermal(-L / 2, s), rel=1e-12)


def _narrow_mode_excess(d: float) -> float:
    point = SurfaceSetup(plate_distance=d)
    narrow = SurfaceSetup(plate_distance=d, mode_model=ModeModel.GAUSSIAN, mode_width=L / 100)
    return detuning(narrow) / detuning(point) - 1.0


def test_narrow_modes_approach_point_limit():
    far = _narrow_mode_excess(8e-6)
    assert 0 < far < 1e-3
    # <r^-4> over a mode of width w is r^-4 (1 + 10 w^2 / r^2) to leading order.
    assert _narrow_mode_excess(4e-6) == pytest.approx(1.491e-3, rel=0.01)


def test_leakage_scales_detuning():
    s = SurfaceSetup(plate_distance=5e-6, mode_model=ModeModel.GAUSSIAN)
    leaky = SurfaceSetup(plate_distance=5e-6, mode_model=ModeModel.GAUSSIAN, leakage=0.1)
    assert detuning(leaky) == pytest.approx(0.8 * detuning(s), rel=1e-12)


def test_mode_validation():
    with pytest.raises(ValueError):
        SurfaceSetup(mode_model=ModeModel.GAUSSIAN, mode_width=L / 4)
    with pytest.raises(ValueError):
        SurfaceSetup(plate_distance=0.5e-6, mode_model=ModeModel.GAUSSIAN, mode_width=0.24e-6)
    with pytest.raises(ValueError):
        SurfaceSetup(leakage=0.5)
    with pytest.raises(ValueError):
        SurfaceSetup(epsilon0=1.0)


def test_calibrated_modes_hit_target():
    calibrated = calibrate_modes(SurfaceSetup(), 4.4, 4e-6)
    assert calibrated.mode_model is ModeModel.GAUSSIAN
    assert 0 < calibrated.leakage < 0.5
    assert detuning(calibrated.at_distance(4e-6)) == pytest.approx(4.4, rel=1e-8)
    with pytest.raises(ValueError):
        calibrate_modes(SurfaceSetup(), 50.0, 4e-6)


def test_detuning_curve_falls_with_distance():
    rows = detuning_curve([3e-6, 5e-6, 8e-6], SurfaceSetup(), (0.0, 300.0))
    assert [r[0] for r in rows] == [3e-6, 5e-6, 8e-6]
    assert all(len(r) == 3 for r in rows)
    zero_t = [r[1] for r in rows]
    assert zero_t == sorted(zero_t, reverse=True)
    with pytest.raises(ValueError):
        detuning_curve([], SurfaceSetup())
