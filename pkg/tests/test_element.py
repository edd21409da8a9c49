import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from circarray.element import (
    AnalyticPatch,
    CosPower,
    Isotropic,
    analytic_patch,
    cos_power_exponent,
    direction_to_angles,
    eval_element,
    fit_cos_power,
    import_tabulated,
    read_tabulated_csv,
    sample_pattern,
    write_tabulated_csv,
)
from circarray.errors import FormatError, InvalidArgumentError
from circarray.excitation import ExcitationVector
from circarray.farfield import azimuth_cut, directivity, elevation_cut, hpbw, synthesize_pattern
from circarray.geometry import ArrayGeometry, element_frame, default_geometry

unit_vectors = st.tuples(
    st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)
).filter(lambda v: np.linalg.norm(v) > 1e-3).map(lambda v: np.asarray(v) / np.linalg.norm(v))


def _dir(theta_deg, phi_deg):
    t, p = math.radians(theta_deg), math.radians(phi_deg)
    return np.array([math.sin(t) * math.cos(p), math.sin(t) * math.sin(p), math.cos(t)])


@given(unit_vectors)
def test_isotropic_everywhere(d):
    assert eval_element(Isotropic(), d) == (1, 0)


def test_non_unit_direction_rejected():
    with pytest.raises(InvalidArgumentError):
        eval_element(Isotropic(), [1.0, 1.0, 0.0])
    with pytest.raises(InvalidArgumentError):
        direction_to_angles([1.0, 0.0])


def test_cos_power_boresight_unity():
    e_t, e_p = eval_element(CosPower(1.7, 1.7), [1.0, 0.0, 0.0])
    assert abs(e_t) == pytest.approx(1.0, abs=1e-15)
    assert e_p == 0


def test_cos_power_half_power_at_50_deg():
    el = fit_cos_power(100.0, 104.0)
    # 50 degrees off boresight, in the local xz plane
    e_t, _ = eval_element(el, _dir(40.0, 0.0))
    assert abs(e_t) ** 2 == pytest.approx(0.5, abs=1e-6)
    e_t, _ = eval_element(el, _dir(90.0, 52.0))
    assert abs(e_t) ** 2 == pytest.approx(0.5, abs=1e-6)


def test_exponent_values():
    assert cos_power_exponent(120.0) == pytest.approx(1.0, abs=1e-14)
    assert cos_power_exponent(100.0) == pytest.approx(math.log(0.5) / math.log(math.cos(math.radians(50))))
    assert cos_power_exponent(100.0) == pytest.approx(1.568, abs=1e-3)
    assert cos_power_exponent(104.0) == pytest.approx(1.4290, abs=1e-4)


@pytest.mark.parametrize("bad", [0.0, -10.0, 180.0, 200.0, 360.0, 400.0, float("nan")])
def test_exponent_degenerate(bad):
    with pytest.raises(InvalidArgumentError):
        cos_power_exponent(bad)


def test_back_lobe_floor():
    el = fit_cos_power(100.0, 104.0, backlobe_db=-20.0)
    e_t, _ = eval_element(el, [-1.0, 0.0, 0.0])
    assert abs(e_t) ** 2 == pytest.approx(0.01, rel=1e-12)
    hard = fit_cos_power(100.0, 104.0, backlobe_db=-math.inf)
    assert eval_element(hard, [-1.0, 0.0, 0.0])[0] == 0


@given(unit_vectors)
def test_patterns_finite(d):
    for el in (fit_cos_power(100, 104), analytic_patch()):
        e_t, e_p = eval_element(el, d)
        assert math.isfinite(abs(e_t)) and math.isfinite(abs(e_p))


def test_analytic_patch_polarization_regions():
    el = analytic_patch()
    frame = element_frame(default_geometry(), 0)
    # horizontal plane along boresight: co-polar dominates
    e_t, e_p = eval_element(el, frame.to_local(_dir(90.0, 0.0)))
    assert abs(e_t) >= 10 * abs(e_p)
    # zenith approached along local azimuth 90 deg: cross-polar dominates
    e_t, e_p = el.evaluate(0.0, math.pi / 2)
    assert abs(e_p) >= 10 * abs(e_t)


def test_analytic_patch_cross_pol_upper_hemisphere_only():
    el = analytic_patch()
    t = np.radians(np.linspace(91, 180, 30))
    p = np.radians(np.linspace(0, 359, 30))
    _, e_p = el.evaluate(t, p)
    assert np.all(e_p == 0)


def test_analytic_patch_parameter_checks():
    with pytest.raises(InvalidArgumentError):
        AnalyticPatch(1.0, 1.0, cross_exponent=-1.0)
    with pytest.raises(InvalidArgumentError):
        CosPower(-1.0, 1.0)


def test_tabulated_constant_grid_is_isotropic():
    tab = import_tabulated([0, math.pi], [0, math.pi], np.ones((2, 2)), np.zeros((2, 2)))
    rng = np.random.default_rng(1)
    t, p = rng.uniform(0, math.pi, 100), rng.uniform(-7, 7, 100)
    e_t, e_p = tab.evaluate(t, p)
    np.testing.assert_allclose(e_t, 1.0, atol=1e-15)
    np.testing.assert_allclose(e_p, 0.0, atol=1e-15)


def test_tabulated_linear_phase_interpolation():
    theta = np.linspace(0, math.pi, 5)
    phi = np.arange(8) * (2 * math.pi / 8)
    ph = np.repeat(1.2 * theta[:, None], 8, axis=1)
    tab = import_tabulated(theta, phi, np.exp(1j * ph), np.zeros((5, 8)))
    for i in range(4):
        mid = (theta[i] + theta[i + 1]) / 2
        e_t, _ = tab.evaluate(mid, 0.3)
        assert abs(np.angle(e_t * np.exp(-1.2j * mid))) < 1e-12


def test_tabulated_clamps_outside_theta():
    tab = sample_pattern(fit_cos_power(100, 104), 19, 36)
    a, _ = tab.evaluate(-0.1, 0.0)
    b, _ = tab.evaluate(0.0, 0.0)
    assert a == b


def test_tabulated_roundtrip_cos_power():
    el = fit_cos_power(100.0, 104.0)
    tab = sample_pattern(el, 181, 360)
    rng = np.random.default_rng(7)
    t = rng.uniform(0, math.pi, 20000)
    p = rng.uniform(0, 2 * math.pi, 20000)
    err = np.abs(tab.evaluate(t, p)[0] - el.evaluate(t, p)[0])
    assert math.sqrt(np.mean(err ** 2)) < 1e-3


@pytest.mark.parametrize("theta, phi", [
    ([0.0], [0.0, 1.0]),                       # too short
    ([0.0, 1.0, 3.0], [0.0, math.pi]),          # irregular theta
    ([0.0, math.pi / 2], [0.0, math.pi]),       # does not reach pi
    ([0.0, math.pi], [0.0, 1.0]),               # phi does not close
])
def test_tabulated_bad_grid(theta, phi):
    shape = (len(theta), len(phi))
    with pytest.raises(FormatError):
        import_tabulated(theta, phi, np.ones(shape), np.zeros(shape))


def test_tabulated_shape_mismatch():
    with pytest.raises(FormatError):
        import_tabulated([0, math.pi], [0, math.pi], np.ones((3, 2)), np.zeros((2, 2)))


def test_tabulated_csv_roundtrip(tmp_path):
    tab = sample_pattern(analytic_patch(), 37, 72)
    path = tmp_path / "el.csv"
    write_tabulated_csv(path, tab)
    back = read_tabulated_csv(path)
    np.testing.assert_allclose(back.e_theta, tab.e_theta, atol=1e-8)
    np.testing.assert_allclose(back.e_phi, tab.e_phi, atol=1e-8)
    np.testing.assert_allclose(back.theta, tab.theta, atol=1e-12)


def test_tabulated_csv_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(FormatError):
        read_tabulated_csv(p)
    p.write_text("theta_deg,phi_deg,re_etheta,im_etheta,re_ephi,im_ephi\n0,0,1,0,x,0\n")
    with pytest.raises(FormatError):
        read_tabulated_csv(p)
    p.write_text("theta_deg,phi_deg,re_etheta,im_etheta,re_ephi,im_ephi\n"
                 "0,0,1,0,0,0\n0,180,1,0,0,0\n180,0,1,0,0,0\n")
    with pytest.raises(FormatError):
        read_tabulated_csv(p)


def _single(el):
    g = ArrayGeometry(1, 9.69e-3, 28e9)
    return synthesize_pattern(g, el, ExcitationVector([1.0]))


def test_fitted_element_directivity_near_reference():
    d = directivity(_single(fit_cos_power(100.0, 104.0)))
    assert abs(d.peak_dbi - 5.74) <= 1.5
    assert d.peak_theta == pytest.approx(math.pi / 2)
    assert d.peak_phi == pytest.approx(0.0)


def test_fitted_element_beamwidths():
    pat = _single(fit_cos_power(100.0, 104.0))
    assert hpbw(elevation_cut(pat, 0.0)) == pytest.approx(100.0, abs=0.5)
    assert hpbw(azimuth_cut(pat, math.pi / 2)) == pytest.approx(104.0, abs=0.5)
