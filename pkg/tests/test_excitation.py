import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from circarray.errors import InvalidArgumentError
from circarray.excitation import (
    CAST_PRESETS,
    ExcitationVector,
    ModeMixSpec,
    Normalization,
    cast_preset,
    inner_product,
    mix_modes,
    mode_range,
    mode_weights,
    oam_weights,
    preset_weights,
)


def test_mode_range_even_and_odd():
    assert list(mode_range(12)) == list(range(-5, 7))
    assert list(mode_range(4)) == [-1, 0, 1, 2]
    assert list(mode_range(5)) == [-2, -1, 0, 1, 2]
    assert len(mode_range(7)) == 7


def test_mode_zero_is_uniform():
    np.testing.assert_array_equal(mode_weights(12, 0).weights, np.ones(12))


def test_mode_two_on_four_elements():
    np.testing.assert_allclose(mode_weights(4, 2).weights, [1, -1, 1, -1], atol=1e-15)


def test_mode_one_with_steering():
    w = mode_weights(12, 1, math.pi / 6).weights
    assert w[0] == pytest.approx(complex(math.sqrt(3) / 2, 0.5), abs=1e-15)


def test_mode_outside_range_needs_flag():
    with pytest.raises(InvalidArgumentError):
        mode_weights(12, -6)
    with pytest.raises(InvalidArgumentError):
        mode_weights(12, 7)
    w = mode_weights(12, -6, allow_alias=True)
    np.testing.assert_allclose(w.weights, mode_weights(12, 6).weights, atol=1e-13)


def test_oam_examples():
    np.testing.assert_array_equal(oam_weights(12, 0).weights, np.ones(12))
    np.testing.assert_allclose(oam_weights(12, 6).weights, [(-1) ** i for i in range(12)],
                               atol=1e-14)
    assert oam_weights(12, 1).weights[1] == pytest.approx(cmath.exp(1j * math.pi / 6), abs=1e-15)


def test_oam_rejects_non_integer():
    with pytest.raises(InvalidArgumentError):
        oam_weights(12, 1.5)


def test_dft_orthogonality():
    n = 12
    modes = list(mode_range(n))
    for a in modes:
        for b in modes:
            ip = inner_product(mode_weights(n, a), mode_weights(n, b))
            if a == b:
                assert ip == n
            else:
                assert abs(ip) < 1e-12 * n


@given(st.integers(-40, 40), st.integers(1, 24))
def test_oam_aliasing(ell, n):
    np.testing.assert_allclose(oam_weights(n, ell).weights, oam_weights(n, ell + n).weights,
                               rtol=0, atol=1e-12)


@given(st.integers(-20, 20))
def test_oam_weight_sum(ell):
    s = np.sum(oam_weights(12, ell).weights)
    expect = 12 if ell % 12 == 0 else 0
    assert abs(s - expect) < 1e-12 * 12


@given(st.sampled_from(list(mode_range(12))), st.floats(-10, 10))
def test_steering_is_global_phase(m, psi):
    a = mode_weights(12, m, psi).weights
    b = mode_weights(12, m, 0.0).weights
    np.testing.assert_allclose(a, cmath.exp(1j * m * psi) * b, atol=1e-12)
    np.testing.assert_allclose(np.abs(a), 1.0, atol=1e-12)


@pytest.mark.parametrize("m", list(mode_range(12)))
def test_single_mode_mix_matches_mode_weights(m):
    w = mix_modes(12, ModeMixSpec((m,), 0.3, "none")).weights
    np.testing.assert_allclose(w, mode_weights(12, m, 0.3).weights, atol=1e-15)


def test_mix_broadcast_is_ones():
    w = mix_modes(12, ModeMixSpec((0,), 0.0, Normalization.NONE)).weights
    np.testing.assert_array_equal(w, np.ones(12))


def test_mix_unicast_a_element_zero():
    w = mix_modes(12, ModeMixSpec(CAST_PRESETS["unicast-A"], 0.0, "none")).weights
    assert w[0] == pytest.approx(11.0, abs=1e-13)


def test_mix_multicast_a_closed_form():
    w = mix_modes(12, ModeMixSpec(CAST_PRESETS["multicast-A"], 0.0, "none")).weights
    assert w[0] == pytest.approx(10.0, abs=1e-13)
    assert w[6] == pytest.approx(-2.0, abs=1e-13)
    # brute force over all elements
    phi = 2 * math.pi * np.arange(12) / 12
    brute = [sum(cmath.exp(1j * m * p) for m in CAST_PRESETS["multicast-A"]) for p in phi]
    np.testing.assert_allclose(w, brute, atol=1e-12)


def test_normalizations():
    spec = CAST_PRESETS["unicast-B"]
    w = mix_modes(12, ModeMixSpec(spec)).weights
    assert np.sum(np.abs(w) ** 2) == pytest.approx(1.0, rel=1e-14)
    w = mix_modes(12, ModeMixSpec(spec, 0.0, "unit-peak")).weights
    assert np.max(np.abs(w)) == pytest.approx(1.0, rel=1e-14)


def test_empty_mode_set():
    with pytest.raises(InvalidArgumentError):
        ModeMixSpec(())


def test_mix_rejects_out_of_range_mode():
    with pytest.raises(InvalidArgumentError):
        mix_modes(12, ModeMixSpec((0, 8)))


def test_coefficients_weight_modes():
    spec = ModeMixSpec((0, 1), 0.0, "none", {1: 2.0})
    w = mix_modes(12, spec).weights
    np.testing.assert_allclose(w, 1 + 2 * mode_weights(12, 1).weights, atol=1e-14)
    with pytest.raises(InvalidArgumentError):
        ModeMixSpec((0,), coefficients={3: 1.0})


def test_cancelling_mixture_rejected():
    with pytest.raises(InvalidArgumentError):
        mix_modes(12, ModeMixSpec((0, 1), 0.0, "unit-peak", {0: 0.0, 1: 0.0}))


def test_preset_table():
    assert cast_preset("unicast-B").modes == (-3, -2, -1, 0, 1, 2, 3)
    assert cast_preset("multicast-C").modes == (-5, -4, 4, 5)
    assert cast_preset("broadcast").modes == (0,)
    assert cast_preset("multicast-B").modes == (-5, -4, -3, 3, 4, 5)
    assert cast_preset("unicast-A").modes == tuple(range(-5, 6))
    assert cast_preset("multicast-A").modes == (-5, -4, -3, -2, -1, 1, 2, 3, 4, 5)
    with pytest.raises(InvalidArgumentError):
        cast_preset("anycast")


def test_preset_weights_description():
    ex = preset_weights(12, "unicast-B")
    assert ex.description.startswith("unicast-B")
    assert ex.total_power == pytest.approx(1.0)


def test_excitation_vector_validation():
    with pytest.raises(InvalidArgumentError):
        ExcitationVector([])
    with pytest.raises(InvalidArgumentError):
        ExcitationVector([0, 0])
    with pytest.raises(InvalidArgumentError):
        ExcitationVector([1, float("nan")])
    ex = ExcitationVector([1, 2j])
    with pytest.raises(ValueError):
        ex.weights[0] = 5


def test_excitation_json_roundtrip():
    ex = preset_weights(12, "multicast-B")
    back = ExcitationVector.from_json(ex.to_json())
    np.testing.assert_array_equal(back.weights, ex.weights)
