import cmath

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fqcover.fourier import (
    DimensionMismatchError,
    SpectralFn,
    all_coords,
    convolve_diff,
    coords_to_flat,
    dot,
    flat_to_coords,
    fourier_forward,
    fourier_forward_direct,
    fourier_invert,
    plancherel_check,
)
from fqcover.harness import get_field, stream
from fqcover.incidence import PointSet


def dft_oracle(field, d, values):
    """Independent double-sum transform: explicit character values via cmath,
    scalar field ops only."""
    q, p = field.q, field.p
    size = q ** d
    out = []
    for m in range(size):
        mc = flat_to_coords(q, d, m)
        acc = 0j
        for x in range(size):
            xc = flat_to_coords(q, d, x)
            dv = 0
            for i in range(d):
                dv = field.add(dv, field.mul(xc[i], mc[i]))
            acc += cmath.exp(2j * cmath.pi * field.trace(field.neg(dv)) / p) \
                * complex(values[x])
        out.append(acc / size)
    return np.array(out)


# ---------------------------------------------------------------------------
# flat index round trips and dot products
# ---------------------------------------------------------------------------

@given(st.integers(0, 5 ** 3 - 1))
def test_flat_coords_roundtrip(flat):
    assert coords_to_flat(5, flat_to_coords(5, 3, flat)) == flat


def test_all_coords_matches_flat_decomposition():
    field = get_field(3, 1)
    coords = all_coords(field, 2)
    for flat in range(9):
        assert tuple(coords[flat]) == flat_to_coords(3, 2, flat)


def test_dot_examples():
    field = get_field(5, 1)
    assert dot(field, (1, 0), (1, 0)) == 1
    assert dot(field, (2, 3), (4, 1)) == 1  # 8 + 3 = 11 = 1 mod 5
    for x in [(0, 0), (1, 4), (3, 3)]:
        assert dot(field, x, (0, 0)) == 0
    with pytest.raises(DimensionMismatchError):
        dot(field, (1, 2), (1, 2, 3))


def test_dot_symmetric_gf4():
    field = get_field(2, 2)
    for x in range(4):
        for y in range(4):
            assert dot(field, (x, y), (y, x)) == dot(field, (y, x), (x, y))


# ---------------------------------------------------------------------------
# forward transform
# ---------------------------------------------------------------------------

def test_forward_of_origin_indicator_is_flat():
    field = get_field(5, 1)
    fhat = fourier_forward(SpectralFn.delta(field, 2, 0))
    assert np.allclose(fhat.values, 1 / 25)


def test_forward_of_constant_is_delta_at_zero():
    # orthogonality in transform form: the constant function concentrates at 0
    field = get_field(3, 2)
    fhat = fourier_forward(SpectralFn.constant(field, 2, 1.0))
    assert abs(fhat.values[0] - 1) <= 1e-12
    assert np.max(np.abs(fhat.values[1:])) <= 1e-12


@pytest.mark.parametrize("p,n,d", [(3, 1, 2), (2, 2, 2), (5, 1, 2),
                                   (2, 3, 1), (7, 1, 1), (3, 2, 1), (2, 1, 3)])
def test_forward_matches_independent_oracle(p, n, d):
    field = get_field(p, n)
    rng = stream(99, field.q, d, 17)
    vals = rng.standard_normal(field.q ** d) + 1j * rng.standard_normal(field.q ** d)
    fast = fourier_forward(SpectralFn(field, d, vals)).values
    assert np.max(np.abs(fast - dft_oracle(field, d, vals))) <= 1e-9


@pytest.mark.parametrize("p,n,d", [(3, 1, 2), (2, 2, 2), (3, 1, 3)])
def test_forward_matches_retained_direct_evaluator(p, n, d):
    field = get_field(p, n)
    rng = stream(7, field.q, d, 18)
    vals = rng.standard_normal(field.q ** d) + 1j * rng.standard_normal(field.q ** d)
    f = SpectralFn(field, d, vals)
    assert np.max(np.abs(fourier_forward(f).values
                         - fourier_forward_direct(f).values)) <= 1e-9


# ---------------------------------------------------------------------------
# inversion
# ---------------------------------------------------------------------------

def test_inversion_recovers_singletons_exactly():
    field = get_field(7, 1)
    for v in [0, 3, 6]:
        f = SpectralFn.delta(field, 1, v)
        back = fourier_invert(fourier_forward(f)).values
        assert np.max(np.abs(back - f.values)) <= 1e-12


@pytest.mark.parametrize("p,n,d", [(7, 1, 1), (2, 2, 2)])
def test_inversion_roundtrip_random(p, n, d):
    field = get_field(p, n)
    size = field.q ** d
    for trial in range(10):
        rng = stream(5, trial, d, 19)
        vals = rng.uniform(-1, 1, size) + 1j * rng.uniform(-1, 1, size)
        f = SpectralFn(field, d, vals)
        back = fourier_invert(fourier_forward(f)).values
        assert np.max(np.abs(back - vals)) <= 1e-9


def test_invert_of_flat_spectrum_is_origin_indicator():
    field = get_field(5, 1)
    flat = SpectralFn.constant(field, 2, 1 / 25)
    back = fourier_invert(flat).values
    expect = np.zeros(25, dtype=complex)
    expect[0] = 1
    assert np.max(np.abs(back - expect)) <= 1e-12


# ---------------------------------------------------------------------------
# Plancherel
# ---------------------------------------------------------------------------

def test_plancherel_indicator_mass():
    field = get_field(5, 1)
    e = PointSet.from_flat(field, 2, [1, 2, 3, 5, 8, 13, 21, 24])
    ind = e.indicator()
    lhs, rhs = plancherel_check(ind, ind)
    assert rhs == pytest.approx(8 / 25)
    assert abs(lhs - rhs) <= 1e-9 * (1 + abs(rhs))


def test_plancherel_constants():
    field = get_field(3, 1)
    one = SpectralFn.constant(field, 2, 1.0)
    lhs, rhs = plancherel_check(one, one)
    assert lhs == pytest.approx(1)
    assert rhs == pytest.approx(1)


def test_plancherel_random_pairs():
    field = get_field(3, 1)
    for trial in range(20):
        rng = stream(11, trial, 2, 20)
        f = SpectralFn(field, 2, rng.standard_normal(9) + 1j * rng.standard_normal(9))
        g = SpectralFn(field, 2, rng.standard_normal(9) + 1j * rng.standard_normal(9))
        lhs, rhs = plancherel_check(f, g)
        assert abs(lhs - rhs) <= 1e-9 * (1 + abs(rhs))


# ---------------------------------------------------------------------------
# difference convolution
# ---------------------------------------------------------------------------

def convolve_oracle(field, d, f_vals, g_vals):
    # direct double loop over the definition sum_{y - y' = m} f(y) g(y')
    q = field.q
    size = q ** d
    out = [0j] * size
    for y in range(size):
        yc = flat_to_coords(q, d, y)
        for y2 in range(size):
            y2c = flat_to_coords(q, d, y2)
            m = coords_to_flat(q, [field.sub(a, b) for a, b in zip(yc, y2c)])
            out[m] += complex(f_vals[y]) * complex(g_vals[y2])
    return np.array(out)


def test_convolve_singleton():
    field = get_field(5, 1)
    e = PointSet.from_flat(field, 2, [7])
    g = convolve_diff(e.indicator(), e.indicator()).values
    expect = np.zeros(25, dtype=complex)
    expect[0] = 1
    assert np.max(np.abs(g - expect)) <= 1e-12


def test_convolve_diagonal_and_mass():
    field = get_field(5, 1)
    rng = stream(3, 0, 2, 21)
    e = PointSet.from_flat(field, 2, np.sort(rng.choice(25, 6, replace=False)))
    g = convolve_diff(e.indicator(), e.indicator()).values
    assert g[0].real == pytest.approx(6)      # y = y' pairs
    assert g.sum().real == pytest.approx(36)  # all ordered pairs
    assert np.max(np.abs(g.imag)) <= 1e-12


@pytest.mark.parametrize("p,n,d", [(5, 1, 2), (2, 2, 2), (3, 1, 2)])
def test_convolve_matches_double_loop_oracle(p, n, d):
    field = get_field(p, n)
    size = field.q ** d
    rng = stream(4, field.q, d, 22)
    f_vals = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    g_vals = np.zeros(size, dtype=complex)
    support = rng.choice(size, min(size, 7), replace=False)
    g_vals[support] = rng.standard_normal(len(support))
    got = convolve_diff(SpectralFn(field, d, f_vals), SpectralFn(field, d, g_vals))
    assert np.max(np.abs(got.values - convolve_oracle(field, d, f_vals, g_vals))) <= 1e-9


@pytest.mark.parametrize("p,n,d", [(3, 1, 2), (2, 2, 2), (5, 1, 2), (2, 1, 3)])
def test_autoconvolution_hat_identity(p, n, d):
    """Ghat(k) = q^d |Ehat(k)|^2 for G the difference self-convolution of an
    indicator."""
    field = get_field(p, n)
    size = field.q ** d
    rng = stream(12, field.q, d, 23)
    e = PointSet.from_flat(field, d,
                           np.sort(rng.choice(size, max(1, size // 3), replace=False)))
    ind = e.indicator()
    ghat = fourier_forward(convolve_diff(ind, ind)).values
    expect = size * np.abs(fourier_forward(ind).values) ** 2
    assert np.max(np.abs(ghat - expect)) <= 1e-8 * max(1.0, float(np.max(expect)))


# ---------------------------------------------------------------------------
# misc
# ---------------------------------------------------------------------------

def test_dump_lines_golden():
    field = get_field(2, 1)
    f = SpectralFn.delta(field, 1, 1)
    assert f.dump_lines() == ["0 0.0 0.0", "1 1.0 0.0"]


def test_spectralfn_rejects_wrong_length():
    field = get_field(3, 1)
    with pytest.raises(ValueError):
        SpectralFn(field, 2, np.zeros(8))


@given(st.lists(st.complex_numbers(max_magnitude=1, allow_nan=False,
                                   allow_infinity=False),
                min_size=9, max_size=9))
def test_roundtrip_property_f32(vals):
    field = get_field(3, 1)
    f = SpectralFn(field, 2, np.array(vals))
    back = fourier_invert(fourier_forward(f)).values
    assert np.max(np.abs(back - f.values)) <= 1e-9
