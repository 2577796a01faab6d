import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cshtemporal.spectral import (
    Grid,
    Padding,
    SpectralField,
    apply_multiplier,
    curl,
    dealiased_product,
    divergence,
    helmholtz_split,
    inv_laplacian_deriv,
    padded_size,
    sobolev_norm,
)

from conftest import random_field

seeds = st.integers(0, 2**32 - 1)


@pytest.mark.parametrize("n", [6, 12, 0, -8])
def test_grid_rejects_bad_sizes(n):
    with pytest.raises(ValueError):
        Grid(n)


def test_grid_rejects_bad_period():
    with pytest.raises(ValueError):
        Grid(16, 0.0)


def test_wavenumbers_and_nyquist():
    g = Grid(8, 2 * math.pi)
    assert list(g.mode_index) == [0, 1, 2, 3, -4, -3, -2, -1]
    assert g.k1[1, 5] == 1.0 and g.k2[1, 5] == -3.0
    assert g.nyquist[4].all() and g.nyquist[:, 4].all()
    assert g.keep.sum() == 49


def test_physical_round_trip(rng):
    g = Grid(16)
    f = random_field(g, rng)
    back = SpectralField.from_physical(g, f.physical())
    assert np.max(np.abs(back.coeffs - f.coeffs)) < 1e-15


def test_nyquist_is_zeroed_on_construction():
    g = Grid(8)
    c = np.ones((8, 8), complex)
    f = SpectralField(g, c)
    assert np.all(f.coeffs[4] == 0) and np.all(f.coeffs[:, 4] == 0)
    assert f.coeffs[1, 1] == 1


def test_rejects_non_finite_and_wrong_shape():
    g = Grid(8)
    c = np.zeros((8, 8), complex)
    c[1, 1] = np.nan
    with pytest.raises(ValueError):
        SpectralField(g, c)
    with pytest.raises(ValueError):
        SpectralField(g, np.zeros((8, 16)))


def test_plane_wave_derivatives_match_analytic():
    g = Grid(16, 4 * math.pi)
    x1, x2 = g.x
    f = g.plane_wave(3, -2, 0.7 - 0.2j)
    k = (3 * 0.5, -2 * 0.5)
    wave = (0.7 - 0.2j) * np.exp(1j * (k[0] * x1 + k[1] * x2))
    assert np.allclose(f.physical(), wave, atol=1e-14)
    assert np.allclose(f.deriv(1).physical(), 1j * k[0] * wave, atol=1e-14)
    assert np.allclose(f.deriv(2).physical(), 1j * k[1] * wave, atol=1e-14)


def test_conj_real_imag_match_pointwise(rng):
    g = Grid(16)
    f = random_field(g, rng)
    v = f.physical()
    assert np.allclose(f.conj().physical(), np.conj(v), atol=1e-14)
    assert np.allclose(f.real().physical(), v.real, atol=1e-14)
    assert np.allclose(f.imag().physical(), v.imag, atol=1e-14)


def test_sobolev_norm_of_plane_wave():
    g = Grid(16)
    f = g.plane_wave(2, 1, 3.0)
    xi = 2 * math.pi / g.period * math.hypot(2, 1)
    for s in (0.0, 0.3, 1.3, -0.5):
        assert sobolev_norm(f, s) == pytest.approx(g.period * 3.0 * (1 + xi**2) ** (s / 2), rel=1e-14)


def test_l2_matches_quadrature(rng):
    g = Grid(32)
    f = random_field(g, rng)
    quad = math.sqrt(np.mean(np.abs(f.physical()) ** 2) * g.measure)
    assert f.l2() == pytest.approx(quad, rel=1e-13)


@given(seeds)
def test_helmholtz_round_trip(seed):
    g = Grid(16)
    rng = np.random.default_rng(seed)
    a1, a2 = random_field(g, rng, real=True), random_field(g, rng, real=True)
    split = helmholtz_split(a1, a2)
    r1, r2 = split.reconstruct()
    scale = max(a1.l2(), a2.l2())
    assert (r1 - a1).l2() <= 1e-12 * scale and (r2 - a2).l2() <= 1e-12 * scale
    assert divergence(*split.df).l2() <= 1e-12 * scale
    assert curl(*split.cf).l2() <= 1e-12 * scale
    assert split.df[0].mean == 0 and split.cf[1].mean == 0


def test_helmholtz_projectors_are_idempotent(rng):
    g = Grid(16)
    a = (random_field(g, rng, real=True), random_field(g, rng, real=True))
    df = helmholtz_split(*a).df
    again = helmholtz_split(*df)
    assert (again.df[0] - df[0]).l2() < 1e-12 and again.cf[0].l2() < 1e-12


@given(seeds)
def test_multiplier_composition(seed):
    g = Grid(16)
    f = random_field(g, np.random.default_rng(seed))
    m1 = lambda k1, k2: (1 + k1**2 + k2**2) ** 0.35
    m2 = lambda k1, k2: np.exp(-0.1 * k1**2) * (1j * k2 + 2)
    composed = apply_multiplier(apply_multiplier(f, m1), m2)
    direct = apply_multiplier(f, lambda k1, k2: m1(k1, k2) * m2(k1, k2))
    assert (composed - direct).l2() <= 1e-12 * f.l2()
    back = apply_multiplier(apply_multiplier(f, g.bracket), 1.0 / g.bracket)
    assert (back - f).l2() <= 1e-12 * f.l2()


def test_singular_multiplier_names_the_mode():
    g = Grid(8)
    f = g.plane_wave(1, 1)
    with pytest.raises(ValueError, match=r"mode \(0, 0\)"):
        apply_multiplier(f, lambda k1, k2: 1.0 / (k1**2 + k2**2))
    ok = apply_multiplier(f, lambda k1, k2: 1.0 / (k1**2 + k2**2), zero_mode=0.0)
    assert np.isfinite(ok.coeffs).all()


def test_inverse_laplacian_derivative(rng):
    g = Grid(16)
    f = random_field(g, rng)
    for axis in (1, 2):
        u = inv_laplacian_deriv(axis, f)
        lap = u.deriv(1).deriv(1) + u.deriv(2).deriv(2)
        assert (lap - f.deriv(axis)).l2() <= 1e-12 * f.deriv(axis).l2()
        assert u.mean == 0


def test_padded_size():
    assert padded_size(16, 2) == 32
    assert padded_size(16, 3) == 32
    assert padded_size(16, 4) == 48
    assert padded_size(16, 5) == 48


def test_padding_round_trip_on_stack(rng):
    g = Grid(16)
    fs = np.stack([random_field(g, rng).coeffs for _ in range(3)])
    pad = Padding(16, 48)
    assert np.max(np.abs(pad.to_coeffs(pad.to_physical(fs)) - fs)) < 1e-14
    with pytest.raises(ValueError):
        Padding(16, 8)


def _sparse_convolve(fs, grid):
    n, h = grid.n, grid.n // 2
    idx = grid.mode_index
    cur = {(int(idx[i]), int(idx[j])): fs[0].coeffs[i, j]
           for i in range(n) for j in range(n) if fs[0].coeffs[i, j] != 0}
    for f in fs[1:]:
        c = f.coeffs
        other = {(int(idx[i]), int(idx[j])): c[i, j] for i in range(n) for j in range(n) if c[i, j] != 0}
        nxt = {}
        for (a1, a2), va in cur.items():
            for (b1, b2), vb in other.items():
                key = (a1 + b1, a2 + b2)
                nxt[key] = nxt.get(key, 0) + va * vb
        cur = nxt
    res = np.zeros((n, n), complex)
    for (m1, m2), v in cur.items():
        if -h < m1 < h and -h < m2 < h:
            res[m1 % n, m2 % n] += v
    return res


@pytest.mark.parametrize("factors", [2, 3])
def test_dealiased_product_matches_convolution(factors, rng):
    g = Grid(16)
    fs = [random_field(g, rng, kmax=0.9) for _ in range(factors)]
    got = dealiased_product(fs).coeffs
    want = _sparse_convolve(fs, g)
    assert np.max(np.abs(got - want)) <= 1e-12 * np.max(np.abs(want))


def test_dealiased_product_has_no_aliasing():
    g = Grid(16)
    f = g.plane_wave(5, 0)
    # mode 10 is outside the grid; an aliased product would land on mode -6
    assert np.max(np.abs(dealiased_product([f, f]).coeffs)) < 1e-14
    inside = dealiased_product([g.plane_wave(3, 1), g.plane_wave(2, -4)])
    assert inside.coeffs[5, -3 % 16] == pytest.approx(1.0, abs=1e-15)
    assert np.sum(np.abs(inside.coeffs) > 1e-14) == 1


def test_dealiased_product_factor_count():
    g = Grid(8)
    f = g.plane_wave(1, 0)
    with pytest.raises(ValueError):
        dealiased_product([f])
    with pytest.raises(ValueError):
        dealiased_product([f] * 6)
    with pytest.raises(ValueError):
        dealiased_product([f, Grid(16).plane_wave(1, 0)])
