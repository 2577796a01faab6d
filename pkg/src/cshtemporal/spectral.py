"""Periodic-grid Fourier machinery.

Fields live on the torus ``[0, L)^2`` sampled on an ``n x n`` grid and are stored
as Fourier-series coefficients ``c(xi)`` in FFT ordering, so that

    f(x) = sum_xi c(xi) exp(i xi . x),    xi in (2 pi / L) * {-n/2, ..., n/2 - 1}^2.

Axis 0 of every coefficient array is the ``x1`` direction, axis 1 is ``x2``.
The Nyquist row and column are kept at zero by every operation in this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Sequence, Union

import numpy as np
import scipy.fft as sfft

Symbol = Union[Callable[[np.ndarray, np.ndarray], np.ndarray], np.ndarray, complex, float]

MAX_PRODUCT_DEGREE = 5


@dataclass(frozen=True)
class Grid:
    """Square periodic grid with ``n`` points per axis and box length ``period``."""

    n: int
    period: float = 2 * math.pi * 8

    def __post_init__(self):
        if self.n < 8 or self.n % 2:
            raise ValueError(f"grid size must be even and >= 8, got {self.n}")
        if self.n & (self.n - 1):
            raise ValueError(f"grid size must be a power of two, got {self.n}")
        if not self.period > 0:
            raise ValueError(f"period must be positive, got {self.period}")

    @cached_property
    def mode_index(self) -> np.ndarray:
        """Integer mode numbers along one axis, FFT ordering."""
        return np.fft.fftfreq(self.n, 1.0 / self.n).astype(int)

    @cached_property
    def k1(self) -> np.ndarray:
        k = 2 * np.pi / self.period * self.mode_index
        return np.broadcast_to(k[:, None], (self.n, self.n))

    @cached_property
    def k2(self) -> np.ndarray:
        k = 2 * np.pi / self.period * self.mode_index
        return np.broadcast_to(k[None, :], (self.n, self.n))

    @cached_property
    def ksq(self) -> np.ndarray:
        return self.k1**2 + self.k2**2

    @cached_property
    def bracket(self) -> np.ndarray:
        """Symbol of <grad> = (1 + |xi|^2)^(1/2)."""
        return np.sqrt(1.0 + self.ksq)

    @cached_property
    def nyquist(self) -> np.ndarray:
        idx = self.mode_index == -self.n // 2
        return idx[:, None] | idx[None, :]

    @cached_property
    def keep(self) -> np.ndarray:
        return ~self.nyquist

    @property
    def measure(self) -> float:
        return self.period**2

    @cached_property
    def x(self) -> tuple[np.ndarray, np.ndarray]:
        s = np.arange(self.n) * self.period / self.n
        return np.meshgrid(s, s, indexing="ij")

    def zeros(self) -> "SpectralField":
        return SpectralField(self, np.zeros((self.n, self.n), complex))

    def plane_wave(self, m1: int, m2: int, amplitude: complex = 1.0) -> "SpectralField":
        """exp(i k.x) for the integer mode (m1, m2)."""
        c = np.zeros((self.n, self.n), complex)
        c[m1 % self.n, m2 % self.n] = amplitude
        return SpectralField(self, c)


@dataclass(frozen=True, eq=False)
class SpectralField:
    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (self.grid.n, self.grid.n):
            raise ValueError(f"coefficient shape {c.shape} does not match grid n={self.grid.n}")
        if not np.isfinite(c).all():
            raise ValueError("non-finite Fourier coefficients")
        c[self.grid.nyquist] = 0.0
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_physical(cls, grid: Grid, values: np.ndarray) -> "SpectralField":
        return cls(grid, sfft.fft2(values) / grid.n**2)

    def physical(self) -> np.ndarray:
        return sfft.ifft2(self.coeffs) * self.grid.n**2

    def conj(self) -> "SpectralField":
        """Coefficients of the complex conjugate field, c(-xi)^*."""
        return SpectralField(self.grid, np.conj(_reflect(self.coeffs)))

    def real(self) -> "SpectralField":
        return SpectralField(self.grid, 0.5 * (self.coeffs + np.conj(_reflect(self.coeffs))))

    def imag(self) -> "SpectralField":
        return SpectralField(self.grid, -0.5j * (self.coeffs - np.conj(_reflect(self.coeffs))))

    @property
    def mean(self) -> complex:
        return complex(self.coeffs[0, 0])

    def mean_free(self) -> "SpectralField":
        c = self.coeffs.copy()
        c[0, 0] = 0.0
        return SpectralField(self.grid, c)

    def deriv(self, axis: int) -> "SpectralField":
        """Spectral derivative along x1 (axis=1) or x2 (axis=2)."""
        k = _axis_wavenumber(self.grid, axis)
        return SpectralField(self.grid, 1j * k * self.coeffs)

    def l2(self) -> float:
        return sobolev_norm(self, 0.0)

    def _check(self, other: "SpectralField"):
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")

    def __add__(self, other):
        if isinstance(other, SpectralField):
            self._check(other)
            return SpectralField(self.grid, self.coeffs + other.coeffs)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, SpectralField):
            self._check(other)
            return SpectralField(self.grid, self.coeffs - other.coeffs)
        return NotImplemented

    def __neg__(self):
        return SpectralField(self.grid, -self.coeffs)

    def __mul__(self, scalar):
        if isinstance(scalar, SpectralField):
            return NotImplemented
        return SpectralField(self.grid, scalar * self.coeffs)

    __rmul__ = __mul__

    def __repr__(self):
        return f"SpectralField(n={self.grid.n}, L={self.grid.period:.6g}, l2={self.l2():.6g})"


def _reflect(c: np.ndarray) -> np.ndarray:
    """c(-xi) in FFT ordering."""
    return np.roll(np.flip(c, axis=(-2, -1)), 1, axis=(-2, -1))


def _axis_wavenumber(grid: Grid, axis: int) -> np.ndarray:
    if axis == 1:
        return grid.k1
    if axis == 2:
        return grid.k2
    raise ValueError(f"axis must be 1 or 2, got {axis}")


def apply_multiplier(f: SpectralField, m: Symbol, zero_mode=None) -> SpectralField:
    """Multiply the coefficients of ``f`` by the symbol ``m(xi)``.

    ``m`` may be a callable of ``(k1, k2)``, a precomputed array or a scalar.
    For symbols singular at the origin pass the value to use there as ``zero_mode``.
    """
    grid = f.grid
    if callable(m):
        with np.errstate(divide="ignore", invalid="ignore"):
            sym = np.asarray(m(grid.k1, grid.k2), dtype=complex)
    else:
        sym = np.asarray(m, dtype=complex)
    sym = np.array(np.broadcast_to(sym, (grid.n, grid.n)))
    if zero_mode is not None:
        sym[0, 0] = zero_mode
    bad = ~np.isfinite(sym) & grid.keep
    if bad.any():
        i, j = np.argwhere(bad)[0]
        mode = (int(grid.mode_index[i]), int(grid.mode_index[j]))
        raise ValueError(f"multiplier is not finite at mode {mode}")
    sym[grid.nyquist] = 0.0
    return SpectralField(grid, sym * f.coeffs)


@lru_cache(maxsize=None)
def _inv_lap_deriv_symbol(grid: Grid, axis: int) -> np.ndarray:
    k = _axis_wavenumber(grid, axis)
    ksq = grid.ksq.copy()
    ksq[0, 0] = 1.0
    sym = 1j * k / (-ksq)
    sym[0, 0] = 0.0
    sym[grid.nyquist] = 0.0
    sym.setflags(write=False)
    return sym


def inv_laplacian_deriv(axis: int, f: SpectralField) -> SpectralField:
    """Delta^{-1} d_axis f with the zero mode projected out."""
    return SpectralField(f.grid, _inv_lap_deriv_symbol(f.grid, axis) * f.coeffs)


@dataclass(frozen=True, eq=False)
class GaugeSplit:
    """Helmholtz split A = df + cf + mean of a two-component field."""

    df: tuple[SpectralField, SpectralField]
    cf: tuple[SpectralField, SpectralField]
    mean: np.ndarray

    def reconstruct(self) -> tuple[SpectralField, SpectralField]:
        out = []
        for j in range(2):
            c = self.df[j].coeffs + self.cf[j].coeffs
            c[0, 0] += self.mean[j]
            out.append(SpectralField(self.df[j].grid, c))
        return tuple(out)


def helmholtz_split(a1: SpectralField, a2: SpectralField) -> GaugeSplit:
    """Split (a1, a2) into divergence-free, curl-free and constant parts.

    df = (-Delta)^{-1}(d1 d2 a2 - d2^2 a1, d1 d2 a1 - d1^2 a2)
    cf =   Delta ^{-1}(d1 d2 a2 + d1^2 a1, d1 d2 a1 + d2^2 a2)
    """
    if a1.grid != a2.grid:
        raise ValueError("gauge components live on different grids")
    g = a1.grid
    ksq = g.ksq.copy()
    ksq[0, 0] = 1.0
    k1, k2 = g.k1, g.k2
    c1, c2 = a1.coeffs, a2.coeffs
    df1 = (k2 * k2 * c1 - k1 * k2 * c2) / ksq
    df2 = (k1 * k1 * c2 - k1 * k2 * c1) / ksq
    cf1 = (k1 * k1 * c1 + k1 * k2 * c2) / ksq
    cf2 = (k2 * k2 * c2 + k1 * k2 * c1) / ksq
    for c in (df1, df2, cf1, cf2):
        c[0, 0] = 0.0
    mean = np.array([c1[0, 0], c2[0, 0]], dtype=complex)
    return GaugeSplit(
        df=(SpectralField(g, df1), SpectralField(g, df2)),
        cf=(SpectralField(g, cf1), SpectralField(g, cf2)),
        mean=mean,
    )


def divergence(a1: SpectralField, a2: SpectralField) -> SpectralField:
    return a1.deriv(1) + a2.deriv(2)


def curl(a1: SpectralField, a2: SpectralField) -> SpectralField:
    """Scalar curl d1 a2 - d2 a1."""
    return a2.deriv(1) - a1.deriv(2)


def padded_size(n: int, degree: int) -> int:
    """Per-axis size of the grid on which a degree-``degree`` product is alias free."""
    return math.ceil((degree + 1) / 2) * n


class Padding:
    """Transforms between ``n``-mode coefficients and values on an ``m``-point grid."""

    def __init__(self, n: int, m: int):
        if m < n:
            raise ValueError(f"padded size {m} smaller than {n}")
        self.n, self.m = n, m
        h = n // 2
        # (source, destination) slice pairs; the Nyquist row/column (index h) is skipped
        lo, hi_src, hi_dst = slice(0, h), slice(h + 1, n), slice(m - h + 1, m)
        self._blocks = [((lo, lo), (lo, lo)), ((lo, hi_src), (lo, hi_dst)),
                        ((hi_src, lo), (hi_dst, lo)), ((hi_src, hi_src), (hi_dst, hi_dst))]

    def to_physical(self, coeffs: np.ndarray) -> np.ndarray:
        """Values on the padded grid; accepts a stack ``(..., n, n)``."""
        if self.m == self.n:
            return sfft.ifft2(coeffs) * self.m**2
        big = np.zeros(coeffs.shape[:-2] + (self.m, self.m), complex)
        for (s1, s2), (d1, d2) in self._blocks:
            big[..., d1, d2] = coeffs[..., s1, s2]
        return sfft.ifft2(big, overwrite_x=True) * self.m**2

    def to_coeffs(self, values: np.ndarray) -> np.ndarray:
        """Truncate padded-grid values back to the ``n``-mode set (Nyquist zeroed)."""
        big = sfft.fft2(values) / self.m**2
        if self.m == self.n:
            c = big
        else:
            c = np.zeros(values.shape[:-2] + (self.n, self.n), complex)
            for (s1, s2), (d1, d2) in self._blocks:
                c[..., s1, s2] = big[..., d1, d2]
        h = self.n // 2
        c[..., h, :] = 0.0
        c[..., :, h] = 0.0
        return c


@lru_cache(maxsize=None)
def padding(n: int, m: int) -> Padding:
    return Padding(n, m)


def dealiased_product(fs: Sequence[SpectralField]) -> SpectralField:
    """Pointwise product of 2..5 band-limited fields, truncated to the grid's mode set."""
    fs = list(fs)
    if len(fs) < 2:
        raise ValueError("need at least two factors")
    if len(fs) > MAX_PRODUCT_DEGREE:
        raise ValueError(
            f"{len(fs)} factors exceed the supported product degree {MAX_PRODUCT_DEGREE}"
        )
    grid = fs[0].grid
    for f in fs[1:]:
        if f.grid != grid:
            raise ValueError("factors live on different grids")
    pad = padding(grid.n, padded_size(grid.n, len(fs)))
    vals = pad.to_physical(np.stack([f.coeffs for f in fs]))
    return SpectralField(grid, pad.to_coeffs(np.prod(vals, axis=0)))


def sobolev_norm(f: SpectralField, s: float) -> float:
    """Discrete H^s norm, (L^2 * sum <xi>^{2s} |c(xi)|^2)^{1/2}."""
    w = f.grid.bracket ** (2 * s)
    return float(f.grid.period * np.sqrt(np.sum(w * np.abs(f.coeffs) ** 2)))
