"""Seeded low-regularity Cauchy data."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .integrator import InitialData
from .spectral import Grid, SpectralField, helmholtz_split


def _gaussian(rng: np.random.Generator, n: int) -> np.ndarray:
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)


def neutralize_charge(phi0: SpectralField, phi1: SpectralField) -> SpectralField:
    """Return phi1 - i*lam*phi0 with lam chosen so that Im(conj(phi0) phi1) has zero mean.

    On the torus the curl of A integrates to zero, so Gauss-compatible data must
    carry zero total charge.
    """
    c0, c1 = phi0.coeffs, phi1.coeffs
    mass = np.sum(np.abs(c0) ** 2)
    if mass == 0.0:
        return phi1
    lam = np.sum(np.imag(np.conj(c0) * c1)) / mass
    return SpectralField(phi0.grid, c1 - 1j * lam * c0)


def gen_lowreg_data(grid: Grid, s: float, seed: int, amplitude: float = 1.0,
                    kmax: Optional[float] = None, neutral: bool = True) -> InitialData:
    """Random data with coefficients amplitude * <xi>^{-(s+2)} g (phi0), <xi>^{-(s+1)} g' (phi1).

    The curl-free gauge part uses weight <xi>^{-(s+7/4)} and is real valued.
    ``kmax`` optionally restricts all fields to |xi| <= kmax. Fields draw from
    independent child streams of one seed.
    """
    if not s > 0:
        raise ValueError(f"s must be positive, got {s}")
    streams = [np.random.default_rng(ss) for ss in np.random.SeedSequence(seed).spawn(4)]
    n = grid.n
    br = grid.bracket
    mask = grid.keep.copy()
    if kmax is not None:
        mask &= grid.ksq <= kmax**2
    phi0 = SpectralField(grid, np.where(mask, amplitude * br ** (-(s + 2)) * _gaussian(streams[0], n), 0))
    phi1 = SpectralField(grid, np.where(mask, amplitude * br ** (-(s + 1)) * _gaussian(streams[1], n), 0))
    a = []
    for rng in streams[2:]:
        f = SpectralField(grid, np.where(mask, amplitude * br ** (-(s + 1.75)) * _gaussian(rng, n), 0))
        a.append(f.real())
    acf0 = helmholtz_split(*a).cf
    if neutral:
        phi1 = neutralize_charge(phi0, phi1)
    return InitialData(phi0, phi1, acf0)
