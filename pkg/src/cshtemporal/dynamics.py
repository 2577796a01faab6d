"""Right-hand sides of the temporal-gauge Chern-Simons-Higgs system.

Conventions used throughout (all spatial indices written down, Euclidean sums):

    D_j = d_j - i A_j
    d_t A_1 = -2 Im(conj(phi) D_2 phi),   d_t A_2 = 2 Im(conj(phi) D_1 phi)
    d_t^2 phi - sum_j D_j D_j phi = -phi V'(|phi|^2)

Expanding the covariant Laplacian gives the wave form used by both formulations

    box phi = -2i A.grad phi - i (div A) phi - |A|^2 phi - phi V'(|phi|^2).

The half-wave variables are phi_pm = (phi -+ i <grad>^{-1} d_t phi) / 2, so that
phi = phi_+ + phi_- and d_t phi = i <grad> (phi_+ - phi_-).

Two evolution formulations share the packed layout ``y = [phi_+, phi_-, A_1, A_2]``:

* ``reformulated``: the gauge slots hold A^cf plus the spatial mean; A^df is
  rebuilt from the charge density at every evaluation.
* ``direct``: the gauge slots hold the full potential, evolved by the
  first-order law above.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union

import numpy as np

from .spectral import (
    Grid,
    SpectralField,
    _inv_lap_deriv_symbol,
    curl,
    dealiased_product,
    divergence,
    helmholtz_split,
    inv_laplacian_deriv,
    padded_size,
    padding,
)

REFORMULATED = "reformulated"
DIRECT = "direct"
FORMULATIONS = (REFORMULATED, DIRECT)

# how 4 Delta^{-1} d_j Im(conj(phi) d_t phi) |phi|^2 is grouped
GROUP_PRODUCT = "product"
GROUP_FACTOR = "factor"
GROUPINGS = (GROUP_PRODUCT, GROUP_FACTOR)


@dataclass(frozen=True)
class Potential:
    """Higgs potential V(r) = sum_k c_k r^(k+1), so V(0) = 0 and V(r) = r is the unit mass."""

    coeffs: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if len(self.coeffs) > 3:
            raise ValueError("potentials beyond r^3 give products past quintic degree")

    @classmethod
    def mass(cls) -> "Potential":
        return cls((1.0,))

    @classmethod
    def quartic(cls) -> "Potential":
        return cls((0.0, 1.0))

    @classmethod
    def free(cls) -> "Potential":
        return cls(())

    @property
    def degree(self) -> int:
        """Polynomial degree of phi V'(|phi|^2) in (phi, conj(phi))."""
        m = max((k + 1 for k, c in enumerate(self.coeffs) if c != 0.0), default=0)
        return 2 * m - 1 if m else 0

    def __call__(self, r):
        return sum(c * r ** (k + 1) for k, c in enumerate(self.coeffs))

    def derivative(self, r):
        return sum((k + 1) * c * r**k for k, c in enumerate(self.coeffs))


@dataclass(frozen=True, eq=False)
class CshState:
    """Evolved unknowns of the reformulated system."""

    phi_plus: SpectralField
    phi_minus: SpectralField
    acf: tuple[SpectralField, SpectralField]
    gauge_mean: np.ndarray = field(default_factory=lambda: np.zeros(2, complex))
    time: float = 0.0

    def __post_init__(self):
        g = self.phi_plus.grid
        if any(f.grid != g for f in (self.phi_minus, *self.acf)):
            raise ValueError("state fields live on different grids")
        object.__setattr__(self, "gauge_mean", np.asarray(self.gauge_mean, complex).reshape(2))

    formulation = REFORMULATED

    @property
    def grid(self) -> Grid:
        return self.phi_plus.grid

    def packed(self) -> np.ndarray:
        y = np.stack([self.phi_plus.coeffs, self.phi_minus.coeffs,
                      self.acf[0].coeffs, self.acf[1].coeffs])
        y[2:, 0, 0] = self.gauge_mean
        return y

    @classmethod
    def from_packed(cls, grid: Grid, y: np.ndarray, time: float) -> "CshState":
        a1, a2 = y[2].copy(), y[3].copy()
        mean = np.array([a1[0, 0], a2[0, 0]])
        a1[0, 0] = a2[0, 0] = 0.0
        return cls(SpectralField(grid, y[0]), SpectralField(grid, y[1]),
                   (SpectralField(grid, a1), SpectralField(grid, a2)), mean, time)


@dataclass(frozen=True, eq=False)
class DirectState:
    """Unknowns of the direct system: half-wave pair plus the full potential A."""

    phi_plus: SpectralField
    phi_minus: SpectralField
    a: tuple[SpectralField, SpectralField]
    time: float = 0.0

    formulation = DIRECT

    @property
    def grid(self) -> Grid:
        return self.phi_plus.grid

    def packed(self) -> np.ndarray:
        return np.stack([self.phi_plus.coeffs, self.phi_minus.coeffs,
                         self.a[0].coeffs, self.a[1].coeffs])

    @classmethod
    def from_packed(cls, grid: Grid, y: np.ndarray, time: float) -> "DirectState":
        return cls(SpectralField(grid, y[0]), SpectralField(grid, y[1]),
                   (SpectralField(grid, y[2]), SpectralField(grid, y[3])), time)


State = Union[CshState, DirectState]


class Kernel:
    """Array-level evaluation of every nonlinearity on one grid.

    All products are formed on a single padded grid large enough that the
    highest-degree term is alias free, then truncated to the ``n``-mode set.
    """

    def __init__(self, grid: Grid, potential: Potential = Potential(), grouping: str = GROUP_PRODUCT):
        if grouping not in GROUPINGS:
            raise ValueError(f"unknown grouping {grouping!r}")
        self.grid, self.potential, self.grouping = grid, potential, grouping
        degree = max(3, potential.degree)
        self.pad = padding(grid.n, padded_size(grid.n, degree))
        self.ik1 = 1j * np.where(grid.keep, grid.k1, 0.0)
        self.ik2 = 1j * np.where(grid.keep, grid.k2, 0.0)
        self.br = grid.bracket
        self.inv_br = 1.0 / grid.bracket
        self.ild1 = _inv_lap_deriv_symbol(grid, 1)
        self.ild2 = _inv_lap_deriv_symbol(grid, 2)
        self.linear = np.stack([1j * self.br, -1j * self.br, np.zeros_like(self.br), np.zeros_like(self.br)])

    # -- building blocks ---------------------------------------------------

    def phi_dphi(self, pp, pm):
        return pp + pm, 1j * self.br * (pp - pm)

    def charge_density(self, phi, dphi):
        """Coefficients of Im(conj(phi) d_t phi) and its padded values."""
        v = self.pad.to_physical(np.stack([phi, dphi]))
        j = self.pad.to_coeffs(np.imag(np.conj(v[0]) * v[1]))
        return j

    def adf(self, j):
        return -2.0 * self.ild2 * j, 2.0 * self.ild1 * j

    def evaluate(self, y: np.ndarray, formulation: str):
        """Wave-equation bracket and gauge tendency of the packed state ``y``.

        Returns ``(bracket, gauge)``: ``bracket`` holds the coefficients of
        -2i A.grad phi - i (div A^cf) phi - |A|^2 phi - phi V'(|phi|^2) + phi and
        ``gauge`` the two components of d_t A carried by the gauge slots (for the
        reformulated system: d_t A^cf with the mean-mode tendency in the zero mode).
        """
        pp, pm, s1, s2 = y
        phi, dphi = self.phi_dphi(pp, pm)
        v = self.pad.to_physical(np.stack([phi, self.ik1 * phi, self.ik2 * phi, dphi,
                                           s1, s2, self.ik1 * s1 + self.ik2 * s2]))
        p, p1, p2, dp = v[0], v[1], v[2], v[3]
        b1, b2, div_a = v[4].real, v[5].real, v[6].real
        pc = np.conj(p)
        rho = (p * pc).real
        im1, im2 = np.imag(pc * p1), np.imag(pc * p2)
        if formulation == REFORMULATED:
            j = self.pad.to_coeffs(np.imag(pc * dp))
            df1, df2 = self.adf(j)
            extra = [df1, df2, j]
            if self.grouping == GROUP_FACTOR:
                extra += [self.ild1 * j, self.ild2 * j]
            w = self.pad.to_physical(np.stack(extra)).real
            b1 = b1 + w[0]
            b2 = b2 + w[1]
        elif formulation != DIRECT:
            raise ValueError(f"unknown formulation {formulation!r}")

        f = -2j * (b1 * p1 + b2 * p2) - 1j * div_a * p - (b1 * b1 + b2 * b2) * p + p
        if self.potential.degree:
            f -= p * self.potential.derivative(rho)
        # direct law d_t A_1 = -2 Im(conj(phi) D_2 phi), d_t A_2 = 2 Im(conj(phi) D_1 phi)
        t1 = -2.0 * im2 + 2.0 * b2 * rho
        t2 = 2.0 * im1 - 2.0 * b1 * rho

        if formulation == DIRECT:
            c = self.pad.to_coeffs(np.stack([f, t1, t2]))
            return c[0], c[1:]

        null = np.imag(np.conj(p2) * p1 - np.conj(p1) * p2)
        g = 2.0 * null + 4.0 * (b2 * np.real(pc * p1) - b1 * np.real(pc * p2))
        means = (np.mean(t1), np.mean(t2))
        if self.grouping == GROUP_PRODUCT:
            c = self.pad.to_coeffs(np.stack([f, g + 4.0 * w[2] * rho]))
            gauge = np.stack([self.ild1 * c[1], self.ild2 * c[1]])
        else:
            c = self.pad.to_coeffs(np.stack([f, g, 4.0 * w[3] * rho, 4.0 * w[4] * rho]))
            gauge = np.stack([self.ild1 * c[1] + c[2], self.ild2 * c[1] + c[3]])
        gauge[0, 0, 0], gauge[1, 0, 0] = means
        return c[0], gauge

    # -- packed tendencies -------------------------------------------------

    def nonlinear(self, y: np.ndarray, formulation: str) -> np.ndarray:
        """Nonlinear part of d_t y; the linear part is ``self.linear * y``."""
        f, gauge = self.evaluate(y, formulation)
        n_plus = 0.5 * self.inv_br * f
        out = np.empty_like(y)
        out[0] = -1j * n_plus
        out[1] = 1j * n_plus
        out[2:] = gauge
        return out

    def full_gauge(self, y: np.ndarray, formulation: str):
        """Full potential (A_1, A_2) carried by the packed state."""
        if formulation == DIRECT:
            return y[2], y[3]
        phi, dphi = self.phi_dphi(y[0], y[1])
        df1, df2 = self.adf(self.charge_density(phi, dphi))
        return y[2] + df1, y[3] + df2


@lru_cache(maxsize=32)
def kernel(grid: Grid, potential: Potential = Potential(), grouping: str = GROUP_PRODUCT) -> Kernel:
    return Kernel(grid, potential, grouping)


# -- field-level operations ------------------------------------------------

def _same_grid(*fs: SpectralField) -> Grid:
    g = fs[0].grid
    if any(f.grid != g for f in fs[1:]):
        raise ValueError("fields live on different grids")
    return g


def split_halfwave(phi: SpectralField, dphi: SpectralField) -> tuple[SpectralField, SpectralField]:
    g = _same_grid(phi, dphi)
    w = -1j * dphi.coeffs / g.bracket
    return SpectralField(g, 0.5 * (phi.coeffs + w)), SpectralField(g, 0.5 * (phi.coeffs - w))


def reconstruct_halfwave(phi_plus: SpectralField, phi_minus: SpectralField) -> tuple[SpectralField, SpectralField]:
    g = _same_grid(phi_plus, phi_minus)
    return (SpectralField(g, phi_plus.coeffs + phi_minus.coeffs),
            SpectralField(g, 1j * g.bracket * (phi_plus.coeffs - phi_minus.coeffs)))


def charge_density(phi: SpectralField, dphi: SpectralField) -> SpectralField:
    """Im(conj(phi) d_t phi) on the grid's mode set."""
    return dealiased_product([phi.conj(), dphi]).imag()


def compute_adf(phi: SpectralField, dphi: SpectralField) -> tuple[SpectralField, SpectralField]:
    j = charge_density(phi, dphi)
    return -2.0 * inv_laplacian_deriv(2, j), 2.0 * inv_laplacian_deriv(1, j)


def adf_tendency(state: State) -> tuple[SpectralField, SpectralField]:
    """d_t A^df from the matter field alone: (-2, 2) Delta^{-1} (d_2, d_1) sum_j d_j Im(conj(phi) D_j phi)."""
    phi, _ = phi_dphi(state)
    a = full_gauge(state)
    pc = phi.conj()
    div = state.grid.zeros()
    for j, axis in ((0, 1), (1, 2)):
        cur = dealiased_product([pc, phi.deriv(axis)]).imag() - dealiased_product([a[j], pc, phi]).real()
        div = div + cur.deriv(axis)
    return -2.0 * inv_laplacian_deriv(2, div), 2.0 * inv_laplacian_deriv(1, div)


def null_form_q12(f: SpectralField, g: SpectralField) -> SpectralField:
    """d_2 conj(f) d_1 g - d_1 conj(f) d_2 g."""
    fc = f.conj()
    return dealiased_product([fc.deriv(2), g.deriv(1)]) - dealiased_product([fc.deriv(1), g.deriv(2)])


def phi_dphi(state: State) -> tuple[SpectralField, SpectralField]:
    return reconstruct_halfwave(state.phi_plus, state.phi_minus)


def gauge_parts(state: State) -> tuple[tuple[SpectralField, SpectralField], tuple[SpectralField, SpectralField], np.ndarray]:
    """(A^df, A^cf, mean) of any state."""
    if isinstance(state, CshState):
        phi, dphi = phi_dphi(state)
        return compute_adf(phi, dphi), state.acf, state.gauge_mean
    split = helmholtz_split(*state.a)
    return split.df, split.cf, split.mean


def full_gauge(state: State) -> tuple[SpectralField, SpectralField]:
    if isinstance(state, DirectState):
        return state.a
    df, cf, mean = gauge_parts(state)
    out = []
    for j in range(2):
        c = df[j].coeffs + cf[j].coeffs
        c[0, 0] += mean[j]
        out.append(SpectralField(state.grid, c))
    return tuple(out)


def rhs_acf(state: CshState, grouping: str = GROUP_PRODUCT) -> tuple[tuple[SpectralField, SpectralField], np.ndarray]:
    """d_t A^cf and the mean-mode tendency of a reformulated state."""
    g = state.grid
    _, gauge = kernel(g, Potential.free(), grouping).evaluate(state.packed(), REFORMULATED)
    mean = gauge[:, 0, 0].copy()
    gauge[:, 0, 0] = 0.0
    return (SpectralField(g, gauge[0]), SpectralField(g, gauge[1])), mean


def rhs_halfwave(state: State, potential: Potential = Potential()) -> tuple[SpectralField, SpectralField]:
    """Right-hand sides N_pm of (i d_t +- <grad>) phi_pm = N_pm."""
    g = state.grid
    k = kernel(g, potential)
    f, _ = k.evaluate(state.packed(), state.formulation)
    n_plus = 0.5 * k.inv_br * f
    return SpectralField(g, n_plus), SpectralField(g, -n_plus)


def rhs_direct_gauge(phi: SpectralField, dphi: SpectralField, a: tuple[SpectralField, SpectralField]) -> tuple[SpectralField, SpectralField]:
    """d_t (A_1, A_2) from the first-order temporal-gauge law."""
    g = _same_grid(phi, dphi, *a)
    pp, pm = split_halfwave(phi, dphi)
    y = DirectState(pp, pm, a).packed()
    _, t = kernel(g, Potential.free()).evaluate(y, DIRECT)
    return SpectralField(g, t[0]), SpectralField(g, t[1])


def gauss_residual(state: State) -> tuple[float, float]:
    """Absolute and relative L^2 residual of d_1 A_2 - d_2 A_1 = 2 Im(conj(phi) d_t phi).

    On the torus the curl has zero mean, so the comparison is made against the
    mean-free part of the charge density; the mean itself is the conserved total
    charge and is reported by :func:`total_charge`.
    """
    phi, dphi = phi_dphi(state)
    a1, a2 = full_gauge(state)
    rhs = 2.0 * charge_density(phi, dphi).mean_free()
    res = (curl(a1, a2) - rhs).l2()
    ref = rhs.l2()
    return res, (res / ref if ref > 0 else res)


def total_charge(state: State) -> float:
    phi, dphi = phi_dphi(state)
    return float(charge_density(phi, dphi).mean.real) * state.grid.measure


def higgs_term(phi: SpectralField, potential: Potential) -> SpectralField:
    """phi V'(|phi|^2)."""
    if potential.degree > 5:
        raise ValueError("potential degree exceeds quintic products")
    g = phi.grid
    out = g.zeros()
    pc = phi.conj()
    for k, c in enumerate(potential.coeffs):
        if c == 0.0:
            continue
        if k == 0:
            term = phi
        else:
            term = dealiased_product([phi] + [pc, phi] * k)
        out = out + ((k + 1) * c) * term
    return out


def energy(state: State, potential: Potential = Potential()) -> float:
    """Integral of |d_t phi|^2 + sum_j |D_j phi|^2 + V(|phi|^2)."""
    g = state.grid
    phi, dphi = phi_dphi(state)
    a1, a2 = full_gauge(state)
    pad = padding(g.n, padded_size(g.n, 5))
    k = kernel(g, Potential.free())
    v = pad.to_physical(np.stack([phi.coeffs, dphi.coeffs, k.ik1 * phi.coeffs,
                                  k.ik2 * phi.coeffs, a1.coeffs, a2.coeffs]))
    p, dp, p1, p2 = v[0], v[1], v[2], v[3]
    b1, b2 = v[4].real, v[5].real
    dens = (np.abs(dp) ** 2 + np.abs(p1 - 1j * b1 * p) ** 2 + np.abs(p2 - 1j * b2 * p) ** 2
            + potential(np.abs(p) ** 2))
    return float(np.mean(dens) * g.measure)


def gauge_divergence_free_check(state: CshState) -> float:
    """L^2 norm of the curl of A^cf (zero for a valid reformulated state)."""
    return curl(*state.acf).l2()


__all__ = [
    "CshState", "DirectState", "Potential", "Kernel", "kernel",
    "split_halfwave", "reconstruct_halfwave", "charge_density", "compute_adf",
    "null_form_q12", "adf_tendency", "rhs_acf", "rhs_halfwave", "rhs_direct_gauge", "gauss_residual",
    "total_charge", "higgs_term", "energy", "full_gauge", "gauge_parts", "phi_dphi",
    "divergence", "REFORMULATED", "DIRECT", "GROUP_PRODUCT", "GROUP_FACTOR",
]
