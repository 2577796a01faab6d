"""Cross-run experiments: formulation equivalence, constraint drift, A^df tendency, data continuity."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dynamics import (
    DIRECT,
    GROUP_PRODUCT,
    REFORMULATED,
    Potential,
    adf_tendency,
    gauge_parts,
    gauss_residual,
    phi_dphi,
)
from .integrator import InitialData, Stepper, evolve, init, state_distance
from .spectral import SpectralField


def _order(e1: float, e2: float, h1: float, h2: float) -> Optional[float]:
    if e1 <= 0 or e2 <= 0:
        return None
    return math.log(e1 / e2) / math.log(h1 / h2)


@dataclass(frozen=True)
class EquivalenceReport:
    t: float
    phi_l2: float
    dphi_l2: float
    gauge_l2: float

    def line(self) -> str:
        return (f"equivalence t={self.t:.17g} phi_l2={self.phi_l2:.17g} "
                f"dphi_l2={self.dphi_l2:.17g} gauge_l2={self.gauge_l2:.17g}")


def equivalence(data: InitialData, dt: float, t_end: float, potential: Potential = Potential(),
                grouping: str = GROUP_PRODUCT) -> EquivalenceReport:
    """Run both formulations from the same data and compare the terminal states."""
    from .dynamics import full_gauge

    ends = [evolve(init(data, f), t_end, dt, potential, grouping) for f in (DIRECT, REFORMULATED)]
    (pa, da), (pb, db) = (phi_dphi(e) for e in ends)
    ga, gb = (full_gauge(e) for e in ends)
    return EquivalenceReport(ends[0].time, (pa - pb).l2(), (da - db).l2(),
                             math.hypot((ga[0] - gb[0]).l2(), (ga[1] - gb[1]).l2()))


@dataclass(frozen=True)
class DriftRow:
    dt: float
    gauss_abs: float
    gauss_rel: float
    drift: float
    ratio: Optional[float] = None


def constraint_drift(data: InitialData, dts: Sequence[float], t_end: float,
                     potential: Potential = Potential(), formulation: str = DIRECT,
                     grouping: str = GROUP_PRODUCT) -> list[DriftRow]:
    """Terminal Gauss residual per step size; ``ratio`` is previous drift over this drift."""
    state0 = init(data, formulation)
    g0 = gauss_residual(state0)[0]
    rows: list[DriftRow] = []
    for dt in dts:
        end = evolve(state0, t_end, dt, potential, grouping)
        g_abs, g_rel = gauss_residual(end)
        drift = abs(g_abs - g0)
        ratio = rows[-1].drift / drift if rows and drift > 0 else None
        rows.append(DriftRow(dt, g_abs, g_rel, drift, ratio))
    return rows


@dataclass(frozen=True)
class TendencyRow:
    dt: float
    error: float
    relative: float
    order: Optional[float] = None


def _fd4(samples: list[np.ndarray], h: float) -> np.ndarray:
    # samples at t0-2h, t0-h, t0+h, t0+2h
    m2, m1, p1, p2 = samples
    return (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h)


def adf_tendency_check(data: InitialData, dts: Sequence[float], t0: float,
                       potential: Potential = Potential(), grouping: str = GROUP_PRODUCT) -> list[TendencyRow]:
    """Compare a fourth-order difference quotient of A^df along the trajectory with its closed form.

    The difference stencil uses the integrator's own step, so the discrepancy
    combines stencil truncation and time-stepping error, both fourth order.
    """
    rows: list[TendencyRow] = []
    for dt in dts:
        if t0 - 2 * dt < 0:
            raise ValueError("t0 must allow a two-step stencil")
        stepper = Stepper(data.grid, potential, REFORMULATED, grouping)
        state = evolve(init(data, REFORMULATED), t0 - 2 * dt, dt, potential, grouping)
        series = []
        for _ in range(5):
            series.append(state)
            state = stepper.step(state, dt)
        adf = [np.stack([f.coeffs for f in gauge_parts(st)[0]]) for st in series]
        fd = _fd4([adf[0], adf[1], adf[3], adf[4]], dt)
        exact = np.stack([f.coeffs for f in adf_tendency(series[2])])
        g = data.grid
        err = float(np.sqrt(np.sum(np.abs(fd - exact) ** 2)) * g.period)
        scale = float(np.sqrt(np.sum(np.abs(exact) ** 2)) * g.period)
        order = _order(rows[-1].error, err, rows[-1].dt, dt) if rows else None
        rows.append(TendencyRow(dt, err, err / scale if scale > 0 else err, order))
    return rows


def perturbation_direction(grid, s: float, seed: int, amplitude: float = 1.0,
                           kmax: Optional[float] = None) -> InitialData:
    """Seeded data with H^{s+1} x H^s norm one, used as a perturbation direction."""
    from .data import gen_lowreg_data
    from .spectral import sobolev_norm

    d = gen_lowreg_data(grid, s, seed, amplitude, kmax, neutral=False)
    norm = math.hypot(sobolev_norm(d.phi0, s + 1), sobolev_norm(d.phi1, s))
    if norm == 0.0:
        raise ValueError("degenerate perturbation direction")
    return InitialData(d.phi0 * (1.0 / norm), d.phi1 * (1.0 / norm))


def perturb(data: InitialData, direction: InitialData, delta: float) -> InitialData:
    """Shift the matter data along ``direction``, keeping the total charge of ``data``."""
    from .data import neutralize_charge

    phi0 = data.phi0 + direction.phi0 * delta
    phi1 = data.phi1 + direction.phi1 * delta
    return InitialData(phi0, neutralize_charge(phi0, phi1), data.acf0, data.mean0)


@dataclass(frozen=True)
class ContinuityRow:
    delta: float
    distance: float
    ratio: float


def continuity_probe(data: InitialData, direction: InitialData, deltas: Sequence[float], t_end: float,
                     dt: float, s: float, potential: Potential = Potential(),
                     grouping: str = GROUP_PRODUCT) -> list[ContinuityRow]:
    """Terminal H^{s+1} x H^s distance between base and perturbed runs, per perturbation size."""
    base = evolve(init(data, REFORMULATED), t_end, dt, potential, grouping)
    rows = []
    for delta in deltas:
        end = evolve(init(perturb(data, direction, delta), REFORMULATED), t_end, dt, potential, grouping)
        d = state_distance(base, end, s)
        rows.append(ContinuityRow(delta, d, d / delta))
    return rows


def constant_field_data(grid, value: complex = 0.5) -> InitialData:
    """Spatially constant matter field at rest with zero gauge field."""
    c = grid.zeros().coeffs
    c[0, 0] = value
    return InitialData(SpectralField(grid, c), grid.zeros())


__all__ = [
    "EquivalenceReport", "equivalence", "DriftRow", "constraint_drift", "TendencyRow",
    "adf_tendency_check", "perturbation_direction", "perturb", "ContinuityRow", "continuity_probe",
    "constant_field_data",
]
