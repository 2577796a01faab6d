"""Lawson-type exponential RK4 stepping, initialization and trajectory diagnostics."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dynamics import (
    DIRECT,
    FORMULATIONS,
    GROUP_PRODUCT,
    REFORMULATED,
    CshState,
    DirectState,
    Potential,
    State,
    compute_adf,
    energy,
    gauge_parts,
    gauss_residual,
    kernel,
    phi_dphi,
    split_halfwave,
)
from .spectral import SpectralField, curl, helmholtz_split, sobolev_norm

log = logging.getLogger(__name__)

PROJECTION_TOL = 1e-12


class NonFiniteStateError(RuntimeError):
    """Raised when a step produces NaN/Inf; carries the last finite state."""

    def __init__(self, message: str, last_state: State, trajectory: Optional["Trajectory"] = None):
        super().__init__(message)
        self.last_state = last_state
        self.trajectory = trajectory


@dataclass(frozen=True, eq=False)
class InitialData:
    """Cauchy data phi(0), d_t phi(0) and the curl-free part plus mean of A(0)."""

    phi0: SpectralField
    phi1: SpectralField
    acf0: Optional[tuple[SpectralField, SpectralField]] = None
    mean0: tuple[complex, complex] = (0.0, 0.0)

    @property
    def grid(self):
        return self.phi0.grid


@dataclass
class StepperConfig:
    dt: float
    t_end: float
    record_every: int = 1
    formulation: str = REFORMULATED
    grouping: str = GROUP_PRODUCT
    s: float = 0.3

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_end >= 0:
            raise ValueError(f"t_end must be non-negative, got {self.t_end}")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.formulation not in FORMULATIONS:
            raise ValueError(f"unknown formulation {self.formulation!r}")


DIAGNOSTIC_COLUMNS = ("t", "phi_hs1", "dphi_hs", "gauss_abs", "gauss_rel", "energy", "acf_l2", "adf_l2")


@dataclass
class Trajectory:
    s: float
    records: list[dict] = field(default_factory=list)
    final_state: Optional[State] = None
    status: str = "running"

    def append(self, record: dict):
        if self.records and record["t"] <= self.records[-1]["t"]:
            raise ValueError("trajectory times must increase")
        self.records.append(record)

    @property
    def times(self) -> np.ndarray:
        return np.array([r["t"] for r in self.records])

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.records])


def diagnostics(state: State, potential: Potential, s: float) -> dict:
    phi, dphi = phi_dphi(state)
    g_abs, g_rel = gauss_residual(state)
    df, cf, _ = gauge_parts(state)
    return {
        "t": float(state.time),
        "phi_hs1": sobolev_norm(phi, s + 1),
        "dphi_hs": sobolev_norm(dphi, s),
        "gauss_abs": g_abs,
        "gauss_rel": g_rel,
        "energy": energy(state, potential),
        "acf_l2": math.hypot(cf[0].l2(), cf[1].l2()),
        "adf_l2": math.hypot(df[0].l2(), df[1].l2()),
    }


def _project_acf(acf, grid):
    if acf is None:
        z = grid.zeros()
        return z, z
    split = helmholtz_split(*acf)
    scale = max(acf[0].l2(), acf[1].l2(), 1e-300)
    leak = max(split.df[0].l2(), split.df[1].l2(), abs(split.mean[0]) * grid.period,
               abs(split.mean[1]) * grid.period)
    if leak > PROJECTION_TOL * scale:
        warnings.warn(
            f"acf0 is not mean-free and curl-free (relative leak {leak / scale:.3e}); projected",
            stacklevel=3,
        )
    return split.cf


def init_from_data(phi0: SpectralField, phi1: SpectralField, acf0=None, mean0=(0.0, 0.0),
                   formulation: str = REFORMULATED) -> State:
    """Build the evolved state from Cauchy data.

    The divergence-free part of A(0) is always taken from the charge density of
    (phi0, phi1), which makes the assembled potential satisfy the Gauss law.
    """
    grid = phi0.grid
    if phi1.grid != grid or (acf0 is not None and any(a.grid != grid for a in acf0)):
        raise ValueError("initial data live on different grids")
    cf = _project_acf(acf0, grid)
    pp, pm = split_halfwave(phi0, phi1)
    mean = np.asarray(mean0, complex)
    if formulation == REFORMULATED:
        return CshState(pp, pm, cf, mean, 0.0)
    if formulation == DIRECT:
        df = compute_adf(phi0, phi1)
        a = []
        for j in range(2):
            c = df[j].coeffs + cf[j].coeffs
            c[0, 0] = mean[j]
            a.append(SpectralField(grid, c))
        return DirectState(pp, pm, tuple(a), 0.0)
    raise ValueError(f"unknown formulation {formulation!r}")


def init_from_gauge(phi0: SpectralField, phi1: SpectralField, a: tuple[SpectralField, SpectralField],
                    formulation: str = REFORMULATED) -> State:
    """Initialize from a raw potential: keep its curl-free part and mean, replace its df part."""
    split = helmholtz_split(*a)
    return init_from_data(phi0, phi1, split.cf, tuple(split.mean), formulation)


def init(data: InitialData, formulation: str = REFORMULATED) -> State:
    return init_from_data(data.phi0, data.phi1, data.acf0, data.mean0, formulation)


class Stepper:
    """Integrating-factor RK4 for y' = L y + N(y) with diagonal L.

    The free propagator exp(+-i t <grad>) is applied exactly to the half-wave
    slots; the gauge slots have L = 0 and see plain RK4.
    """

    def __init__(self, grid, potential: Potential = Potential(), formulation: str = REFORMULATED,
                 grouping: str = GROUP_PRODUCT, nonlinear: bool = True):
        if formulation not in FORMULATIONS:
            raise ValueError(f"unknown formulation {formulation!r}")
        self.grid = grid
        self.formulation = formulation
        self.kernel = kernel(grid, potential, grouping)
        self.nonlinear = nonlinear
        self._cache: dict[float, tuple[np.ndarray, np.ndarray]] = {}

    def _exp(self, h: float):
        e = self._cache.get(h)
        if e is None:
            lin = self.kernel.linear
            e = (np.exp(lin * h), np.exp(lin * (h / 2)))
            if len(self._cache) > 8:
                self._cache.clear()
            self._cache[h] = e
        return e

    def rhs(self, y: np.ndarray) -> np.ndarray:
        if not self.nonlinear:
            return np.zeros_like(y)
        return self.kernel.nonlinear(y, self.formulation)

    def advance(self, y: np.ndarray, h: float) -> np.ndarray:
        e, e2 = self._exp(h)
        k1 = self.rhs(y)
        k2 = self.rhs(e2 * (y + 0.5 * h * k1))
        k3 = self.rhs(e2 * y + 0.5 * h * k2)
        k4 = self.rhs(e * y + h * e2 * k3)
        return e * y + (h / 6.0) * (e * k1 + 2.0 * e2 * (k2 + k3) + k4)

    def wrap(self, y: np.ndarray, time: float) -> State:
        cls = CshState if self.formulation == REFORMULATED else DirectState
        return cls.from_packed(self.grid, y, time)

    def step(self, state: State, dt: float) -> State:
        if state.formulation != self.formulation:
            raise ValueError(f"stepper is {self.formulation}, state is {state.formulation}")
        y = self.advance(state.packed(), dt)
        if not np.isfinite(y).all():
            raise NonFiniteStateError(f"non-finite state at t={state.time + dt:.6g}", state)
        return self.wrap(y, state.time + dt)


def step(state: State, dt: float, potential: Potential = Potential(), grouping: str = GROUP_PRODUCT) -> State:
    return Stepper(state.grid, potential, state.formulation, grouping).step(state, dt)


def step_sizes(t_end: float, dt: float) -> list[float]:
    n = max(int(math.ceil(t_end / dt - 1e-9)), 0)
    if n == 0:
        return []
    hs = [dt] * n
    hs[-1] = t_end - dt * (n - 1)
    return hs


def evolve(state: State, t_end: float, dt: float, potential: Potential = Potential(),
           grouping: str = GROUP_PRODUCT, nonlinear: bool = True) -> State:
    """Advance ``state`` to ``t_end`` without recording diagnostics."""
    stepper = Stepper(state.grid, potential, state.formulation, grouping, nonlinear)
    y, t = state.packed(), state.time
    for h in step_sizes(t_end - state.time, dt):
        y_new = stepper.advance(y, h)
        if not np.isfinite(y_new).all():
            raise NonFiniteStateError(f"non-finite state at t={t + h:.6g}", stepper.wrap(y, t))
        y, t = y_new, t + h
    return stepper.wrap(y, t)


def simulate(data, config: StepperConfig, potential: Potential = Potential()) -> Trajectory:
    """Run from ``data`` (InitialData or a ready state) to ``config.t_end``, recording diagnostics."""
    state = data if isinstance(data, (CshState, DirectState)) else init(data, config.formulation)
    if state.formulation != config.formulation:
        raise ValueError("initial state does not match the configured formulation")
    traj = Trajectory(config.s)
    traj.append(diagnostics(state, potential, config.s))
    stepper = Stepper(state.grid, potential, config.formulation, config.grouping)
    hs = step_sizes(config.t_end, config.dt)
    y, t = state.packed(), state.time
    for i, h in enumerate(hs, start=1):
        y_new = stepper.advance(y, h)
        if not np.isfinite(y_new).all():
            last = stepper.wrap(y, t)
            traj.final_state, traj.status = last, "nan"
            log.error("non-finite state at t=%.6g; aborting", t + h)
            raise NonFiniteStateError(f"non-finite state at t={t + h:.6g}", last, traj)
        y, t = y_new, t + h
        if i % config.record_every == 0 or i == len(hs):
            traj.append(diagnostics(stepper.wrap(y, t), potential, config.s))
    traj.final_state = stepper.wrap(y, t)
    traj.status = "ok"
    return traj


def state_distance(a: State, b: State, s: float = 0.0) -> float:
    """H^{s+1} x H^s distance of (phi, d_t phi) between two states."""
    pa, da = phi_dphi(a)
    pb, db = phi_dphi(b)
    return math.hypot(sobolev_norm(pa - pb, s + 1), sobolev_norm(da - db, s))


def _full_error(a: State, b: State) -> float:
    from .dynamics import full_gauge

    pa, da = phi_dphi(a)
    pb, db = phi_dphi(b)
    aa, ab = full_gauge(a), full_gauge(b)
    parts = [(pa - pb).l2(), (da - db).l2(), (aa[0] - ab[0]).l2(), (aa[1] - ab[1]).l2()]
    return math.sqrt(sum(p * p for p in parts))


@dataclass
class ConvergenceRow:
    dt: float
    error: float
    gauss_drift: float
    order: Optional[float] = None
    verdict: str = ""


EXACT_FLOOR = 1e-12


def convergence_study(data, dts: Sequence[float], potential: Potential = Potential(), t_end: float = 1.0,
                      formulation: str = REFORMULATED, grouping: str = GROUP_PRODUCT,
                      nonlinear: bool = True) -> list[ConvergenceRow]:
    """Self-convergence against a reference run at min(dts) / 4.

    The observed order between consecutive rows is log(e1/e2) / log(dt1/dt2).
    Errors at the rounding floor are reported as ``exact``.
    """
    dts = list(dts)
    if any(b >= a for a, b in zip(dts, dts[1:])):
        raise ValueError("dts must be strictly decreasing")
    state0 = data if isinstance(data, (CshState, DirectState)) else init(data, formulation)
    ref = evolve(state0, t_end, dts[-1] / 4, potential, grouping, nonlinear)
    phi_ref, _ = phi_dphi(ref)
    scale = max(phi_ref.l2(), 1e-300)
    g0 = gauss_residual(state0)[0]
    rows = []
    for dt in dts:
        end = evolve(state0, t_end, dt, potential, grouping, nonlinear)
        rows.append(ConvergenceRow(dt, _full_error(end, ref), abs(gauss_residual(end)[0] - g0)))
    for prev, row in zip(rows, rows[1:]):
        if prev.error <= EXACT_FLOOR * scale and row.error <= EXACT_FLOOR * scale:
            row.verdict = "exact"
            continue
        row.order = math.log(prev.error / row.error) / math.log(prev.dt / row.dt)
        row.verdict = f"{row.order:.3f}"
    if rows and rows[0].error <= EXACT_FLOOR * scale:
        rows[0].verdict = "exact"
    return rows
