import math

import numpy as np
import pytest

from cshtemporal.data import gen_lowreg_data, neutralize_charge
from cshtemporal.dynamics import DIRECT, Potential, charge_density, total_charge
from cshtemporal.experiments import (
    adf_tendency_check,
    constraint_drift,
    continuity_probe,
    equivalence,
    perturb,
    perturbation_direction,
)
from cshtemporal.integrator import init
from cshtemporal.spectral import Grid, sobolev_norm


def test_neutralize_charge_removes_total_charge(rng):
    g = Grid(16)
    d = gen_lowreg_data(g, 0.3, 1, amplitude=0.5, neutral=False)
    assert abs(charge_density(d.phi0, d.phi1).mean) > 1e-6
    fixed = neutralize_charge(d.phi0, d.phi1)
    assert abs(charge_density(d.phi0, fixed).mean) < 1e-15


def test_perturbation_direction_is_unit_and_perturb_stays_neutral():
    g = Grid(16)
    direction = perturbation_direction(g, 0.3, 5)
    assert math.hypot(sobolev_norm(direction.phi0, 1.3), sobolev_norm(direction.phi1, 0.3)) == pytest.approx(1.0)
    base = gen_lowreg_data(g, 0.3, 2, amplitude=0.1)
    moved = perturb(base, direction, 1e-2)
    assert abs(total_charge(init(moved))) < 1e-14 * moved.phi0.l2() * moved.phi1.l2()
    assert moved.acf0 is base.acf0


def test_equivalence_vanishes_for_linear_data():
    g = Grid(16)
    rep = equivalence(gen_lowreg_data(g, 0.3, 3, amplitude=1e-8), 0.25, 0.5, Potential.mass())
    assert rep.phi_l2 < 1e-15 and rep.t == 0.5
    assert rep.line().startswith("equivalence t=0.5 ")


def test_constraint_drift_rows():
    g = Grid(16)
    d = gen_lowreg_data(g, 0.3, 4, amplitude=0.01, kmax=0.6)
    rows = constraint_drift(d, [1 / 4, 1 / 8], 1.0, formulation=DIRECT)
    assert rows[0].ratio is None and rows[1].ratio == rows[0].drift / rows[1].drift
    assert all(np.isfinite(r.gauss_abs) and r.drift >= 0 for r in rows)


def test_adf_tendency_check_is_fourth_order():
    # coarse grids floor at the truncation defect of the cubic gauge term; N=64 resolves it
    g = Grid(64)
    d = gen_lowreg_data(g, 0.3, 5, amplitude=0.05, kmax=0.3)
    rows = adf_tendency_check(d, [1 / 8, 1 / 16], 0.5)
    assert rows[1].relative < 1e-4
    assert rows[1].order > 3.5
    with pytest.raises(ValueError):
        adf_tendency_check(d, [0.5], 0.5)


def test_continuity_ratio_is_stable_for_small_deltas():
    g = Grid(16)
    d = gen_lowreg_data(g, 0.3, 6, amplitude=0.1)
    direction = perturbation_direction(g, 0.3, 7)
    rows = continuity_probe(d, direction, [1e-2, 1e-3, 1e-4], 0.5, 0.125, 0.3)
    ratios = np.array([r.ratio for r in rows])
    assert np.all(ratios > 0) and ratios.max() / ratios.min() < 1.1
