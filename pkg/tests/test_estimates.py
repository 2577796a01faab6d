import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cshtemporal.estimates import (
    CONDITIONS,
    REGISTRY,
    ExponentTuple,
    ExtScalar,
    afs_check,
    angle_bound_sample,
    angle_ratio,
    claim7_tuple,
    ext_compare,
    registry_ndjson,
    verify_claim_registry,
    xsb_norm_discrete,
)
from cshtemporal.spectral import Grid

GOLDEN = Path(__file__).parent / "golden"

fractions = st.fractions(min_value=-3, max_value=3, max_denominator=12)
ticks = st.integers(-3, 3).map(Fraction)
ext = st.builds(ExtScalar, fractions, ticks)
QUARTER = Fraction(1, 4)


def test_order_examples():
    assert ext_compare(ExtScalar(0, 1), ExtScalar(0, 0)) == 1
    assert ext_compare(ExtScalar(Fraction(1, 2), -1), ExtScalar(Fraction(1, 2))) == -1
    assert ext_compare(ExtScalar(QUARTER, 2), ExtScalar(QUARTER, 1)) == 1
    assert ext_compare(ExtScalar(1, -5), ExtScalar(Fraction(99, 100), 7)) == 1
    assert ext_compare(ExtScalar(1), 1) == 0


@given(ext, ext, ext)
def test_ordered_group(a, b, c):
    assert a + b == b + a
    assert (a + b) + c == a + (b + c)
    assert a - a == 0
    assert -(-a) == a
    if a < b:
        assert a + c < b + c
    assert sum(x < y for x, y in ((a, b), (b, a))) + (a == b) == 1


@given(ext)
def test_parse_str_round_trip(a):
    assert ExtScalar.parse(str(a)) == a


def test_parse_forms():
    assert ExtScalar.parse("1/2+") == ExtScalar(Fraction(1, 2), 1)
    assert ExtScalar.parse("-1/2++") == ExtScalar(Fraction(-1, 2), 2)
    assert ExtScalar.parse("3/4--") == ExtScalar(Fraction(3, 4), -2)
    assert ExtScalar.parse("-1/2-1/2eps") == ExtScalar(Fraction(-1, 2), Fraction(-1, 2))
    assert ExtScalar.parse("0.3") == ExtScalar(Fraction(3, 10))
    with pytest.raises(ValueError):
        ExtScalar.parse("1/2+-")


def test_all_zero_tuple_fails_first_condition():
    z = ExtScalar(0)
    v = afs_check(ExponentTuple(z, z, z, z, z, z))
    assert not v.passed and 1 in v.violated
    assert len(v.margins) == 14


def test_never_short_circuits():
    t = ExponentTuple.parse(s0="-5", s1="-5", s2="-5", b0="-1", b1="-1", b2="-1")
    assert afs_check(t).violated == tuple(range(1, 15))


def test_strict_and_non_strict_boundaries():
    # condition 12 is non-strict: s1 + s2 = 0 = max(0, -b0) holds
    t = ExponentTuple.parse(s0="1", s1="0", s2="0", b0="1", b1="1", b2="1")
    assert 12 not in afs_check(t).violated
    # condition 8 is strict: s0+s1+s2 = 3/4 exactly fails
    t = ExponentTuple.parse(s0="3/4", s1="0", s2="0", b0="1", b1="1", b2="1")
    assert 8 in afs_check(t).violated
    assert 8 not in afs_check(t.replace(s0=ExtScalar.parse("3/4+"))).violated


def test_case1_threshold():
    above = {e.label: e for e in verify_claim_registry("1/4+")}["Claim1/Case1"]
    assert above.verdict.passed and above.binding == 7 and above.margin == ExtScalar(0, 1)
    at = {e.label: e for e in verify_claim_registry("1/4")}["Claim1/Case1"]
    assert at.verdict.violated == (7,) and at.margin == 0


def test_claim6_threshold():
    t = ExponentTuple.parse(s0="-1/4", b0="1/2-", s1="1", b1="0", s2="1/4", b2="1/2+")
    assert afs_check(t).violated == (10,)
    assert afs_check(t).margins[9] == 0
    above = {e.label: e for e in verify_claim_registry("1/4+")}["Claim6"]
    assert above.verdict.passed


def test_registry_at_quarter_plus_all_pass():
    entries = verify_claim_registry(ExtScalar(QUARTER, 1))
    assert [e.label for e in entries] == [c.label for c in REGISTRY]
    assert all(e.verdict.passed for e in entries)


def test_registry_expected_verdicts():
    for inst, above, at in zip(REGISTRY, verify_claim_registry("1/4+"), verify_claim_registry("1/4")):
        assert above.verdict.passed == inst.passes_above
        assert at.verdict.passed == inst.passes_at_quarter
        if inst.threshold_condition is not None:
            assert at.binding == inst.threshold_condition and at.margin <= 0


def test_registry_at_one():
    entries = verify_claim_registry(ExtScalar(1))
    assert all(e.verdict.passed for e in entries)
    assert all(m >= 0 for e in entries for m in e.verdict.margins)
    # s0 + s2 = 0 = max(0, -b1) is an s-independent equality for these two tuples
    zero = sorted(e.label for e in entries if e.margin == 0)
    assert zero == ["Adf/grad-bound", "Claim6"]


def test_registry_rejects_nonpositive_s():
    with pytest.raises(ValueError):
        verify_claim_registry(ExtScalar(0))


def test_golden_reports():
    for name, s in (("registry_quarter_plus.ndjson", "1/4+"), ("registry_quarter.ndjson", "1/4")):
        assert registry_ndjson(verify_claim_registry(s)) == (GOLDEN / name).read_text()


def test_ndjson_fields():
    rec = json.loads(registry_ndjson(verify_claim_registry("3/10")).splitlines()[0])
    assert {"label", "tuple", "verdict", "binding_condition", "margin"} <= set(rec)


def test_claim7_tick_sensitivity():
    s = ExtScalar(QUARTER, 1)
    assert afs_check(claim7_tuple(s, 1)).violated == (3,)
    assert afs_check(claim7_tuple(s, 2)).passed
    assert afs_check(claim7_tuple(s, 3)).passed


_names = ("s0", "s1", "s2", "b0", "b1", "b2")


def test_monotone_in_every_exponent():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        base = {k: ExtScalar(Fraction(int(rng.integers(-8, 9)), 4), int(rng.integers(-2, 3))) for k in _names}
        bump = {k: base[k] + ExtScalar(Fraction(int(rng.integers(0, 3)), 4), int(rng.integers(0, 2)))
                for k in _names}
        lo, hi = ExponentTuple(**base), ExponentTuple(**bump)
        for c in CONDITIONS:
            assert c.margin(hi) >= c.margin(lo)
        if afs_check(lo).passed:
            assert afs_check(hi).passed


def test_angle_ratio_collinear_is_zero():
    xi1 = np.array([[1.0, 2.0]])
    xi2 = 3.0 * xi1
    n1, n2 = np.hypot(*xi1.T), np.hypot(*xi2.T)
    r = angle_ratio(xi1, xi2, -n1, -n2, 1, 1)
    assert r[0] == 0.0


def test_angle_ratio_right_angle():
    xi1, xi2 = np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]])
    r = angle_ratio(xi1, xi2, np.array([-1.0]), np.array([-1.0]), 1, 1)
    tau3, n3 = 2.0, math.sqrt(2)
    bound = math.sqrt((2 + math.sqrt(1 + (tau3 - n3) ** 2)) / math.sqrt(2))
    assert r[0] == pytest.approx((math.pi / 2) / bound, rel=1e-14)


def test_angle_sampler_deterministic_and_finite():
    a = angle_bound_sample(20000, 5)
    b = angle_bound_sample(20000, 5)
    assert a == b
    assert math.isfinite(a.max_ratio) and a.max_ratio >= 0
    assert a.witness["signs"][0] in (1, -1)
    with pytest.raises(ValueError):
        angle_bound_sample(0, 1)


def _trajectory(grid, nt, dt, rng):
    c = rng.standard_normal((nt, grid.n, grid.n)) + 1j * rng.standard_normal((nt, grid.n, grid.n))
    return c * grid.keep


def test_xsb_zero_and_short_windows():
    g = Grid(8)
    assert xsb_norm_discrete(np.zeros((8, 8, 8)), g, 0.1, 0.5, 0.5) == 0.0
    with pytest.raises(ValueError):
        xsb_norm_discrete(np.zeros((7, 8, 8)), g, 0.1, 0.5, 0.5)
    with pytest.raises(ValueError):
        xsb_norm_discrete(np.zeros((8, 8, 8)), g, 0.1, 0.5, 0.5, phase="bogus")


@pytest.mark.parametrize("phase", ["wave", "tau0"])
def test_xsb_b0_is_rms_time_average(phase):
    from cshtemporal.spectral import SpectralField, sobolev_norm

    g = Grid(8)
    rng = np.random.default_rng(3)
    samples = _trajectory(g, 16, 0.05, rng)
    rms = math.sqrt(np.mean([sobolev_norm(SpectralField(g, c), 0.7) ** 2 for c in samples]))
    assert xsb_norm_discrete(samples, g, 0.05, 0.7, 0.0, phase) == pytest.approx(rms, rel=1e-10)


def test_xsb_on_shell_wave_ignores_b():
    g = Grid(8)
    m = (1, 2)
    k = math.sqrt(g.ksq[m])
    nt = 32
    dt = 2 * math.pi * 3 / (nt * k)  # exp(-i|k|t) lands exactly on a DFT bin
    t = np.arange(nt) * dt
    samples = np.zeros((nt, 8, 8), complex)
    samples[:, m[0], m[1]] = np.exp(-1j * k * t)
    ref = xsb_norm_discrete(samples, g, dt, 0.5, 0.0)
    for b in (0.5, 1.0, 3.0):
        assert xsb_norm_discrete(samples, g, dt, 0.5, b) == pytest.approx(ref, rel=1e-12)
    tau0 = xsb_norm_discrete(samples, g, dt, 0.5, 1.0, "tau0")
    assert tau0 == pytest.approx(ref * math.sqrt(1 + k**2), rel=1e-12)
