"""Exponent bookkeeping for wave-Sobolev bilinear estimates.

Exponents are ``q + k*eps`` with ``q`` rational and ``eps`` a formal positive
infinitesimal, ordered lexicographically.  ``a+`` is ``(a, 1)``, ``a--`` is
``(a, -2)`` and so on.  Multiplicities are rational so that ``eps/2`` is
representable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Callable, Iterable, Optional, Union

import numpy as np

Number = Union[int, Fraction, str]


@total_ordering
@dataclass(frozen=True)
class ExtScalar:
    q: Fraction
    k: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "q", Fraction(self.q))
        object.__setattr__(self, "k", Fraction(self.k))

    @classmethod
    def of(cls, value) -> "ExtScalar":
        if isinstance(value, ExtScalar):
            return value
        return cls(Fraction(value))

    @classmethod
    def parse(cls, text: str) -> "ExtScalar":
        """Parse ``"1/4"``, ``"1/2+"``, ``"-1/2++"``, ``"3/4--"`` or ``"1/4+eps"``."""
        t = text.strip().replace(" ", "")
        if t.endswith("eps"):
            body = t[:-3]
            cut = max(body.rfind("+"), body.rfind("-"))
            if cut <= 0:
                raise ValueError(f"cannot parse {text!r}")
            base, mult = body[:cut], body[cut + 1:] or "1"
            sign = 1 if body[cut] == "+" else -1
            return cls(Fraction(base), sign * Fraction(mult))
        stripped = t.rstrip("+-")
        ticks = t[len(stripped):]
        if ticks and len(set(ticks)) != 1:
            raise ValueError(f"mixed ticks in {text!r}")
        k = len(ticks) if ticks.startswith("+") else -len(ticks)
        return cls(Fraction(stripped), k)

    def _coerce(self, other) -> "ExtScalar":
        return other if isinstance(other, ExtScalar) else ExtScalar(Fraction(other))

    def __add__(self, other):
        o = self._coerce(other)
        return ExtScalar(self.q + o.q, self.k + o.k)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return ExtScalar(self.q - o.q, self.k - o.k)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return ExtScalar(-self.q, -self.k)

    def __mul__(self, c):
        if isinstance(c, ExtScalar):
            raise TypeError("products of two infinitesimal-augmented values are not needed")
        c = Fraction(c)
        return ExtScalar(self.q * c, self.k * c)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, (ExtScalar, int, Fraction)):
            return NotImplemented
        o = self._coerce(other)
        return (self.q, self.k) == (o.q, o.k)

    def __lt__(self, other):
        o = self._coerce(other)
        return (self.q, self.k) < (o.q, o.k)

    def __hash__(self):
        return hash((self.q, self.k))

    def plus(self, ticks: Number = 1) -> "ExtScalar":
        return ExtScalar(self.q, self.k + Fraction(ticks))

    def minus(self, ticks: Number = 1) -> "ExtScalar":
        return ExtScalar(self.q, self.k - Fraction(ticks))

    def sign(self) -> int:
        return (self > 0) - (self < 0)

    def __str__(self):
        if self.k == 0:
            return str(self.q)
        k = self.k
        if k.denominator == 1 and abs(k) <= 3:
            return f"{self.q}{'+' * int(k) if k > 0 else '-' * int(-k)}"
        return f"{self.q}{'+' if k > 0 else '-'}{abs(k)}eps"

    def to_json(self):
        return {"q": str(self.q), "k": str(self.k)}


def ext_compare(a: ExtScalar, b: ExtScalar) -> int:
    """-1, 0 or 1 as a <, ==, > b in the lexicographic order."""
    a, b = ExtScalar.of(a), ExtScalar.of(b)
    return (a > b) - (a < b)


def _min(*xs: ExtScalar) -> ExtScalar:
    return min(ExtScalar.of(x) for x in xs)


def _max(*xs: ExtScalar) -> ExtScalar:
    return max(ExtScalar.of(x) for x in xs)


@dataclass(frozen=True)
class ExponentTuple:
    s0: ExtScalar
    s1: ExtScalar
    s2: ExtScalar
    b0: ExtScalar
    b1: ExtScalar
    b2: ExtScalar

    def __post_init__(self):
        for name in ("s0", "s1", "s2", "b0", "b1", "b2"):
            object.__setattr__(self, name, ExtScalar.of(getattr(self, name)))

    @classmethod
    def parse(cls, **kw: str) -> "ExponentTuple":
        return cls(**{k: ExtScalar.parse(v) if isinstance(v, str) else v for k, v in kw.items()})

    def replace(self, **kw) -> "ExponentTuple":
        d = {k: getattr(self, k) for k in ("s0", "s1", "s2", "b0", "b1", "b2")}
        d.update(kw)
        return ExponentTuple(**d)

    def to_json(self):
        return {k: str(getattr(self, k)) for k in ("s0", "s1", "s2", "b0", "b1", "b2")}


@dataclass(frozen=True)
class Condition:
    index: int
    text: str
    strict: bool
    lhs: Callable[[ExponentTuple], ExtScalar]
    rhs: Callable[[ExponentTuple], ExtScalar]

    def margin(self, t: ExponentTuple) -> ExtScalar:
        return ExtScalar.of(self.lhs(t)) - ExtScalar.of(self.rhs(t))

    def holds(self, t: ExponentTuple) -> bool:
        m = self.margin(t)
        return m > 0 if self.strict else m >= 0


_H = Fraction(1, 2)

# sufficient conditions of the n = 2 bilinear estimate
# ||uv||_{X^{-s0,-b0}} <~ ||u||_{X^{s1,b1}} ||v||_{X^{s2,b2}}  (all on the cone |tau| = |xi|)
CONDITIONS: tuple[Condition, ...] = (
    Condition(1, "b0+b1+b2 > 1/2", True, lambda t: t.b0 + t.b1 + t.b2, lambda t: _H),
    Condition(2, "b0+b1 > 0", True, lambda t: t.b0 + t.b1, lambda t: 0),
    Condition(3, "b0+b2 > 0", True, lambda t: t.b0 + t.b2, lambda t: 0),
    Condition(4, "b1+b2 > 0", True, lambda t: t.b1 + t.b2, lambda t: 0),
    Condition(5, "s0+s1+s2 > 3/2-(b0+b1+b2)", True,
              lambda t: t.s0 + t.s1 + t.s2, lambda t: Fraction(3, 2) - (t.b0 + t.b1 + t.b2)),
    Condition(6, "s0+s1+s2 > 1-min(b0+b1,b0+b2,b1+b2)", True,
              lambda t: t.s0 + t.s1 + t.s2, lambda t: 1 - _min(t.b0 + t.b1, t.b0 + t.b2, t.b1 + t.b2)),
    Condition(7, "s0+s1+s2 > 1/2-min(b0,b1,b2)", True,
              lambda t: t.s0 + t.s1 + t.s2, lambda t: _H - _min(t.b0, t.b1, t.b2)),
    Condition(8, "s0+s1+s2 > 3/4", True, lambda t: t.s0 + t.s1 + t.s2, lambda t: Fraction(3, 4)),
    Condition(9, "(s0+b0)+2s1+2s2 > 1", True,
              lambda t: (t.s0 + t.b0) + 2 * t.s1 + 2 * t.s2, lambda t: 1),
    Condition(10, "2s0+(s1+b1)+2s2 > 1", True,
              lambda t: 2 * t.s0 + (t.s1 + t.b1) + 2 * t.s2, lambda t: 1),
    Condition(11, "2s0+2s1+(s2+b2) > 1", True,
              lambda t: 2 * t.s0 + 2 * t.s1 + (t.s2 + t.b2), lambda t: 1),
    Condition(12, "s1+s2 >= max(0,-b0)", False, lambda t: t.s1 + t.s2, lambda t: _max(0, -t.b0)),
    Condition(13, "s0+s2 >= max(0,-b1)", False, lambda t: t.s0 + t.s2, lambda t: _max(0, -t.b1)),
    Condition(14, "s0+s1 >= max(0,-b2)", False, lambda t: t.s0 + t.s1, lambda t: _max(0, -t.b2)),
)


@dataclass(frozen=True)
class Verdict:
    passed: bool
    violated: tuple[int, ...]
    margins: tuple[ExtScalar, ...]

    def binding_condition(self, prefer: frozenset = frozenset()) -> int:
        """Tightest condition: violated ones first, then least margin.

        Ties go to strict conditions, then to those in ``prefer``, then to the lowest index.
        """
        bad = set(self.violated)
        return min(CONDITIONS, key=lambda c: (c.index not in bad, self.margins[c.index - 1],
                                              not c.strict, c.index not in prefer, c.index)).index

    @property
    def binding(self) -> int:
        return self.binding_condition()

    def __bool__(self):
        return self.passed


def afs_check(t: ExponentTuple) -> Verdict:
    """Evaluate all fourteen conditions; never short-circuits."""
    margins = tuple(c.margin(t) for c in CONDITIONS)
    violated = tuple(c.index for c in CONDITIONS if not c.holds(t))
    return Verdict(not violated, violated, margins)


@dataclass(frozen=True)
class ClaimInstance:
    label: str
    build: Callable[[ExtScalar], ExponentTuple]
    # expected verdicts at s = 1/4 + eps and at s = 1/4
    passes_above: bool = True
    passes_at_quarter: bool = True
    threshold_condition: Optional[int] = None

    def tuple_at(self, s) -> ExponentTuple:
        return self.build(ExtScalar.of(s))


P = ExtScalar.parse
_Q = Fraction(1, 4)


def claim7_tuple(s: ExtScalar, ticks: int = 2) -> ExponentTuple:
    """Dual form of the d A^cf * phi estimate; ``ticks`` is the multiplicity of s0's '-' and b0's '+'."""
    return ExponentTuple(s0=(s + _Q).minus(ticks), b0=P("-1/2").plus(ticks), s1=s + 1, s2=-s,
                         b1=P("1/2+"), b2=P("1/2-"))


REGISTRY: tuple[ClaimInstance, ...] = (
    ClaimInstance(
        "Claim1/Case1",
        lambda s: ExponentTuple(s0=_Q - s, b0=P("-1/2"), s1=s + _H, b1=P("1/2+"), b2=P("1/2+"), s2=s),
        passes_at_quarter=False, threshold_condition=7,
    ),
    ClaimInstance(
        "Claim1/Case2",
        lambda s: ExponentTuple(s0=_Q - s, b0=P("0"), s1=s + _H, b1=P("0+"), b2=P("1/2+"), s2=s),
    ),
    ClaimInstance(
        "Claim1/Case3",
        lambda s: ExponentTuple(s0=_Q - s, b0=P("0"), s1=s + _H, b1=P("1/2+"), b2=P("0+"), s2=s),
    ),
    ClaimInstance(
        "Adf/grad-bound",
        lambda s: ExponentTuple(s0=-s, b0=ExtScalar(Fraction(-1, 2), Fraction(-1, 2)), s1=s + 1, s2=s,
                                b1=P("1/2+"), b2=P("1/2+")),
    ),
    ClaimInstance(
        "Claim6",
        lambda s: ExponentTuple(s0=-s, b0=P("1/2-"), s1=s + Fraction(3, 4), b1=P("0"), s2=s, b2=P("1/2+")),
        passes_at_quarter=False, threshold_condition=10,
    ),
    ClaimInstance("Claim7", claim7_tuple),
)


def s_dependent_conditions(inst: ClaimInstance, s: ExtScalar) -> frozenset:
    """Conditions whose margin moves with s (the affine builders make one shift enough)."""
    a, b = afs_check(inst.tuple_at(s)), afs_check(inst.tuple_at(s + 1))
    return frozenset(c.index for c, x, y in zip(CONDITIONS, a.margins, b.margins) if x != y)


@dataclass(frozen=True)
class RegistryEntry:
    label: str
    tuple: ExponentTuple
    verdict: Verdict
    binding: int

    @property
    def margin(self) -> ExtScalar:
        return self.verdict.margins[self.binding - 1]

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "tuple": self.tuple.to_json(),
            "verdict": "pass" if self.verdict.passed else "fail",
            "violated": list(self.verdict.violated),
            "binding_condition": self.binding,
            "margin": str(self.margin),
        }


def verify_claim_registry(s, registry: Iterable[ClaimInstance] = REGISTRY) -> list[RegistryEntry]:
    s = ExtScalar.parse(s) if isinstance(s, str) else ExtScalar.of(s)
    if not s > 0:
        raise ValueError("s must be positive")
    out = []
    for inst in registry:
        t = inst.tuple_at(s)
        v = afs_check(t)
        out.append(RegistryEntry(inst.label, t, v, v.binding_condition(s_dependent_conditions(inst, s))))
    return out


def registry_ndjson(entries: Iterable[RegistryEntry]) -> str:
    return "".join(json.dumps(e.to_json(), sort_keys=True) + "\n" for e in entries)


# -- angle-bound sampler -----------------------------------------------------

SIGN_PAIRS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def _jb(x):
    return np.sqrt(1.0 + x * x)


def angle_between(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Angle in [0, pi] between rows of ``u`` and ``v`` (shape (..., 2))."""
    cross = u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
    dot = u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1]
    return np.abs(np.arctan2(cross, dot))


def angle_ratio(xi1, xi2, tau1, tau2, sign1: int, sign2: int) -> np.ndarray:
    """angle(+-xi1, +-xi2) divided by the square-root modulation bound."""
    xi3 = -(xi1 + xi2)
    tau3 = -(tau1 + tau2)
    n1, n2, n3 = (np.hypot(x[..., 0], x[..., 1]) for x in (xi1, xi2, xi3))
    num = _jb(tau1 + sign1 * n1) + _jb(tau2 + sign2 * n2) + _jb(np.abs(tau3) - n3)
    bound = np.sqrt(num / np.minimum(_jb(n1), _jb(n2)))
    return angle_between(sign1 * xi1, sign2 * xi2) / bound


@dataclass(frozen=True)
class AngleSample:
    max_ratio: float
    witness: dict
    n: int
    seed: int

    def to_json(self):
        return {"max_ratio": self.max_ratio, "witness": self.witness, "n": self.n, "seed": self.seed}


def _draw(rng: np.random.Generator, n: int):
    # magnitudes log-uniform over five decades, directions uniform; temporal
    # frequencies placed near a randomly chosen cone sheet with log-uniform offsets
    mags = 10.0 ** rng.uniform(-1.0, 4.0, size=(2, n))
    ang = rng.uniform(0.0, 2 * np.pi, size=(2, n))
    xi = np.stack([mags * np.cos(ang), mags * np.sin(ang)], axis=-1)
    sheet = rng.choice([-1.0, 1.0], size=(2, n))
    offset = rng.choice([-1.0, 1.0], size=(2, n)) * 10.0 ** rng.uniform(-3.0, 3.0, size=(2, n))
    tau = sheet * mags + offset
    return xi[0], xi[1], tau[0], tau[1]


def angle_bound_sample(n: int, seed: int, chunk: int = 200_000) -> AngleSample:
    """Max of angle / bound over ``n`` seeded samples and all four sign pairs."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    best, witness = -1.0, {}
    done = 0
    while done < n:
        m = min(chunk, n - done)
        xi1, xi2, tau1, tau2 = _draw(rng, m)
        for s1, s2 in SIGN_PAIRS:
            r = angle_ratio(xi1, xi2, tau1, tau2, s1, s2)
            i = int(np.argmax(r))
            if r[i] > best:
                best = float(r[i])
                witness = {"xi1": xi1[i].tolist(), "xi2": xi2[i].tolist(), "tau1": float(tau1[i]),
                           "tau2": float(tau2[i]), "signs": [s1, s2]}
        done += m
    return AngleSample(best, witness, n, seed)


# -- discrete space-time norms ---------------------------------------------

def xsb_norm_discrete(samples: np.ndarray, grid, dt: float, s: float, b: float,
                      phase: str = "wave", taper: str = "none") -> float:
    """Weighted l2 norm of a sampled trajectory window.

    ``samples`` has shape ``(nt, n, n)`` and holds spatial Fourier coefficients at
    uniformly spaced times.  The weight is <xi>^s <|tau| - |xi|>^b (``phase="wave"``)
    or <xi>^s <tau>^b (``phase="tau0"``).  With the rectangular taper and b = 0 the
    result is the root-mean-square in time of the H^s norm.
    """
    samples = np.asarray(samples)
    nt = samples.shape[0]
    if nt < 8:
        raise ValueError(f"need at least 8 time samples, got {nt}")
    if taper == "none":
        w = np.ones(nt)
    elif taper == "hann":
        w = np.hanning(nt)
        w = w / np.sqrt(np.mean(w**2))
    else:
        raise ValueError(f"unknown taper {taper!r}")
    spectrum = np.fft.fft(samples * w[:, None, None], axis=0) / nt
    tau = 2 * np.pi * np.fft.fftfreq(nt, dt)[:, None, None]
    xi = np.sqrt(grid.ksq)[None]
    if phase == "wave":
        mod = _jb(np.abs(tau) - xi)
    elif phase == "tau0":
        mod = _jb(tau) * np.ones_like(xi)
    else:
        raise ValueError(f"unknown phase {phase!r}")
    weight = grid.bracket[None] ** (2 * s) * mod ** (2 * b)
    return float(grid.period * np.sqrt(np.sum(weight * np.abs(spectrum) ** 2)))
