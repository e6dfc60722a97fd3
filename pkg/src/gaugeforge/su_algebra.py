"""Closed-form SU(2)/SU(3) representation data used by the link registers.

Quantum numbers are exact: half-integers are stored as twice their value and
hypercharges as three times theirs.  Coupling coefficients are evaluated from
the tabulated closed forms (SU(2) ``j x 1/2`` Clebsch-Gordan coefficients and
SU(3) ``R x 3`` isoscalar factors) with exact rational radicands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence, Union

from .errors import DomainError

Number = Union[int, float, str, Fraction]

__all__ = [
    "HalfInt",
    "ThirdInt",
    "IrrepSU3",
    "SU3Weight",
    "GelfandPattern",
    "FundamentalWeightTable",
    "FUND_3",
    "FUND_3BAR",
    "fundamental_weights",
    "su2_cg",
    "su3_isoscalar",
    "su3_cg",
    "su3_cg_state",
    "su3_couplings",
    "dim_su3",
    "casimir_su2",
    "casimir_su3",
    "conjugation_phase",
    "validate_betweenness",
    "gelfand_to_labels",
    "su3_patterns",
    "TABLE_I",
    "TABLE_II",
    "TABLE_III",
]


def _to_fraction(x: Number) -> Fraction:
    if isinstance(x, float):
        return Fraction(x).limit_denominator(1000)
    return Fraction(x)


@dataclass(frozen=True, order=True)
class HalfInt:
    """A multiple of 1/2, stored as ``twice``."""

    twice: int

    @classmethod
    def of(cls, x: Union["HalfInt", Number]) -> "HalfInt":
        if isinstance(x, HalfInt):
            return x
        f = _to_fraction(x) * 2
        if f.denominator != 1:
            raise DomainError(f"{x!r} is not a multiple of 1/2")
        return cls(int(f))

    @property
    def value(self) -> Fraction:
        return Fraction(self.twice, 2)

    @property
    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def __add__(self, other: "HalfInt") -> "HalfInt":
        return HalfInt(self.twice + HalfInt.of(other).twice)

    def __sub__(self, other: "HalfInt") -> "HalfInt":
        return HalfInt(self.twice - HalfInt.of(other).twice)

    def __neg__(self) -> "HalfInt":
        return HalfInt(-self.twice)

    def __abs__(self) -> "HalfInt":
        return HalfInt(abs(self.twice))

    def __float__(self) -> float:
        return self.twice / 2

    def __str__(self) -> str:
        return str(self.twice // 2) if self.is_integer else f"{self.twice}/2"

    __repr__ = __str__


@dataclass(frozen=True, order=True)
class ThirdInt:
    """A multiple of 1/3, stored as ``thrice``."""

    thrice: int

    @classmethod
    def of(cls, x: Union["ThirdInt", Number]) -> "ThirdInt":
        if isinstance(x, ThirdInt):
            return x
        f = _to_fraction(x) * 3
        if f.denominator != 1:
            raise DomainError(f"{x!r} is not a multiple of 1/3")
        return cls(int(f))

    @property
    def value(self) -> Fraction:
        return Fraction(self.thrice, 3)

    def __add__(self, other: "ThirdInt") -> "ThirdInt":
        return ThirdInt(self.thrice + ThirdInt.of(other).thrice)

    def __sub__(self, other: "ThirdInt") -> "ThirdInt":
        return ThirdInt(self.thrice - ThirdInt.of(other).thrice)

    def __neg__(self) -> "ThirdInt":
        return ThirdInt(-self.thrice)

    def __float__(self) -> float:
        return self.thrice / 3

    def __str__(self) -> str:
        if self.thrice % 3 == 0:
            return str(self.thrice // 3)
        return f"{self.thrice}/3"

    __repr__ = __str__


@dataclass(frozen=True, order=True)
class SU3Weight:
    """T-spin, its projection and hypercharge of one SU(3) state."""

    T: HalfInt
    Tz: HalfInt
    Y: ThirdInt

    @classmethod
    def of(cls, T: Number, Tz: Number, Y: Number) -> "SU3Weight":
        return cls(HalfInt.of(T), HalfInt.of(Tz), ThirdInt.of(Y))

    def __post_init__(self):
        if abs(self.Tz.twice) > self.T.twice or (self.T.twice - self.Tz.twice) % 2:
            raise DomainError(f"invalid T-spin pair T={self.T}, Tz={self.Tz}")

    def conjugate(self) -> "SU3Weight":
        return SU3Weight(self.T, -self.Tz, -self.Y)

    def __str__(self) -> str:
        return f"({self.T},{self.Tz},{self.Y})"


@dataclass(frozen=True, order=True)
class IrrepSU3:
    p: int
    q: int

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise DomainError(f"invalid SU(3) irrep ({self.p},{self.q})")

    @property
    def dim(self) -> int:
        return dim_su3(self.p, self.q)

    @property
    def casimir(self) -> float:
        return casimir_su3(self.p, self.q)

    def weights(self) -> tuple[SU3Weight, ...]:
        return _irrep_weights(self.p, self.q)

    def __contains__(self, w: SU3Weight) -> bool:
        return w in _irrep_weight_set(self.p, self.q)


@dataclass(frozen=True)
class FundamentalWeightTable:
    rep: str
    entries: dict

    def __getitem__(self, lam: int) -> SU3Weight:
        return self.entries[lam]


FUND_3 = FundamentalWeightTable("3", {
    1: SU3Weight.of(Fraction(1, 2), Fraction(1, 2), Fraction(1, 3)),
    2: SU3Weight.of(Fraction(1, 2), Fraction(-1, 2), Fraction(1, 3)),
    3: SU3Weight.of(0, 0, Fraction(-2, 3)),
})
FUND_3BAR = FundamentalWeightTable("3*", {
    1: SU3Weight.of(Fraction(1, 2), Fraction(1, 2), Fraction(-1, 3)),
    2: SU3Weight.of(Fraction(1, 2), Fraction(-1, 2), Fraction(-1, 3)),
    3: SU3Weight.of(0, 0, Fraction(2, 3)),
})


def fundamental_weights(rep: str) -> FundamentalWeightTable:
    if rep == "3":
        return FUND_3
    if rep in ("3*", "3b", "3bar"):
        return FUND_3BAR
    raise DomainError(f"unknown fundamental representation {rep!r}")


# (delta p, delta q) for each coupling branch of R x 3 and R x 3*.
BRANCH_SHIFT = {"3": {1: (1, 0), 2: (-1, 1), 3: (0, -1)},
                "3*": {1: (0, 1), 2: (1, -1), 3: (-1, 0)}}


def dim_su3(p: int, q: int) -> int:
    return (1 + p) * (1 + q) * (2 + p + q) // 2


def casimir_su2(j: Union[HalfInt, Number]) -> float:
    jj = HalfInt.of(j).value
    return float(jj * (jj + 1))


def casimir_su3(p: int, q: int) -> float:
    return float(Fraction(p * p + q * q + p * q + 3 * (p + q), 3))


def _sqrt_signed(sign: int, radicand: Fraction) -> float:
    if radicand < 0:
        raise DomainError(f"negative radicand {radicand}")
    return sign * math.sqrt(radicand)


# --------------------------------------------------------------------------
# SU(2): <j+dj, m+dm | j, m; 1/2, dm>

def su2_cg(j, m, dj, dm) -> float:
    j, m, dj, dm = (HalfInt.of(v) for v in (j, m, dj, dm))
    if j.twice < 0 or abs(m.twice) > j.twice or (j.twice - m.twice) % 2:
        raise DomainError(f"invalid SU(2) state j={j}, m={m}")
    if abs(dj.twice) != 1 or abs(dm.twice) != 1:
        raise DomainError("dj and dm must be +-1/2")
    J = j + dj
    if J.twice < 0 or abs((m + dm).twice) > J.twice:
        return 0.0
    jv, mv = j.value, m.value
    den = 2 * jv + 1
    if dj.twice > 0:
        num = jv + mv + 1 if dm.twice > 0 else jv - mv + 1
        return _sqrt_signed(1, num / den)
    if dm.twice > 0:
        return _sqrt_signed(-1, (jv - mv) / den)
    return _sqrt_signed(1, (jv + mv) / den)


# --------------------------------------------------------------------------
# SU(3) weights from Gelfand patterns

@dataclass(frozen=True)
class GelfandPattern:
    """Triangular array, top row first (row k has N-k entries)."""

    rows: tuple

    def __init__(self, rows: Iterable[Sequence[int]]):
        object.__setattr__(self, "rows", tuple(tuple(int(v) for v in r) for r in rows))


def _check_shape(pattern: GelfandPattern) -> None:
    rows = pattern.rows
    n = len(rows)
    if n == 0 or any(len(r) != n - k for k, r in enumerate(rows)):
        raise DomainError(f"malformed Gelfand pattern {rows}")


def validate_betweenness(pattern: GelfandPattern | Sequence[Sequence[int]]) -> bool:
    if not isinstance(pattern, GelfandPattern):
        pattern = GelfandPattern(pattern)
    _check_shape(pattern)
    rows = pattern.rows
    for upper, lower in zip(rows, rows[1:]):
        for i, v in enumerate(lower):
            if not upper[i] >= v >= upper[i + 1]:
                return False
    return True


def gelfand_to_labels(pattern: GelfandPattern | Sequence[Sequence[int]]):
    """(J, M) for an SU(2) pattern, (p, q, T, Tz, Y) for an SU(3) pattern."""
    if not isinstance(pattern, GelfandPattern):
        pattern = GelfandPattern(pattern)
    if not validate_betweenness(pattern):
        raise DomainError(f"betweenness violated in {pattern.rows}")
    rows = pattern.rows
    if len(rows) == 2:
        (m12, m22), (m11,) = rows
        return HalfInt(m12 - m22), HalfInt(2 * m11 - m12 - m22)
    if len(rows) == 3:
        (m13, m23, m33), (m12, m22), (m11,) = rows
        T = HalfInt(m12 - m22)
        Tz = HalfInt(2 * m11 - m12 - m22)
        Y = ThirdInt(3 * (m12 + m22) - 2 * (m13 + m23 + m33))
        return m13 - m23, m23 - m33, T, Tz, Y
    raise DomainError("only SU(2) and SU(3) patterns are supported")


def su3_patterns(p: int, q: int) -> list[GelfandPattern]:
    top = (p + q, q, 0)
    out = []
    for m12 in range(q, p + q + 1):
        for m22 in range(0, q + 1):
            for m11 in range(m22, m12 + 1):
                out.append(GelfandPattern((top, (m12, m22), (m11,))))
    return out


@lru_cache(maxsize=None)
def _irrep_weights(p: int, q: int) -> tuple[SU3Weight, ...]:
    ws = []
    for pat in su3_patterns(p, q):
        _, _, T, Tz, Y = gelfand_to_labels(pat)
        ws.append(SU3Weight(T, Tz, Y))
    return tuple(sorted(ws))


@lru_cache(maxsize=None)
def _irrep_weight_set(p: int, q: int) -> frozenset:
    return frozenset(_irrep_weights(p, q))


@lru_cache(maxsize=None)
def _irrep_TY(p: int, q: int) -> frozenset:
    return frozenset((w.T, w.Y) for w in _irrep_weights(p, q))


# --------------------------------------------------------------------------
# SU(3) isoscalar factors for R x 3

_ISO_SIGN = {(1, 1): 1, (1, 2): -1, (1, 3): 1,
             (2, 1): -1, (2, 2): -1, (2, 3): 1,
             (3, 1): -1, (3, 2): 1, (3, 3): 1}

_ROW_SHIFT = {1: (Fraction(1, 2), Fraction(1, 3)),
              2: (Fraction(-1, 2), Fraction(1, 3)),
              3: (Fraction(0), Fraction(-2, 3))}


def _iso_radicand(p: int, q: int, T: Fraction, Y: Fraction, branch: int, row: int) -> Fraction:
    def om(i, s):
        if i == 1:
            return 4 * p + 2 * q + s * 6 * T - 3 * Y + 9 + s * 3
        if i == 2:
            return 2 * p - 2 * q + s * 6 * T + 3 * Y - 3 + s * 3
        return 2 * p + 4 * q + s * 6 * T + 3 * Y + 3 + s * 3

    Op = {i: om(i, 1) for i in (1, 2, 3)}
    Om = {i: om(i, -1) for i in (1, 2, 3)}
    gamma = {1: (1 + p) * (2 + p + q), 2: (1 + p) * (1 + q), 3: (1 + q) * (2 + p + q)}[branch]
    upsilon = {1: 432 * (1 + T), 2: 432 * T, 3: Fraction(36)}[row]
    num = {
        (1, 1): Op[1] * (Op[2] + 6) * (Op[3] + 6),
        (1, 2): -Om[1] * (Om[2] + 6) * (Om[3] + 6),
        (1, 3): Om[1] * Op[1],
        (2, 1): (6 - Om[1]) * Om[2] * (Op[3] + 6),
        (2, 2): (Op[1] - 6) * Op[2] * (Om[3] + 6),
        (2, 3): -Om[2] * Op[2],
        (3, 1): (Om[1] - 6) * (Op[2] + 6) * Om[3],
        (3, 2): -(Op[1] - 6) * (Om[2] + 6) * Op[3],
        (3, 3): Op[3] * Om[3],
    }[(branch, row)]
    return Fraction(num) / (gamma * upsilon)


def su3_isoscalar(p: int, q: int, T, Y, branch: int, row: int) -> float:
    """Isoscalar factor I_{branch,row} for (p,q) x 3 at source (T, Y).

    ``branch`` picks the target irrep (p+1,q), (p-1,q+1), (p,q-1); ``row``
    picks the fundamental isospin/hypercharge content (T+1/2, Y+1/3),
    (T-1/2, Y+1/3), (T, Y-2/3).  Forbidden targets give 0.
    """
    if branch not in (1, 2, 3) or row not in (1, 2, 3):
        raise DomainError("branch and row must be in {1,2,3}")
    T, Y = HalfInt.of(T), ThirdInt.of(Y)
    if (T, Y) not in _irrep_TY(p, q):
        raise DomainError(f"(T={T}, Y={Y}) is not in irrep ({p},{q})")
    dp, dq = BRANCH_SHIFT["3"][branch]
    pp, qq = p + dp, q + dq
    dT, dY = _ROW_SHIFT[row]
    if pp < 0 or qq < 0:
        return 0.0
    target = (HalfInt.of(T.value + dT), ThirdInt.of(Y.value + dY)) if T.value + dT >= 0 else None
    if target is None or target not in _irrep_TY(pp, qq):
        return 0.0
    rad = _iso_radicand(p, q, T.value, Y.value, branch, row)
    return _sqrt_signed(_ISO_SIGN[(branch, row)], rad)


@lru_cache(maxsize=None)
def _cg3_explicit(p, q, w: SU3Weight, lam: int, pp, qq, w2: SU3Weight) -> float:
    """<(pp,qq) w2 | (p,q) w; 3 lam> for explicit source and target states."""
    shift = (pp - p, qq - q)
    branch = {v: k for k, v in BRANCH_SHIFT["3"].items()}.get(shift)
    if branch is None or pp < 0 or qq < 0:
        return 0.0
    f = FUND_3[lam]
    if w2.Tz != w.Tz + f.Tz or w2.Y != w.Y + f.Y or w2 not in IrrepSU3(pp, qq):
        return 0.0
    if lam == 3:
        if w2.T != w.T:
            return 0.0
        return su3_isoscalar(p, q, w.T, w.Y, branch, 3)
    dT = w2.T - w.T
    if abs(dT.twice) != 1:
        return 0.0
    row = 1 if dT.twice > 0 else 2
    iso = su3_isoscalar(p, q, w.T, w.Y, branch, row)
    if iso == 0.0:
        return 0.0
    return iso * su2_cg(w.T, w.Tz, dT, f.Tz)


def su3_cg_state(p: int, q: int, w: SU3Weight, rep: str, lam: int,
                 pp: int, qq: int, w2: SU3Weight) -> float:
    """<(pp,qq) w2 | (p,q) w; rep lam> with rep in {'3', '3*'}.

    The 3* coefficients follow from the 3 ones by crossing:
    <W w2 | R w; 3* lam> = (-1)^Q(nu) sqrt(dim W / dim R) <R w | W w2; 3 nu>
    where nu is the 3 weight conjugate to the 3* weight ``lam``.
    """
    if w not in IrrepSU3(p, q):
        raise DomainError(f"{w} is not a state of ({p},{q})")
    rep = fundamental_weights(rep).rep
    if rep == "3":
        return _cg3_explicit(p, q, w, lam, pp, qq, w2)
    if pp < 0 or qq < 0 or w2 not in IrrepSU3(pp, qq):
        return 0.0
    sign, nu = conjugation_phase(FUND_3BAR[lam])
    nu_idx = next(k for k, v in FUND_3.entries.items() if v == nu)
    c = _cg3_explicit(pp, qq, w2, nu_idx, p, q, w)
    if c == 0.0:
        return 0.0
    return sign * math.sqrt(dim_su3(pp, qq) / dim_su3(p, q)) * c


def su3_cg(p: int, q: int, w: SU3Weight, rep: str, lam: int, branch: int, target_T) -> float:
    """Coefficient onto the target selected by ``branch`` and ``target_T``.

    T^z and Y of the target are fixed additively by the fundamental weight.
    """
    rep = fundamental_weights(rep).rep
    dp, dq = BRANCH_SHIFT[rep][branch]
    f = fundamental_weights(rep)[lam]
    T2 = HalfInt.of(target_T)
    try:
        w2 = SU3Weight(T2, w.Tz + f.Tz, w.Y + f.Y)
    except DomainError:
        return 0.0
    return su3_cg_state(p, q, w, rep, lam, p + dp, q + dq, w2)


def su3_couplings(p: int, q: int, w: SU3Weight, rep: str, lam: int):
    """All nonzero (pp, qq, w2, coefficient) reached from (p,q) w by rep[lam]."""
    return list(_su3_couplings(p, q, w, fundamental_weights(rep).rep, lam))


@lru_cache(maxsize=None)
def _su3_couplings(p: int, q: int, w: SU3Weight, rep: str, lam: int) -> tuple:
    f = fundamental_weights(rep)[lam]
    out = []
    for branch in (1, 2, 3):
        dp, dq = BRANCH_SHIFT[rep][branch]
        pp, qq = p + dp, q + dq
        if pp < 0 or qq < 0:
            continue
        for dT in (-1, 0, 1):
            T2 = HalfInt(w.T.twice + dT)
            if T2.twice < 0:
                continue
            try:
                w2 = SU3Weight(T2, w.Tz + f.Tz, w.Y + f.Y)
            except DomainError:
                continue
            c = su3_cg_state(p, q, w, rep, lam, pp, qq, w2)
            if c != 0.0:
                out.append((pp, qq, w2, c))
    return tuple(out)


def conjugation_phase(nu: SU3Weight) -> tuple[int, SU3Weight]:
    """((-1)^Q, conjugate weight) with Q = Tz + Y/2 + 1/3 of the 3 weight.

    For a 3* weight the phase is taken from its 3 partner, so the map is an
    involution on both components.
    """
    three = nu if nu in FUND_3.entries.values() else nu.conjugate()
    if three not in FUND_3.entries.values():
        raise DomainError(f"{nu} is not a fundamental weight")
    Q = three.Tz.value + three.Y.value / 2 + Fraction(1, 3)
    if Q.denominator != 1:
        raise DomainError(f"non-integer conjugation exponent {Q}")
    return (-1) ** int(Q), nu.conjugate()


# --------------------------------------------------------------------------
# symbolic tables (signs and shifts) used for golden comparisons and cg-table

TABLE_I = (
    # symbol, dj, dm, sign
    ("c11", Fraction(1, 2), Fraction(1, 2), 1),
    ("c12", Fraction(1, 2), Fraction(-1, 2), 1),
    ("c21", Fraction(-1, 2), Fraction(1, 2), -1),
    ("c22", Fraction(-1, 2), Fraction(-1, 2), 1),
)

TABLE_III = tuple((f"I{b}{r}", b, r, _ISO_SIGN[(b, r)]) for b in (1, 2, 3) for r in (1, 2, 3))

# symbol, branch, lambda, delta T (None for lambda=3)
TABLE_II = (
    ("C11a", 1, 1, Fraction(1, 2)), ("C11b", 1, 1, Fraction(-1, 2)),
    ("C12a", 1, 2, Fraction(1, 2)), ("C12b", 1, 2, Fraction(-1, 2)),
    ("C13", 1, 3, None),
    ("C21a", 2, 1, Fraction(1, 2)), ("C21b", 2, 1, Fraction(-1, 2)),
    ("C22a", 2, 2, Fraction(1, 2)), ("C22b", 2, 2, Fraction(-1, 2)),
    ("C23", 2, 3, None),
    ("C31a", 3, 1, Fraction(1, 2)), ("C31b", 3, 1, Fraction(-1, 2)),
    ("C32a", 3, 2, Fraction(1, 2)), ("C32b", 3, 2, Fraction(-1, 2)),
    ("C33", 3, 3, None),
)
