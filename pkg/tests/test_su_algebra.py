from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from gaugeforge.errors import DomainError
from gaugeforge.su_algebra import (
    FUND_3,
    FUND_3BAR,
    TABLE_I,
    TABLE_II,
    TABLE_III,
    GelfandPattern,
    HalfInt,
    IrrepSU3,
    SU3Weight,
    ThirdInt,
    casimir_su2,
    casimir_su3,
    conjugation_phase,
    dim_su3,
    gelfand_to_labels,
    su2_cg,
    su3_cg,
    su3_cg_state,
    su3_couplings,
    su3_isoscalar,
    su3_patterns,
    validate_betweenness,
)

halves = st.integers(0, 14)


@st.composite
def su2_state(draw):
    tj = draw(halves)
    tm = draw(st.integers(-tj, tj).filter(lambda v: (tj - v) % 2 == 0))
    return Fraction(tj, 2), Fraction(tm, 2)


def test_halfint_arithmetic():
    a, b = HalfInt.of(Fraction(3, 2)), HalfInt.of(1)
    assert (a + b).twice == 5 and (a - b).twice == 1 and (-a).twice == -3
    assert str(a) == "3/2" and str(b) == "1" and float(a) == 1.5
    with pytest.raises(DomainError):
        HalfInt.of(Fraction(1, 3))
    assert str(ThirdInt.of(Fraction(-2, 3))) == "-2/3"
    with pytest.raises(DomainError):
        ThirdInt.of(0.25)


@given(su2_state())
def test_su2_cg_matches_sympy(jm):
    j, m = jm
    for dj in (Fraction(1, 2), Fraction(-1, 2)):
        for dm in (Fraction(1, 2), Fraction(-1, 2)):
            assert su2_cg(j, m, dj, dm) == pytest.approx(oracles.sympy_cg(j, m, dj, dm), abs=1e-12)


@given(su2_state())
def test_su2_cg_unitarity(jm):
    # for fixed (j, m, dm) the two targets j +- 1/2 exhaust the coupling
    j, m = jm
    for dm in (Fraction(1, 2), Fraction(-1, 2)):
        s = sum(su2_cg(j, m, dj, dm) ** 2 for dj in (Fraction(1, 2), Fraction(-1, 2)))
        assert s == pytest.approx(1.0, abs=1e-12)


def test_su2_cg_rejects_bad_states():
    with pytest.raises(DomainError):
        su2_cg(1, 2, Fraction(1, 2), Fraction(1, 2))
    with pytest.raises(DomainError):
        su2_cg(1, 0, 1, Fraction(1, 2))


def test_table_i_signs():
    for sym, dj, dm, sign in TABLE_I:
        v = su2_cg(2, 1, dj, dm)
        assert math.copysign(1, v) == sign, sym


def test_casimirs():
    assert casimir_su2(Fraction(3, 2)) == 3.75
    assert casimir_su3(1, 1) == 3.0
    assert casimir_su3(1, 0) == pytest.approx(4 / 3)


@pytest.mark.parametrize("p,q", [(p, q) for p in range(5) for q in range(5)])
def test_patterns_count_dimension(p, q):
    pats = su3_patterns(p, q)
    assert len(pats) == dim_su3(p, q)
    assert all(validate_betweenness(x) for x in pats)
    ws = IrrepSU3(p, q).weights()
    assert len(set(ws)) == len(ws)  # multiplicity-free labels
    # hypercharge averages to zero; Tz symmetric
    assert sum(float(w.Y) for w in ws) == pytest.approx(0, abs=1e-12)
    assert sum(float(w.Tz) for w in ws) == pytest.approx(0, abs=1e-12)


def test_gelfand_labels():
    assert gelfand_to_labels([[1, 0], [1]]) == (HalfInt(1), HalfInt(1))
    p, q, T, Tz, Y = gelfand_to_labels([[1, 0, 0], [1, 0], [1]])
    assert (p, q) == (1, 0) and T == HalfInt(1) and Tz == HalfInt(1) and Y == ThirdInt(1)
    assert not validate_betweenness([[1, 0, 0], [2, 0], [1]])
    with pytest.raises(DomainError):
        gelfand_to_labels([[1, 0, 0], [2, 0], [1]])
    with pytest.raises(DomainError):
        validate_betweenness(GelfandPattern([[1, 0], [1, 0]]))


def test_fundamental_weights_are_irrep_states():
    assert set(FUND_3.entries.values()) == set(IrrepSU3(1, 0).weights())
    assert set(FUND_3BAR.entries.values()) == set(IrrepSU3(0, 1).weights())


def test_conjugation_phase_involution():
    for w in list(FUND_3.entries.values()) + list(FUND_3BAR.entries.values()):
        s, c = conjugation_phase(w)
        s2, back = conjugation_phase(c)
        assert back == w and s == s2 and s in (1, -1)


def test_su3_vacuum_coupling():
    vac = SU3Weight.of(0, 0, 0)
    for lam, f in FUND_3.entries.items():
        (pp, qq, w2, c), = su3_couplings(0, 0, vac, "3", lam)
        assert (pp, qq, w2) == (1, 0, f) and c == pytest.approx(1.0)
    assert su3_isoscalar(0, 0, 0, 0, 1, 1) == pytest.approx(1.0)


def test_su3_fundamental_product_oracle():
    # 3 x 3 = 6 + 3bar: u u is symmetric, u d splits 1/sqrt2 each way
    u, d = FUND_3[1], FUND_3[2]
    assert su3_cg_state(1, 0, u, "3", 1, 2, 0, SU3Weight.of(1, 1, Fraction(2, 3))) == pytest.approx(1.0)
    t1 = SU3Weight.of(1, 0, Fraction(2, 3))
    t0 = SU3Weight.of(0, 0, Fraction(2, 3))
    assert abs(su3_cg_state(1, 0, u, "3", 2, 2, 0, t1)) == pytest.approx(1 / math.sqrt(2))
    assert abs(su3_cg_state(1, 0, u, "3", 2, 0, 1, t0)) == pytest.approx(1 / math.sqrt(2))
    # symmetric partner has the same sign, antisymmetric the opposite
    assert su3_cg_state(1, 0, d, "3", 1, 2, 0, t1) == pytest.approx(su3_cg_state(1, 0, u, "3", 2, 2, 0, t1))
    assert su3_cg_state(1, 0, d, "3", 1, 0, 1, t0) == pytest.approx(-su3_cg_state(1, 0, u, "3", 2, 0, 1, t0))


irreps = st.tuples(st.integers(0, 3), st.integers(0, 3))


@given(irreps, st.sampled_from(["3", "3*"]), st.sampled_from([1, 2, 3]))
def test_su3_row_unitarity(pq, rep, lam):
    p, q = pq
    for w in IrrepSU3(p, q).weights():
        s = sum(c * c for *_, c in su3_couplings(p, q, w, rep, lam))
        assert s == pytest.approx(1.0, abs=1e-10)


@given(irreps, st.sampled_from(["3", "3*"]))
def test_su3_column_orthonormality(pq, rep):
    """Rows of the coupling matrix (source state, lam) -> target state are orthonormal too."""
    p, q = pq
    cols = {}
    for w in IrrepSU3(p, q).weights():
        for lam in (1, 2, 3):
            for pp, qq, w2, c in su3_couplings(p, q, w, rep, lam):
                cols.setdefault((pp, qq, w2), {})[(w, lam)] = c
    keys = sorted(cols)
    for a in keys:
        na = sum(v * v for v in cols[a].values())
        assert na == pytest.approx(1.0, abs=1e-10)
    for i, a in enumerate(keys):
        for b in keys[i + 1:]:
            dot = sum(v * cols[b].get(k, 0.0) for k, v in cols[a].items())
            assert abs(dot) < 1e-10


def test_su3_cg_branch_lookup():
    w = SU3Weight.of(Fraction(1, 2), Fraction(1, 2), Fraction(1, 3))
    direct = su3_cg_state(1, 0, w, "3", 3, 0, 1, SU3Weight.of(Fraction(1, 2), Fraction(1, 2), Fraction(-1, 3)))
    assert su3_cg(1, 0, w, "3", 3, 2, Fraction(1, 2)) == pytest.approx(direct)
    assert su3_cg(1, 0, w, "3", 1, 2, 5) == 0.0


def test_isoscalar_rejects_foreign_state():
    with pytest.raises(DomainError):
        su3_isoscalar(1, 0, 1, 0, 1, 1)
    with pytest.raises(DomainError):
        su3_isoscalar(1, 0, Fraction(1, 2), Fraction(1, 3), 4, 1)


def test_symbol_tables_complete():
    assert len(TABLE_I) == 4 and len(TABLE_III) == 9 and len(TABLE_II) == 15
    # every tabulated isoscalar sign agrees with a value that is nonzero somewhere
    for sym, b, r, sign in TABLE_III:
        vals = [su3_isoscalar(p, q, w.T, w.Y, b, r) for p in range(3) for q in range(3)
                for w in IrrepSU3(p, q).weights()]
        nz = [v for v in vals if abs(v) > 1e-12]
        assert nz and all(np.sign(v) == sign for v in nz), sym
