"""Truncated link Hilbert spaces, their qubit encodings and link-local operators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Callable, Dict, Mapping, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError, ConfigError, DomainError, NumericError
from .lattice_topology import LatticeSpec, enumerate_links
from .pauli import PauliSum
from .su_algebra import (
    HalfInt,
    IrrepSU3,
    SU3Weight,
    ThirdInt,
    FUND_3,
    FUND_3BAR,
    casimir_su2,
    casimir_su3,
    dim_su3,
    su2_cg,
    su3_couplings,
)

__all__ = [
    "Cutoffs",
    "LinkBasisU1",
    "LinkBasisSU2",
    "LinkBasisSU3",
    "Register",
    "LinkSpace",
    "Encoding",
    "LinkOperator",
    "CoeffPolynomial",
    "link_space",
    "build_u1_ops",
    "build_su2_ops",
    "build_su2_V",
    "build_su2_V_literal",
    "build_su3_ops",
    "build_su3_V",
    "build_su3_W",
    "build_casimir",
    "build_restricted_op",
    "build_diagonal_coeff_op",
    "pauli_realize",
    "realization_matches",
    "qubit_count",
    "lmax_from_qubits",
    "SU2_INDEX",
]


@dataclass(frozen=True)
class Cutoffs:
    l_max: Optional[int] = None
    j_max: Optional[HalfInt] = None
    p_max: Optional[int] = None
    q_max: Optional[int] = None

    def for_group(self, group: str) -> tuple:
        if group == "u1":
            if self.l_max is None or self.l_max < 1:
                raise ConfigError("cutoffs.l_max must be an integer >= 1")
            return (self.l_max,)
        if group == "su2":
            if self.j_max is None or self.j_max.twice < 1:
                raise ConfigError("cutoffs.j_max must be >= 1/2")
            return (self.j_max,)
        if group == "su3":
            if self.p_max is None or self.q_max is None:
                raise ConfigError("cutoffs.p_max and cutoffs.q_max are required")
            if self.p_max < 0 or self.q_max < 0 or self.p_max + self.q_max < 1:
                raise ConfigError("cutoffs.p_max/q_max must be >= 0 and not both 0")
            return (self.p_max, self.q_max)
        raise ConfigError(f"unknown group {group!r}")


@dataclass(frozen=True, order=True)
class LinkBasisU1:
    l: int

    def __str__(self):
        return f"|{self.l}>"


@dataclass(frozen=True, order=True)
class LinkBasisSU2:
    j: HalfInt
    mL: HalfInt
    mR: HalfInt

    def __str__(self):
        return f"|{self.j},{self.mL},{self.mR}>"


@dataclass(frozen=True, order=True)
class LinkBasisSU3:
    p: int
    q: int
    wL: SU3Weight
    wR: SU3Weight

    def __str__(self):
        return f"|{self.p},{self.q};{self.wL};{self.wR}>"


@dataclass(frozen=True)
class Register:
    name: str
    values: tuple

    def index(self, v) -> int:
        return self.values.index(v)


@dataclass(frozen=True, eq=False)
class LinkSpace:
    """Physical basis of one link plus the register layout it is stored in."""

    group: str
    cutoff: tuple
    states: tuple
    registers: tuple
    reg_index: tuple  # per state: tuple of register value indices
    index: dict = field(repr=False)
    vacuum: int = 0

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def n_registers(self) -> int:
        return len(self.registers)

    def __getitem__(self, i):
        return self.states[i]

    def find(self, label) -> int:
        try:
            return self.index[label]
        except KeyError:
            raise DomainError(f"{label} is not in the truncated link space") from None

    @cached_property
    def patterns(self) -> frozenset:
        return frozenset(self.reg_index)

    def is_physical_pattern(self, regvals: Sequence[int]) -> bool:
        return tuple(regvals) in self.patterns


def _make_space(group, cutoff, states, registers, getters) -> LinkSpace:
    states = tuple(states)
    reg_index = tuple(tuple(reg.index(g(s)) for reg, g in zip(registers, getters)) for s in states)
    index = {s: i for i, s in enumerate(states)}
    return LinkSpace(group, cutoff, states, tuple(registers), reg_index, index, 0)


def _su3_irreps(p_max: int, q_max: int):
    return [(p, q) for p in range(p_max + 1) for q in range(q_max + 1)]


@lru_cache(maxsize=None)
def link_space(group: str, cutoff: tuple) -> LinkSpace:
    """``cutoff`` is (l_max,), (j_max,) or (p_max, q_max)."""
    if group == "u1":
        (lmax,) = cutoff
        states = [LinkBasisU1(l) for l in range(0, lmax + 1)] + [LinkBasisU1(-l) for l in range(1, lmax + 1)]
        states.sort(key=lambda s: (abs(s.l), s.l))
        reg = Register("l", tuple(range(-lmax, lmax + 1)))
        return _make_space(group, cutoff, states, [reg], [lambda s: s.l])
    if group == "su2":
        (jmax,) = cutoff
        jmax = HalfInt.of(jmax)
        states = []
        for tj in range(0, jmax.twice + 1):
            for a in range(-tj, tj + 1, 2):
                for b in range(-tj, tj + 1, 2):
                    states.append(LinkBasisSU2(HalfInt(tj), HalfInt(a), HalfInt(b)))
        jreg = Register("j", tuple(HalfInt(t) for t in range(0, jmax.twice + 1)))
        mvals = tuple(HalfInt(t) for t in range(-jmax.twice, jmax.twice + 1))
        regs = [jreg, Register("mL", mvals), Register("mR", mvals)]
        return _make_space(group, (jmax,), states, regs,
                           [lambda s: s.j, lambda s: s.mL, lambda s: s.mR])
    if group == "su3":
        pmax, qmax = cutoff
        states = []
        Ts, Tzs, Ys = set(), set(), set()
        for p, q in _su3_irreps(pmax, qmax):
            ws = IrrepSU3(p, q).weights()
            for w in ws:
                Ts.add(w.T)
                Tzs.add(w.Tz)
                Ys.add(w.Y)
            states.extend(LinkBasisSU3(p, q, a, b) for a in ws for b in ws)
        states.sort(key=lambda s: (s.p + s.q, s.p, s.q, s.wL, s.wR))
        Tr, Tzr, Yr = (tuple(sorted(v)) for v in (Ts, Tzs, Ys))
        regs = [Register("p", tuple(range(pmax + 1))), Register("q", tuple(range(qmax + 1))),
                Register("TL", Tr), Register("TzL", Tzr), Register("YL", Yr),
                Register("TR", Tr), Register("TzR", Tzr), Register("YR", Yr)]
        getters = [lambda s: s.p, lambda s: s.q,
                   lambda s: s.wL.T, lambda s: s.wL.Tz, lambda s: s.wL.Y,
                   lambda s: s.wR.T, lambda s: s.wR.Tz, lambda s: s.wR.Y]
        return _make_space(group, cutoff, states, regs, getters)
    raise ConfigError(f"unknown group {group!r}")


def lmax_from_qubits(D: int) -> int:
    """Largest integer cutoff storable in a D-qubit binary register."""
    return ((1 << D) - 1) // 2


# --------------------------------------------------------------------------
# encodings

@dataclass(frozen=True)
class Encoding:
    kind: str = "one_hot"
    D: Optional[int] = None  # override; sized from the cutoff when None

    def __post_init__(self):
        if self.kind not in ("one_hot", "binary"):
            raise ConfigError(f"encoding must be one_hot or binary, got {self.kind!r}")

    def required(self, reg: Register) -> int:
        n = len(reg.values)
        if self.kind == "one_hot":
            return n
        return max(1, math.ceil(math.log2(n)))

    def qubits_per_register(self, space: LinkSpace) -> int:
        need = max(self.required(r) for r in space.registers)
        if self.D is None:
            return need
        if self.D < need:
            raise ConfigError(f"encoding.D={self.D} is below the {need} qubits the cutoff needs")
        return self.D

    def register_code(self, v: int, D: int) -> int:
        if self.kind == "one_hot":
            return ((1 << D) - 1) ^ (1 << v)  # all down except the up-spin at v
        return v

    def state_code(self, space: LinkSpace, i: int, D: Optional[int] = None) -> int:
        D = self.qubits_per_register(space) if D is None else D
        code = 0
        for s, v in enumerate(space.reg_index[i]):
            code |= self.register_code(v, D) << (s * D)
        return code

    def decode(self, space: LinkSpace, code: int, D: Optional[int] = None):
        """Register value indices of a code, or None for a non-codeword."""
        D = self.qubits_per_register(space) if D is None else D
        mask = (1 << D) - 1
        vals = []
        for s, reg in enumerate(space.registers):
            c = (code >> (s * D)) & mask
            if self.kind == "one_hot":
                up = mask ^ c
                if up == 0 or up & (up - 1):
                    return None
                v = up.bit_length() - 1
            else:
                v = c
            if v >= len(reg.values):
                return None
            vals.append(v)
        return tuple(vals)


# --------------------------------------------------------------------------
# operators

@dataclass(frozen=True, eq=False)
class LinkOperator:
    space: LinkSpace
    matrix: sp.csr_matrix
    name: str = ""

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix, dtype=complex)
        m.eliminate_zeros()
        m.sort_indices()
        object.__setattr__(self, "matrix", m)
        if m.shape != (self.space.dim, self.space.dim):
            raise DomainError("operator shape does not match its link space")

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def dagger(self, name: Optional[str] = None) -> "LinkOperator":
        return LinkOperator(self.space, self.matrix.conj().T.tocsr(), name or f"{self.name}^dag")

    def __matmul__(self, other: "LinkOperator") -> "LinkOperator":
        return LinkOperator(self.space, self.matrix @ other.matrix, f"{self.name}*{other.name}")

    def scaled(self, c: complex, name: Optional[str] = None) -> "LinkOperator":
        return LinkOperator(self.space, self.matrix * c, name or self.name)

    def entries(self):
        """(row, col, value) triples in row-major order."""
        m = self.matrix
        out = []
        for r in range(m.shape[0]):
            for k in range(m.indptr[r], m.indptr[r + 1]):
                out.append((r, int(m.indices[k]), complex(m.data[k])))
        return out

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ vec

    def is_identity(self) -> bool:
        d = self.space.dim
        diff = self.matrix - sp.identity(d, format="csr")
        return diff.nnz == 0 or np.abs(diff.data).max() < 1e-15


def _op(space, rows, cols, vals, name) -> LinkOperator:
    n = space.dim
    m = sp.coo_matrix((np.asarray(vals, dtype=complex), (rows, cols)), shape=(n, n)).tocsr()
    return LinkOperator(space, m, name)


def _diag(space, values, name) -> LinkOperator:
    return LinkOperator(space, sp.diags(np.asarray(values, dtype=complex)).tocsr(), name)


def build_casimir(space: LinkSpace) -> LinkOperator:
    if space.group == "u1":
        vals = [s.l ** 2 for s in space.states]
    elif space.group == "su2":
        vals = [casimir_su2(s.j) for s in space.states]
    else:
        vals = [casimir_su3(s.p, s.q) for s in space.states]
    return _diag(space, vals, "E2")


def build_u1_ops(l_max: int) -> dict:
    if l_max < 1:
        raise DomainError("l_max must be >= 1")
    space = link_space("u1", (l_max,))
    rows, cols = [], []
    for i, s in enumerate(space.states):
        if s.l < l_max:
            rows.append(space.find(LinkBasisU1(s.l + 1)))
            cols.append(i)
    up = _op(space, rows, cols, np.ones(len(rows)), "L+")
    return {"E2": build_casimir(space), "Lplus": up, "Lminus": up.dagger("L-")}


# SU(2) index m in {1,2} <-> delta m = +1/2, -1/2
SU2_INDEX = {1: HalfInt(1), 2: HalfInt(-1)}


def _su2_norm(j: HalfInt, k: int) -> float:
    jv = j.value
    if k == 1:
        return math.sqrt((2 * jv + 1) / (2 * jv + 2))
    return 0.0 if jv == 0 else math.sqrt((2 * jv + 1) / (2 * jv))


def build_su2_V(m: int, n: int, j_max) -> LinkOperator:
    """V_mn from the addition rule: both CG factors and the sqrt((2j+1)/(2J+1)) norm."""
    space = link_space("su2", (HalfInt.of(j_max),))
    jmax = space.cutoff[0]
    dm, dn = SU2_INDEX[m], SU2_INDEX[n]
    rows, cols, vals = [], [], []
    for i, s in enumerate(space.states):
        for k, dj in ((1, HalfInt(1)), (2, HalfInt(-1))):
            J = s.j + dj
            if J.twice < 0 or J > jmax:
                continue
            c = _su2_norm(s.j, k) * su2_cg(s.j, s.mL, dj, dm) * su2_cg(s.j, s.mR, dj, dn)
            if c == 0.0:
                continue
            rows.append(space.find(LinkBasisSU2(J, s.mL + dm, s.mR + dn)))
            cols.append(i)
            vals.append(c)
    return _op(space, rows, cols, vals, f"V{m}{n}")


def build_su2_V_literal(m: int, n: int, j_max):
    """V_mn = M^L_m M^R_n [J+ c1m^L c1n^R N1 + J- c2m^L c2n^R N2] on the full register space.

    Returns (matrix over register patterns, list of patterns).  Unphysical
    patterns are included so the factor operators can be composed literally.
    """
    space = link_space("su2", (HalfInt.of(j_max),))
    jr, mr, _ = space.registers
    pats = [(a, b, c) for a in range(len(jr.values)) for b in range(len(mr.values)) for c in range(len(mr.values))]
    pidx = {p: i for i, p in enumerate(pats)}
    N = len(pats)

    def shift(reg, step):
        rows, cols = [], []
        for i, p in enumerate(pats):
            q = list(p)
            q[reg] += step
            lim = len(space.registers[reg].values)
            if 0 <= q[reg] < lim:
                rows.append(pidx[tuple(q)])
                cols.append(i)
        return sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(N, N)).tocsr()

    def diag(f):
        return sp.diags([f(p) for p in pats]).tocsr()

    def cg(side, k, mm):
        dj = HalfInt(1) if k == 1 else HalfInt(-1)

        def f(p):
            j = jr.values[p[0]]
            mv = mr.values[p[side]]
            if abs(mv.twice) > j.twice or (j.twice - mv.twice) % 2:
                return 0.0
            return su2_cg(j, mv, dj, SU2_INDEX[mm])
        return diag(f)

    Jp, Jm = shift(0, 1), shift(0, -1)
    ML = shift(1, SU2_INDEX[m].twice)
    MR = shift(2, SU2_INDEX[n].twice)
    N1 = diag(lambda p: _su2_norm(jr.values[p[0]], 1))
    N2 = diag(lambda p: _su2_norm(jr.values[p[0]], 2))
    V = ML @ MR @ (Jp @ cg(1, 1, m) @ cg(2, 1, n) @ N1 + Jm @ cg(1, 2, m) @ cg(2, 2, n) @ N2)
    return V.tocsr(), pats


def build_su2_ops(j_max) -> dict:
    j_max = HalfInt.of(j_max)
    space = link_space("su2", (j_max,))
    out = {"E2": build_casimir(space)}
    for m in (1, 2):
        for n in (1, 2):
            out[f"V{m}{n}"] = build_su2_V(m, n, j_max)
    return out


def _su3_V(rep: str, lamL: int, lamR: int, p_max: int, q_max: int) -> LinkOperator:
    space = link_space("su3", (p_max, q_max))
    rows, cols, vals = [], [], []
    for i, s in enumerate(space.states):
        left = su3_couplings(s.p, s.q, s.wL, rep, lamL)
        right = su3_couplings(s.p, s.q, s.wR, rep, lamR)
        for pp, qq, w2L, cL in left:
            if pp > p_max or qq > q_max:
                continue
            norm = math.sqrt(dim_su3(s.p, s.q) / dim_su3(pp, qq))
            for pr, qr, w2R, cR in right:
                if (pr, qr) != (pp, qq):
                    continue
                rows.append(space.find(LinkBasisSU3(pp, qq, w2L, w2R)))
                cols.append(i)
                vals.append(norm * cL * cR)
    tag = "V" if rep == "3" else "W"
    return _op(space, rows, cols, vals, f"{tag}{lamL}{lamR}")


def build_su3_V(lamL: int, lamR: int, p_max: int, q_max: int) -> LinkOperator:
    """Register form of U^3_{lamL lamR}: branch sum of the 3 addition rule."""
    return _su3_V("3", lamL, lamR, p_max, q_max)


def build_su3_W(lamL: int, lamR: int, p_max: int, q_max: int) -> LinkOperator:
    """Register form of U^{3*}_{lamL lamR}, built from the 3* coefficients."""
    return _su3_V("3*", lamL, lamR, p_max, q_max)


def build_su3_ops(p_max: int, q_max: int) -> dict:
    space = link_space("su3", (p_max, q_max))
    out = {"E2": build_casimir(space)}
    for a in (1, 2, 3):
        for b in (1, 2, 3):
            out[f"V{a}{b}"] = build_su3_V(a, b, p_max, q_max)
            out[f"W{a}{b}"] = build_su3_W(a, b, p_max, q_max)
    return out


def build_restricted_op(space: LinkSpace, target) -> LinkOperator:
    """|target><vacuum| on one link (the restricted L(l'), J(j)M^L M^R, ... operators)."""
    t = space.find(target) if not isinstance(target, (int, np.integer)) else int(target)
    return _op(space, [t], [space.vacuum], [1.0], f"R[{space.states[t]}]")


# --------------------------------------------------------------------------
# diagonal coefficient operators as polynomials

@dataclass
class CoeffPolynomial:
    names: tuple
    points: list
    values: np.ndarray
    monomials: list  # exponent tuples
    coefficients: np.ndarray
    residual: float

    def evaluate(self, point) -> float:
        return float(sum(c * np.prod([float(x) ** e for x, e in zip(point, mono)])
                         for c, mono in zip(self.coefficients, self.monomials)))

    def as_dict(self) -> dict:
        out = {}
        for mono, c in zip(self.monomials, self.coefficients):
            label = "*".join(f"{n}^{e}" if e > 1 else n for n, e in zip(self.names, mono) if e) or "1"
            out[label] = float(c)
        return out


def _graded_monomials(nvars: int, max_degree: int):
    for deg in range(max_degree + 1):
        # lexicographic within a degree, first variable highest power first
        def rec(prefix, left, k):
            if k == nvars - 1:
                yield prefix + (left,)
                return
            for e in range(left, -1, -1):
                yield from rec(prefix + (e,), left - e, k + 1)
        yield from rec((), deg, 0)


def build_diagonal_coeff_op(values: Mapping[tuple, float], names: Sequence[str] = ("J", "M"),
                            tol: float = 1e-10) -> CoeffPolynomial:
    """Fit a0 + a1 J + a2 M + a3 J^2 + ... through the given register points.

    Monomials are taken in graded order, each kept only when it raises the
    rank, until the system is square.  The solve is exact least squares.
    """
    pts = list(values.keys())
    if not pts:
        raise NumericError("no points to fit")
    X = np.array([[float(v) for v in p] for p in pts], dtype=float)
    y = np.array([float(values[p]) for p in pts], dtype=float)
    n = len(pts)
    chosen, cols = [], []
    rank = 0
    for mono in _graded_monomials(len(names), 2 * n):
        col = np.prod(X ** np.array(mono), axis=1)
        trial = np.column_stack(cols + [col])
        r = np.linalg.matrix_rank(trial, tol=1e-10)
        if r > rank:
            chosen.append(mono)
            cols.append(col)
            rank = r
        if rank == n:
            break
    A = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.max(np.abs(A @ coef - y)))
    if resid > tol:
        raise NumericError(f"diagonal coefficient fit residual {resid:.3e} exceeds {tol}")
    return CoeffPolynomial(tuple(names), pts, y, chosen, coef, resid)


# --------------------------------------------------------------------------
# Pauli realization

def _register_factor(enc: Encoding, slot: int, D: int, nbits: int, row_v: int, col_v: int) -> PauliSum:
    base = slot * D
    if enc.kind == "one_hot":
        if row_v == col_v:
            return PauliSum.proj(base + col_v, 0)
        return PauliSum.sigma_plus(base + row_v).mul_disjoint(PauliSum.sigma_minus(base + col_v))
    # bits above nbits are 0 on every codeword, so they need no factor
    out = PauliSum.identity()
    for b in range(nbits):
        out = out.mul_disjoint(PauliSum.unit(base + b, (row_v >> b) & 1, (col_v >> b) & 1))
    return out


def pauli_realize(op: LinkOperator, enc: Encoding, cap: int = 2_000_000, D: Optional[int] = None) -> PauliSum:
    """Weighted Pauli strings acting on one link's ``regs * D`` qubits.

    One-hot factors follow the single-up-spin form (a transition v -> w is
    sigma+_w sigma-_v, an unchanged register value v is its projector
    (1 + Z_v)/2).  Binary realizations expand each register matrix unit
    qubit by qubit; zero weights are pruned.
    """
    space = op.space
    D = enc.qubits_per_register(space) if D is None else D
    total = PauliSum()
    if op.is_identity():
        return PauliSum.identity()
    entries = [(space.reg_index[r], space.reg_index[c], v) for r, c, v in op.entries()]
    slots = set(range(space.n_registers))
    if all(rv == cv for rv, cv, _ in entries):
        # diagonal: expand only over the registers the values depend on
        slots = set(_diagonal_support(op))
        vals = {}
        for rv, _, v in entries:
            vals[tuple(x if s in slots else -1 for s, x in enumerate(rv))] = v
        entries = [(k, k, v) for k, v in sorted(vals.items())]
    budget = 0
    cache: Dict[tuple, PauliSum] = {}
    for rv, cv, v in entries:
        prod = PauliSum.identity(v)
        for s, (a, b) in enumerate(zip(rv, cv)):
            if s not in slots:
                continue
            key = (s, a, b)
            f = cache.get(key)
            if f is None:
                nb = enc.required(space.registers[s])
                f = cache[key] = _register_factor(enc, s, D, nb, a, b)
            prod = prod.mul_disjoint(f)
        budget += len(prod)
        if budget > cap:
            raise CapacityError(f"Pauli realization of {op.name} exceeds {cap} strings")
        total.add_inplace(prod)
    return total.pruned()


def _diagonal_support(op: LinkOperator) -> list:
    """Registers whose values determine the diagonal (backward elimination)."""
    space = op.space
    d = op.matrix.diagonal()
    keep = list(range(space.n_registers))

    def is_function_of(regs):
        seen = {}
        for i in range(space.dim):
            key = tuple(space.reg_index[i][t] for t in regs)
            if seen.setdefault(key, d[i]) != d[i]:
                return False
        return True

    for t in range(space.n_registers):
        trial = [u for u in keep if u != t]
        if is_function_of(trial):
            keep = trial
    return keep


def realization_matches(op: LinkOperator, ps: PauliSum, enc: Encoding, tol: float = 1e-12,
                        D: Optional[int] = None) -> float:
    """Max entrywise deviation between op and the Pauli sum on encoded physical states.

    Amplitude sent outside the code space counts as deviation too.
    """
    space = op.space
    D = enc.qubits_per_register(space) if D is None else D
    codes = [enc.state_code(space, i, D) for i in range(space.dim)]
    cidx = {c: i for i, c in enumerate(codes)}
    dense = op.dense()
    worst = 0.0
    for j, cj in enumerate(codes):
        col = np.zeros(space.dim, dtype=complex)
        for t, a in ps.apply_to_basis(cj).items():
            i = cidx.get(t)
            if i is not None:
                col[i] += a
            else:
                worst = max(worst, abs(a))
        worst = max(worst, float(np.max(np.abs(col - dense[:, j]))))
    return worst


# --------------------------------------------------------------------------
# qubit counting

@dataclass(frozen=True)
class QubitCount:
    qubits: int
    registers_per_link: int
    D: int
    links: int
    formula: str


def qubit_count(group: str, cutoffs: Cutoffs, enc: Encoding, spec: LatticeSpec) -> QubitCount:
    space = link_space(group, cutoffs.for_group(group))
    D = enc.qubits_per_register(space)
    regs = space.n_registers
    nl = len(enumerate_links(spec))
    formula = {1: "M*d*D", 3: "3*M*d*D", 8: "8*M*d*D"}[regs]
    return QubitCount(regs * nl * D, regs, D, nl, formula)
