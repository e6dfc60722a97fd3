"""Plaquette operators, Hamiltonian term lists and the sparse oracle matrix."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError, ConfigError, DomainError, NumericError
from .lattice_topology import LatticeSpec, LinkId, PlaquetteId, enumerate_links, enumerate_plaquettes
from .link_registers import (
    Cutoffs,
    LinkOperator,
    LinkSpace,
    build_su2_ops,
    build_su3_ops,
    build_u1_ops,
    link_space,
)
from .su_algebra import FUND_3, FUND_3BAR, conjugation_phase

__all__ = [
    "HamiltonianSpec",
    "HamiltonianTerm",
    "SparseHamiltonian",
    "GlobalBasis",
    "group_ops",
    "build_Z_u1",
    "build_Z_su2",
    "build_Z_su3",
    "build_plaquette",
    "build_hamiltonian",
    "apply_term",
    "term_matrix",
    "sum_matrix",
    "sector_basis",
    "assemble_sparse",
    "terms_to_json",
    "DEFAULT_DIM_CAP",
]

DEFAULT_DIM_CAP = 2_000_000


@dataclass(frozen=True)
class HamiltonianSpec:
    group: str
    x: float
    cutoffs: Cutoffs
    lattice: LatticeSpec

    def __post_init__(self):
        if self.group not in ("u1", "su2", "su3"):
            raise ConfigError(f"group must be u1, su2 or su3, got {self.group!r}")
        if not np.isfinite(self.x) or self.x < 0:
            raise ConfigError(f"coupling x must be finite and >= 0, got {self.x}")
        self.cutoffs.for_group(self.group)

    @property
    def cutoff(self) -> tuple:
        return self.cutoffs.for_group(self.group)

    @property
    def space(self) -> LinkSpace:
        return link_space(self.group, self.cutoff)


@dataclass(frozen=True)
class HamiltonianTerm:
    """coefficient * (tensor product of link operators).

    ``block`` names the Hermitian group the term belongs to: terms sharing a
    block are summed before exponentiation (a plaquette's Z and Z^dag parts).
    """

    coefficient: float
    factors: tuple  # ((LinkId, LinkOperator), ...)
    block: str = ""
    kind: str = "plaquette"

    def __post_init__(self):
        links = [l for l, _ in self.factors]
        if len(set(links)) != len(links):
            raise DomainError("a term may act on each link at most once")

    @property
    def links(self) -> tuple:
        return tuple(l for l, _ in self.factors)

    @property
    def names(self) -> tuple:
        return tuple(op.name for _, op in self.factors)

    def to_dict(self) -> dict:
        return {
            "coefficient": float(self.coefficient),
            "block": self.block,
            "kind": self.kind,
            "links": [str(l) for l in self.links],
            "operators": list(self.names),
        }


@lru_cache(maxsize=None)
def group_ops(group: str, cutoff: tuple) -> dict:
    if group == "u1":
        return build_u1_ops(cutoff[0])
    if group == "su2":
        return build_su2_ops(cutoff[0])
    if group == "su3":
        return build_su3_ops(*cutoff)
    raise ConfigError(f"unknown group {group!r}")


def _dag(ops: dict, name: str) -> LinkOperator:
    key = name + "^dag"
    if key not in ops:
        ops[key] = ops[name].dagger(key)
    return ops[key]


def build_Z_u1(p: PlaquetteId, ops: dict) -> tuple:
    """(Z, Z^dag) with Z = L+ L+ L- L- on the legs in order."""
    up, dn = ops["Lplus"], ops["Lminus"]
    z = tuple((l, dn if dag else up) for l, dag in p.legs)
    zd = tuple((l, up if dag else dn) for l, dag in p.legs)
    b = _block(p)
    return HamiltonianTerm(1.0, z, b), HamiltonianTerm(1.0, zd, b)


_FLIP = {1: 2, 2: 1}


def build_Z_su2(p: PlaquetteId, ops: dict) -> list:
    """Traced loop sum over the 16 index assignments (Z is self-adjoint)."""
    l1, l2, l3, l4 = p.links
    b = _block(p)
    out = []
    for m1 in (1, 2):
        for m2 in (1, 2):
            for m3 in (1, 2):
                for m4 in (1, 2):
                    sign = -1.0 if m1 != m3 else 1.0
                    f = ((l1, ops[f"V{m1}{m2}"]), (l2, ops[f"V{m2}{m3}"]),
                         (l3, ops[f"V{_FLIP[m4]}{_FLIP[m3]}"]), (l4, ops[f"V{_FLIP[m1]}{_FLIP[m4]}"]))
                    out.append(HamiltonianTerm(sign, f, b))
    return out


def _su3_conj_tables():
    Q, bar = {}, {}
    for a, w in FUND_3.entries.items():
        s, cw = conjugation_phase(w)
        Q[a] = s
        bar[a] = next(k for k, v in FUND_3BAR.entries.items() if v == cw)
    return Q, bar


def build_Z_su3(p: PlaquetteId, ops: dict) -> tuple:
    """(Z terms, Z^dag terms), 81 each.

    Z^dag is built from the 3* operators through the conjugation identity,
    not by transposing Z.
    """
    l1, l2, l3, l4 = p.links
    phase, bar = _su3_conj_tables()
    b = _block(p)
    z, zd = [], []
    idx = (1, 2, 3)
    for a in idx:
        for bb in idx:
            for c in idx:
                for d in idx:
                    z.append(HamiltonianTerm(1.0, (
                        (l1, ops[f"V{a}{bb}"]), (l2, ops[f"V{bb}{c}"]),
                        (l3, _dag(ops, f"V{d}{c}")), (l4, _dag(ops, f"V{a}{d}"))), b))
    for a in idx:
        for bb in idx:
            for c in idx:
                for d in idx:
                    s = float(phase[a] * phase[c])
                    zd.append(HamiltonianTerm(s, (
                        (l1, ops[f"W{bar[a]}{bar[bb]}"]), (l2, ops[f"W{bar[bb]}{bar[c]}"]),
                        (l3, ops[f"V{d}{c}"]), (l4, ops[f"V{a}{d}"])), b))
    return z, zd


def _block(p: PlaquetteId) -> str:
    return f"P({','.join(map(str, p.site))};{p.mu}{p.nu})"


def build_plaquette(group: str, p: PlaquetteId, ops: dict) -> list:
    """Unscaled plaquette terms whose sum is the Hermitian Z + Z^dag (2Z for SU(2))."""
    if group == "u1":
        return list(build_Z_u1(p, ops))
    if group == "su2":
        return [HamiltonianTerm(2.0 * t.coefficient, t.factors, t.block) for t in build_Z_su2(p, ops)]
    z, zd = build_Z_su3(p, ops)
    return z + zd


def build_hamiltonian(spec: HamiltonianSpec) -> list:
    """Electric terms in link order, then plaquette terms in plaquette order."""
    ops = group_ops(spec.group, spec.cutoff)
    terms = []
    for l in enumerate_links(spec.lattice):
        terms.append(HamiltonianTerm(1.0, ((l, ops["E2"]),), f"E({l})", "electric"))
    if spec.x != 0:
        for p in enumerate_plaquettes(spec.lattice):
            for t in build_plaquette(spec.group, p, ops):
                terms.append(HamiltonianTerm(-spec.x * t.coefficient, t.factors, t.block, "plaquette"))
    return terms


def terms_to_json(terms: Sequence[HamiltonianTerm]) -> list:
    return [t.to_dict() for t in terms]


# --------------------------------------------------------------------------
# global basis: mixed-radix integer keys, link 0 most significant

@dataclass
class GlobalBasis:
    links: list
    dims: list
    keys: Optional[np.ndarray] = None  # sorted int64 keys; None = full product basis
    strides: list = field(init=False)
    total: int = field(init=False)

    def __post_init__(self):
        total = 1
        strides = [0] * len(self.dims)
        for i in range(len(self.dims) - 1, -1, -1):
            strides[i] = total
            total *= self.dims[i]
            if total > 2 ** 62:
                raise CapacityError("global basis label space exceeds 64-bit keys")
        self.strides = strides
        self.total = total
        self.pos = {l: i for i, l in enumerate(self.links)}

    @property
    def dim(self) -> int:
        return self.total if self.keys is None else len(self.keys)

    @property
    def is_full(self) -> bool:
        return self.keys is None

    def all_keys(self) -> np.ndarray:
        return np.arange(self.total, dtype=np.int64) if self.keys is None else self.keys

    def index_of(self, keys: np.ndarray) -> np.ndarray:
        """Positions of keys in the basis, -1 where absent."""
        keys = np.asarray(keys, dtype=np.int64)
        if self.keys is None:
            return keys.copy()
        i = np.searchsorted(self.keys, keys)
        i = np.minimum(i, len(self.keys) - 1)
        return np.where(self.keys[i] == keys, i, -1)

    def key_of(self, digits: Sequence[int]) -> int:
        return int(sum(d * s for d, s in zip(digits, self.strides)))

    def digits(self, key: int) -> tuple:
        return tuple((int(key) // s) % d for s, d in zip(self.strides, self.dims))

    def vacuum_key(self) -> int:
        return 0  # every link space lists its vacuum first


def _csc_cache(op: LinkOperator):
    m = op.matrix.tocsc()
    return m.indptr, m.indices, m.data


def apply_term(term: HamiltonianTerm, basis: GlobalBasis, keys: np.ndarray, amps: np.ndarray):
    """Act with a term on sparse (key, amplitude) arrays; returns new arrays (unmerged)."""
    keys = np.asarray(keys, dtype=np.int64)
    amps = np.asarray(amps, dtype=complex) * term.coefficient
    src = np.arange(len(keys))
    for link, op in term.factors:
        i = basis.pos[link]
        s, d = basis.strides[i], basis.dims[i]
        digit = (keys // s) % d
        indptr, indices, data = _csc_cache(op)
        counts = indptr[digit + 1] - indptr[digit]
        rep = np.repeat(np.arange(len(keys)), counts)
        if len(rep) == 0:
            return keys[:0], amps[:0], src[:0]
        starts = np.repeat(indptr[digit], counts)
        offs = np.arange(len(rep)) - np.repeat(np.cumsum(counts) - counts, counts)
        k = starts + offs
        rows = indices[k]
        keys = keys[rep] + (rows - digit[rep]) * s
        amps = amps[rep] * data[k]
        src = src[rep]
    return keys, amps, src


def term_matrix(term: HamiltonianTerm, basis: GlobalBasis, strict: bool = True) -> sp.csr_matrix:
    cols = basis.all_keys()
    keys, amps, src = apply_term(term, basis, cols, np.ones(len(cols)))
    rows = basis.index_of(keys)
    if strict and np.any(rows < 0):
        raise DomainError("term leaves the chosen basis; use a closed sector")
    ok = rows >= 0
    n = basis.dim
    return sp.coo_matrix((amps[ok], (rows[ok], src[ok])), shape=(n, n)).tocsr()


def sum_matrix(terms: Sequence[HamiltonianTerm], basis: GlobalBasis, strict: bool = True) -> sp.csr_matrix:
    """Matrix of a sum of terms; triplets are merged in a fixed order."""
    rows, cols, vals = [], [], []
    all_keys = basis.all_keys()
    for t in terms:
        keys, amps, src = apply_term(t, basis, all_keys, np.ones(len(all_keys)))
        r = basis.index_of(keys)
        if strict and np.any(r < 0):
            raise DomainError("term leaves the chosen basis; use a closed sector")
        ok = r >= 0
        rows.append(r[ok])
        cols.append(src[ok])
        vals.append(amps[ok])
    n = basis.dim
    if not rows:
        return sp.csr_matrix((n, n), dtype=complex)
    m = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    m = m.tocsr()
    m.sum_duplicates()
    m.data[np.abs(m.data) < 1e-15] = 0
    m.eliminate_zeros()
    return m


def sector_basis(terms: Sequence[HamiltonianTerm], links, dims, seeds=(0,), cap: int = DEFAULT_DIM_CAP) -> GlobalBasis:
    """Closure of the seed keys under repeated action of the terms."""
    full = GlobalBasis(list(links), list(dims))
    seen = np.unique(np.asarray(seeds, dtype=np.int64))
    frontier = seen
    while len(frontier):
        found = []
        for t in terms:
            if t.kind == "electric":
                continue
            keys, amps, _ = apply_term(t, full, frontier, np.ones(len(frontier)))
            found.append(keys[np.abs(amps) > 1e-15])
        if not found:
            break
        new = np.unique(np.concatenate(found))
        new = new[~np.isin(new, seen, assume_unique=True)]
        seen = np.union1d(seen, new)
        if len(seen) > cap:
            raise CapacityError(f"sector dimension exceeds cap {cap}")
        frontier = new
    return GlobalBasis(list(links), list(dims), seen)


@dataclass
class SparseHamiltonian:
    matrix: sp.csr_matrix
    basis: GlobalBasis
    spec: Optional[HamiltonianSpec] = None
    hermiticity_defect: float = 0.0

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def vacuum_index(self) -> int:
        return int(self.basis.index_of(np.array([0]))[0])

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dimension, dtype=complex)
        v[self.vacuum_index] = 1.0
        return v


def assemble_sparse(spec: HamiltonianSpec, basis: str = "full", cap: int = DEFAULT_DIM_CAP,
                    terms: Optional[list] = None) -> SparseHamiltonian:
    """Oracle matrix over the full link product basis or the vacuum sector."""
    links = enumerate_links(spec.lattice)
    d = spec.space.dim
    dims = [d] * len(links)
    full_dim = d ** len(links)
    terms = build_hamiltonian(spec) if terms is None else terms
    if basis == "full":
        if full_dim > cap:
            raise CapacityError(f"global dimension {full_dim} exceeds cap {cap}; try the vacuum sector")
        gb = GlobalBasis(links, dims)
    elif basis == "sector":
        if spec.x == 0:
            # closure must not depend on the coupling
            probe = HamiltonianSpec(spec.group, 1.0, spec.cutoffs, spec.lattice)
            gb = sector_basis(build_hamiltonian(probe), links, dims, cap=cap)
        else:
            gb = sector_basis(terms, links, dims, cap=cap)
    else:
        raise ConfigError(f"basis must be full or sector, got {basis!r}")
    H = sum_matrix(terms, gb)
    diff = H - H.conj().T
    defect = float(np.abs(diff.data).max()) if diff.nnz else 0.0
    if defect > 1e-12:
        raise NumericError(f"assembled Hamiltonian is not Hermitian (defect {defect:.3e})")
    return SparseHamiltonian(H, gb, spec, defect)
