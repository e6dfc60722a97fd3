"""Gate and swap counting for full-lattice Trotter steps, and scaling fits.

Counts follow the synthesis in the compiler exactly: a string with k
non-identity factors, n_xy of them X or Y, and hop sum h over consecutive
qubits (in logical order) costs ``string_cost(k, n_xy, h)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import CapacityError, DomainError, NumericError
from .hamiltonian import HamiltonianSpec, HamiltonianTerm, build_plaquette, group_ops
from .lattice_topology import LatticeSpec, LinkId, build_layout, enumerate_links, enumerate_plaquettes
from .link_registers import Cutoffs, Encoding, link_space, qubit_count
from .pauli import letters_of
from .trotter_compiler import block_sums, link_realization, string_cost

__all__ = ["GateCountReport", "count_lattice", "sweep", "scaling_fit", "string_table"]


@dataclass
class GateCountReport:
    group: str
    layout: str
    encoding: str
    sites: int
    qubits: int
    D: int
    gates_by_kind: dict
    strings: int
    exact: bool
    steps: int = 1
    sweep: list = field(default_factory=list)
    exponent_fit: Optional[float] = None

    @property
    def swaps(self) -> int:
        return self.gates_by_kind["SWAP"]

    @property
    def total(self) -> int:
        return sum(self.gates_by_kind.values())

    def to_dict(self) -> dict:
        out = {
            "group": self.group,
            "layout": self.layout,
            "encoding": self.encoding,
            "sites": self.sites,
            "qubits": self.qubits,
            "D": self.D,
            "trotter_steps": self.steps,
            "gates_by_kind": dict(self.gates_by_kind),
            "swaps": self.swaps,
            "total_gates": self.total,
            "strings": self.strings,
            "count": "exact" if self.exact else "upper_bound",
        }
        if self.sweep:
            out["sweep"] = self.sweep
        if self.exponent_fit is not None:
            out["exponent_fit"] = self.exponent_fit
        return out


def scaling_fit(sizes: Sequence[float], counts: Sequence[float]) -> float:
    """Least-squares slope of log(count) against log(size)."""
    if len(sizes) != len(counts):
        raise DomainError("sizes and counts differ in length")
    if len(sizes) < 4:
        raise DomainError("a scaling fit needs at least 4 points")
    s = np.asarray(sizes, dtype=float)
    c = np.asarray(counts, dtype=float)
    if np.any(s <= 0) or np.any(c <= 0):
        raise NumericError("scaling fit needs positive sizes and counts")
    slope, _ = np.polyfit(np.log(s), np.log(c), 1)
    return float(slope)


@dataclass
class StringTable:
    """Strings of one block on local qubits (leg * w + offset), padded with -1."""

    qubits: np.ndarray  # (S, kmax) sorted local indices
    k: np.ndarray
    nxy: np.ndarray


def string_table(ps) -> StringTable:
    rows, ks, nx = [], [], []
    for key in sorted(ps.terms):
        if key == (0, 0):
            continue
        let = letters_of(key)
        rows.append(sorted(let))
        ks.append(len(let))
        nx.append(sum(1 for a in let.values() if a != "Z"))
    kmax = max(ks, default=1)
    Q = -np.ones((len(rows), kmax), dtype=np.int64)
    for i, r in enumerate(rows):
        Q[i, : len(r)] = r
    return StringTable(Q, np.array(ks, dtype=np.int64), np.array(nx, dtype=np.int64))


def _fixed_costs(tab: StringTable) -> tuple:
    r1 = r2 = 0
    for k, nxy in zip(tab.k.tolist(), tab.nxy.tolist()):
        a, b, _ = string_cost(k, nxy, 0)
        r1 += a
        r2 += b
    return r1, r2


def _swaps(tab: StringTable, leg_links: Sequence[int], w: int, pos: np.ndarray) -> int:
    """Swap count of a table placed on the given links."""
    if len(tab.k) == 0:
        return 0
    base = np.asarray(leg_links, dtype=np.int64) * w
    Q = tab.qubits
    valid = Q >= 0
    G = np.where(valid, base[np.maximum(Q, 0) // w] + np.maximum(Q, 0) % w, np.iinfo(np.int64).max)
    G.sort(axis=1)
    a, b = G[:, :-1], G[:, 1:]
    ok = b != np.iinfo(np.int64).max
    d = np.zeros(a.shape, dtype=np.int64)
    if ok.any():
        pa, pb = pos[a[ok]], pos[b[ok]]
        d[ok] = np.abs(pa - pb).sum(axis=1) - 1
    hops = d.sum(axis=1)
    factor = np.where(tab.k == 2, 2, np.where(tab.k >= 3, 4, 0))
    return int((factor * hops).sum())


def _local_blocks(spec: HamiltonianSpec, enc: Encoding, D: int):
    """Electric and plaquette blocks on a reference link / plaquette, legs numbered 0..3."""
    ops = group_ops(spec.group, spec.cutoff)
    space = spec.space
    e_link = enumerate_links(spec.lattice)[0]
    e = [HamiltonianTerm(1.0, ((e_link, ops["E2"]),), "E", "electric")]
    (_, e_ps), = block_sums(e, enc, {e_link: 0}, space, D)
    plaqs = enumerate_plaquettes(spec.lattice)
    p_terms = []
    if plaqs and spec.x != 0:
        p0 = plaqs[0]
        p_terms = [HamiltonianTerm(-spec.x * t.coefficient, t.factors, t.block)
                   for t in build_plaquette(spec.group, p0, ops)]
    return e_ps, p_terms, plaqs


def _entry_structure(op, enc: Encoding, D: int) -> list:
    """Per nonzero entry: (always-present X/Y qubits, optional Z qubits), link-local."""
    key = ("struct", id(op), enc.kind, D)
    hit = _STRUCT.get(key)
    if hit is not None and hit[0] is op:
        return hit[1]
    space = op.space
    out = []
    for r, c, _ in op.entries():
        O, Dg = [], []
        for slot, (a, b) in enumerate(zip(space.reg_index[r], space.reg_index[c])):
            base = slot * D
            if enc.kind == "one_hot":
                if a == b:
                    Dg.append(base + a)
                else:
                    O.extend((base + a, base + b))
            else:
                for bit in range(enc.required(space.registers[slot])):
                    if (a >> bit) & 1 == (b >> bit) & 1:
                        Dg.append(base + bit)
                    else:
                        O.append(base + bit)
        out.append((tuple(sorted(O)), tuple(sorted(Dg))))
    _STRUCT[key] = (op, out)
    return out


_STRUCT: dict = {}


def _op_size(op, enc: Encoding, D: int, realize_cap: int = 100_000) -> int:
    raw = sum(2 ** (len(O) + len(Dg)) for O, Dg in _entry_structure(op, enc, D))
    if raw <= realize_cap:
        return len(link_realization(op, enc, D))
    return raw


def _expansion_size(terms, enc, D) -> int:
    """Unmerged string count of the tensor expansion of the terms."""
    tot = 0
    for t in terms:
        n = 1
        for _, op in t.factors:
            n *= _op_size(op, enc, D)
        tot += n
    return tot


def count_lattice(spec: HamiltonianSpec, enc: Encoding, layout_kind: str = "local",
                  steps: int = 1, explicit_cap: int = 400_000) -> GateCountReport:
    """Gate counts of ``steps`` first-order Trotter steps over the whole lattice."""
    space = spec.space
    D = enc.qubits_per_register(space)
    regs = space.n_registers
    w = regs * D
    links = enumerate_links(spec.lattice)
    lidx = {l: i for i, l in enumerate(links)}
    layout = build_layout(spec.lattice, layout_kind, regs, D)
    pos = np.array(layout.positions, dtype=np.int64)
    qc = qubit_count(spec.group, spec.cutoffs, enc, spec.lattice)

    e_ps, p_terms, plaqs = _local_blocks(spec, enc, D)
    e_tab = string_table(e_ps)
    r1e, r2e = _fixed_costs(e_tab)
    r1 = r1e * len(links)
    r2 = r2e * len(links)
    sw = sum(_swaps(e_tab, [i], w, pos) for i in range(len(links)))
    strings = len(e_tab.k) * len(links)
    exact = True
    if p_terms:
        if _expansion_size(p_terms, enc, D) <= explicit_cap:
            p0 = plaqs[0]
            local = {l: i for i, l in enumerate(p0.links)}
            (_, p_ps), = block_sums(p_terms, enc, local, space, D)
            tab = string_table(p_ps)
            pr1, pr2 = _fixed_costs(tab)
            r1 += pr1 * len(plaqs)
            r2 += pr2 * len(plaqs)
            strings += len(tab.k) * len(plaqs)
            for p in plaqs:
                sw += _swaps(tab, [lidx[l] for l in p.links], w, pos)
        else:
            exact = False
            b1, b2, bs, bn = _bound_plaquettes(spec, p_terms, plaqs, enc, D, w, lidx, pos)
            r1 += b1
            r2 += b2
            sw += bs
            strings += int(bn)
    counts = {"R1": int(r1) * steps, "R2": int(r2) * steps, "SWAP": int(sw) * steps}
    return GateCountReport(spec.group, layout_kind, enc.kind, spec.lattice.n_sites, qc.qubits, D,
                           counts, strings * steps, exact, steps)


# --------------------------------------------------------------------------
# upper bound for plaquettes whose explicit expansion is too large

def _segment_classes(op, enc: Encoding, D: int, w: int, pos0: np.ndarray, max_optional: int = 20):
    """Aggregate one link operator's unmerged strings by (first, last, k capped at 3).

    Each entry contributes 2^|O| letter choices times every subset of its
    optional Z qubits.  Returns rows (first, last, kc, n, sum_k, sum_nxy,
    sum_hops) with link-local offsets; intra-link hops use the reference
    link, which is translation invariant in both layouts.
    """
    acc: dict = {}
    big = w + 1
    for O, Dg in _entry_structure(op, enc, D):
        nd = len(Dg)
        if nd > max_optional:
            raise CapacityError(f"entry with {nd} optional qubits is too large to count")
        masks = np.arange(1 << nd, dtype=np.int64)
        M = np.zeros((len(masks), w), dtype=bool)
        if O:
            M[:, list(O)] = True
        for i, q in enumerate(Dg):
            M[:, q] = (masks >> i) & 1 == 1
        k = M.sum(axis=1)
        idx = np.where(M, np.arange(w)[None, :], big)
        idx.sort(axis=1)
        first = np.where(k > 0, idx[:, 0], -1)
        last = np.where(k > 0, np.take_along_axis(idx, np.maximum(k - 1, 0)[:, None], 1)[:, 0], -1)
        a, b = idx[:, :-1], idx[:, 1:]
        ok = b < big
        hop = np.zeros(a.shape, dtype=np.int64)
        if ok.any():
            hop[ok] = np.abs(pos0[a[ok]] - pos0[b[ok]]).sum(axis=1) - 1
        h = hop.sum(axis=1)
        mult = float(2 ** len(O))
        kc = np.minimum(k, 3)
        code = (first + 1) * (big + 1) * 4 + (last + 1) * 4 + kc
        for cde in np.unique(code):
            sel = code == cde
            n = mult * sel.sum()
            t = acc.setdefault(int(cde), [0.0, 0.0, 0.0, 0.0])
            t[0] += n
            t[1] += mult * k[sel].sum()
            t[2] += n * len(O)
            t[3] += mult * h[sel].sum()
    rows = []
    for cde in sorted(acc):
        f = cde // ((big + 1) * 4) - 1
        l = (cde // 4) % (big + 1) - 1
        rows.append([f, l, cde % 4, *acc[cde]])
    return np.array(rows, dtype=float)


def _bound_plaquettes(spec, p_terms, plaqs, enc, D, w, lidx, pos):
    cls_cache = {}
    pos0 = pos[:w]

    def classes(op):
        c = cls_cache.get(id(op))
        if c is None:
            c = cls_cache[id(op)] = _segment_classes(op, enc, D, w, pos0)
        return c

    R1 = R2 = SW = NS = 0.0
    for p in plaqs:
        glinks = [lidx[l] for l in p.links]
        for t in p_terms:
            facs = sorted(zip(glinks, [op for _, op in t.factors]))
            # state columns: last, kc, N, Sk, Sx, SH
            st = np.array([[-1, 0, 1.0, 0, 0, 0]])
            for gl, op in facs:
                c = classes(op)
                first = np.where(c[:, 0] >= 0, c[:, 0] + gl * w, -1)
                last = np.where(c[:, 1] >= 0, c[:, 1] + gl * w, -1)
                sl, sk = st[:, 0][:, None], st[:, 1][:, None]
                f, l, ck = first[None, :], last[None, :], c[:, 2][None, :]
                newlast = np.where(f < 0, sl, l)
                newkc = np.minimum(sk + ck, 3)
                both = (sl >= 0) & (f >= 0)
                hop = np.zeros(both.shape)
                if both.any():
                    ia = np.broadcast_to(sl, both.shape)[both].astype(np.int64)
                    ib = np.broadcast_to(f, both.shape)[both].astype(np.int64)
                    hop[both] = np.abs(pos[ia] - pos[ib]).sum(axis=1) - 1
                sN, sK, sX, sH = (st[:, i][:, None] for i in (2, 3, 4, 5))
                cn, csk, csx, csh = (c[:, i][None, :] for i in (3, 4, 5, 6))
                N = sN * cn
                K = sK * cn + sN * csk
                X = sX * cn + sN * csx
                Hh = sH * cn + sN * csh + N * hop
                key = ((newlast + 1) * 4 + newkc).ravel().astype(np.int64)
                uk, inv = np.unique(key, return_inverse=True)
                agg = np.zeros((len(uk), 4))
                for j, arr in enumerate((N, K, X, Hh)):
                    agg[:, j] = np.bincount(inv, weights=arr.ravel(), minlength=len(uk))
                st = np.column_stack([uk // 4 - 1, uk % 4, agg])
            for row in st:
                kc = int(row[1])
                N, K, X, Hh = row[2:]
                if kc == 0:
                    continue
                NS += N
                if kc == 1:
                    R1 += 2 * X + N
                elif kc == 2:
                    R1 += 2 * X
                    R2 += N
                    SW += 2 * Hh
                else:
                    R1 += 2 * X + 4 * (K - N) + N
                    R2 += 2 * (K - N)
                    SW += 4 * Hh
    return R1, R2, SW, NS


def sweep(group: str, cutoffs: Cutoffs, extents_list: Sequence[tuple], enc: Encoding,
          layout_kind: str = "local", x: float = 1.0, boundary: str = "periodic",
          steps: int = 1) -> GateCountReport:
    """Count over several lattices and fit total gates against the site count M."""
    reports = []
    for ext in extents_list:
        lat = LatticeSpec(len(ext), tuple(ext), boundary)
        reports.append(count_lattice(HamiltonianSpec(group, x, cutoffs, lat), enc, layout_kind, steps))
    sizes = [r.sites for r in reports]
    totals = [r.total for r in reports]
    fit = scaling_fit(sizes, totals) if len(reports) >= 4 else None
    last = reports[-1]
    last.sweep = [{"sites": r.sites, "qubits": r.qubits, "total_gates": r.total,
                   "gates_by_kind": r.gates_by_kind} for r in reports]
    last.exponent_fit = fit
    return last
