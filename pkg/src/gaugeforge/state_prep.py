"""Trial states exp[C (Z + Z^dag)]|0> built from restricted plaquette rotations.

A restricted plaquette operator ``Z_c = |c><0|`` moves the four legs of one
plaquette from the vacuum to a fixed product configuration ``c``.  The
unitary ``exp[phi (Z_c - Z_c^dag)]`` rotates within span{|0>, |c>}, so a
sequence of them reproduces any real target amplitude vector on the
plaquette, with angles fixed one at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from .errors import CapacityError, ConfigError, DomainError, NumericError
from .hamiltonian import (
    GlobalBasis,
    HamiltonianSpec,
    build_Z_su2,
    build_Z_su3,
    group_ops,
    sector_basis,
    sum_matrix,
)
from .lattice_topology import LatticeSpec, enumerate_links, enumerate_plaquettes
from .link_registers import LinkBasisU1, LinkSpace, build_restricted_op, link_space
from .simulator import StateVector
from .su_algebra import HalfInt

__all__ = [
    "TrialSpec",
    "AngleSchedule",
    "zeta_u1",
    "zeta_u1_combinatorial",
    "zeta_su2",
    "zeta_su2_closed",
    "build_restricted_ops",
    "restricted_plaquette_op",
    "build_prep_unitary",
    "prep_unitary_closed_form",
    "solve_angles",
    "plaquette_target",
    "plaquette_schedule",
    "prepare_sparse",
    "prepare_state",
    "oracle_trial_state",
]


@dataclass(frozen=True)
class TrialSpec:
    C: float
    depth: Optional[int] = None  # |l| for U(1), 2j for SU(2); None = cutoff

    def __post_init__(self):
        if not math.isfinite(self.C):
            raise ConfigError("trial.C must be finite")
        if self.depth is not None and self.depth < 0:
            raise ConfigError("trial.depth must be >= 0")


@dataclass
class AngleSchedule:
    labels: list
    phis: list
    configs: list = field(default_factory=list)  # local digit tuples, legs in order

    def __iter__(self):
        return iter(zip(self.labels, self.phis))

    def __len__(self):
        return len(self.phis)

    def to_dict(self) -> dict:
        return {"labels": list(self.labels), "phis": [float(p) for p in self.phis]}


# --------------------------------------------------------------------------
# expansion coefficients

def zeta_u1(l: int, C: float) -> float:
    """I_l(2C) by its power series."""
    l = abs(int(l))
    z = C  # (2C)/2
    term = z ** l / math.factorial(l)
    total = term
    k = 0
    while True:
        k += 1
        term *= z * z / (k * (k + l))
        total += term
        if abs(term) <= 1e-17 * abs(total) or term == 0.0:
            break
    return total


def zeta_u1_combinatorial(l: int, C: float, n_terms: int = 400) -> float:
    """sum_n C^n/n! binom(n, (n-l)/2): the number of ways n plaquette moves net to l."""
    l = abs(int(l))
    total = 0.0
    for n in range(l, n_terms, 2):
        w = math.comb(n, (n - l) // 2) / math.factorial(n)
        total += w * C ** n
        if n > 20 and abs(w * C ** n) < 1e-18 * abs(total):
            break
    return total


def _su2_recursion(C: float, twice_max: int, n_terms: int = 200) -> np.ndarray:
    """Coefficients of exp(C Z_1/2) on Z_j, j = 0, 1/2, ..., from Z_1/2 Z_j = Z_{j-1/2} + Z_{j+1/2}."""
    size = twice_max + n_terms + 2
    v = np.zeros(size)
    v[0] = 1.0
    acc = v.copy()
    for n in range(1, n_terms):
        nv = np.zeros(size)
        nv[1:] += v[:-1]
        nv[:-1] += v[1:]
        v = nv * (C / n)
        acc += v
        if np.max(np.abs(v)) < 1e-18 * np.max(np.abs(acc)):
            break
    return acc[: twice_max + 1]


def zeta_su2(j, C: float, j_max=None) -> float:
    """Coefficient of Z_j(p) in exp(C Z_1/2(p)), by the character recursion."""
    j = HalfInt.of(j)
    return float(_su2_recursion(C, j.twice)[j.twice])


def zeta_su2_closed(j, C: float) -> float:
    from scipy.special import iv

    j = HalfInt.of(j)
    if C == 0:
        return 1.0 if j.twice == 0 else 0.0
    n = j.twice + 1
    return float(n * iv(n, 2 * C) / C)


# --------------------------------------------------------------------------
# restricted operators and prep unitaries

def build_restricted_ops(group: str, cutoff: tuple, labels: Sequence) -> list:
    """One-link restricted shifts |label><vacuum| (L(l'), J(j)M^L(m)M^R(m'), ...)."""
    space = link_space(group, cutoff)
    out = []
    for lab in labels:
        if group == "u1" and isinstance(lab, (int, np.integer)):
            lab = LinkBasisU1(int(lab))
        out.append(build_restricted_op(space, lab))
    return out


def restricted_plaquette_op(space: LinkSpace, config: Sequence[int]) -> sp.csr_matrix:
    """|c><0| on the four-leg product space, legs in order (leg 0 most significant)."""
    d = space.dim
    n = d ** len(config)
    col = 0
    row = 0
    for c in config:
        row = row * d + int(c)
        col = col * d + space.vacuum
    return sp.csr_matrix(([1.0], ([row], [col])), shape=(n, n), dtype=complex)


def build_prep_unitary(Zc, phi: float) -> np.ndarray:
    """Dense exp[phi (Z_c - Z_c^dag)] (reference path)."""
    from scipy.linalg import expm

    A = Zc.toarray() if sp.issparse(Zc) else np.asarray(Zc)
    return expm(phi * (A - A.conj().T))


def prep_unitary_closed_form(n: int, vac: int, target: int, phi: float) -> np.ndarray:
    U = np.eye(n, dtype=complex)
    c, s = math.cos(phi), math.sin(phi)
    U[vac, vac] = c
    U[target, target] = c
    U[target, vac] = s
    U[vac, target] = -s
    return U


def solve_angles(amplitudes: Sequence[float], labels: Optional[Sequence[str]] = None,
                 vacuum: Optional[float] = None, tol: float = 1e-10) -> AngleSchedule:
    """Angles so that the rotations, in the given order, produce the amplitudes.

    The k-th rotation leaves sin(phi_k) * prod_{i<k} cos(phi_i) on its
    configuration; angles are solved front to back with phi in [-pi/2, pi/2].
    """
    amps = [float(a) for a in amplitudes]
    if any(isinstance(a, complex) for a in amplitudes):
        raise DomainError("restricted rotations need real amplitudes")
    r = 1.0
    phis = []
    for a in amps:
        if r <= 0:
            if abs(a) > tol:
                raise NumericError("infeasible schedule: vacuum amplitude exhausted")
            phis.append(0.0)
            continue
        s = a / r
        if abs(s) > 1 + tol:
            raise NumericError(f"infeasible schedule: |sin phi| = {abs(s):.6g} > 1")
        s = max(-1.0, min(1.0, s))
        phi = math.asin(s)
        phis.append(phi)
        r *= math.cos(phi)
    if vacuum is not None and abs(r - vacuum) > 1e-8:
        raise NumericError(f"schedule leaves vacuum amplitude {r:.12g}, target {vacuum:.12g}")
    labels = list(labels) if labels is not None else [f"c{i}" for i in range(len(amps))]
    return AngleSchedule(labels, phis)


# --------------------------------------------------------------------------
# single-plaquette targets

def _local_plaquette(group: str, cutoff: tuple):
    """Reference 1x1 open plaquette: its 4 links (legs in order) and ops."""
    lat = LatticeSpec(2, (2, 2), "open")
    (p,) = enumerate_plaquettes(lat)
    return lat, p, group_ops(group, cutoff)


def _u1_target(cutoff: tuple, trial: TrialSpec):
    lmax = cutoff[0]
    depth = lmax if trial.depth is None else min(trial.depth, lmax)
    space = link_space("u1", cutoff)
    z = [zeta_u1(l, trial.C) for l in range(depth + 1)]
    norm = math.sqrt(z[0] ** 2 + 2 * sum(v * v for v in z[1:]))
    configs, amps, labels = [], [], []
    order = []
    for l in range(depth, 0, -1):
        order.extend((-l, l))
    for l in order:
        up = space.find(LinkBasisU1(l))
        dn = space.find(LinkBasisU1(-l))
        configs.append((up, up, dn, dn))
        amps.append(z[abs(l)] / norm)
        labels.append(f"Z_{l}")
    return configs, amps, labels, z[0] / norm


def _support_target(vec: np.ndarray, basis: GlobalBasis, label_fn):
    vac = basis.index_of(np.array([0]))[0]
    v = np.asarray(vec)
    if np.max(np.abs(v.imag)) > 1e-12:
        raise NumericError("trial amplitudes are not real")
    v = v.real / np.linalg.norm(v)
    nz = [i for i in np.nonzero(np.abs(v) > 1e-15)[0] if i != vac]
    keys = basis.all_keys()
    items = sorted((basis.digits(int(keys[i])), v[i]) for i in nz)
    configs = [c for c, _ in items]
    amps = [a for _, a in items]
    labels = [label_fn(c) for c in configs]
    return configs, amps, labels, float(v[vac])


def _su2_target(cutoff: tuple, trial: TrialSpec):
    jmax = cutoff[0]
    depth = jmax.twice if trial.depth is None else min(trial.depth, jmax.twice)
    lat, p, ops = _local_plaquette("su2", cutoff)
    space = link_space("su2", cutoff)
    terms = build_Z_su2(p, ops)
    sb = sector_basis(terms, list(p.links), [space.dim] * 4)
    Z = sum_matrix(terms, sb)
    zeta = _su2_recursion(trial.C, depth)
    e0 = np.zeros(sb.dim)
    e0[sb.index_of(np.array([0]))[0]] = 1.0
    cur, prev = e0, np.zeros(sb.dim)
    psi = zeta[0] * e0
    for tj in range(1, depth + 1):
        nxt = Z @ cur - prev
        prev, cur = cur, nxt
        psi = psi + zeta[tj] * cur

    def lab(c):
        return "Z[" + ";".join(str(space.states[i]) for i in c) + "]"
    return _support_target(psi, sb, lab)


def _su3_target(cutoff: tuple, trial: TrialSpec):
    lat, p, ops = _local_plaquette("su3", cutoff)
    space = link_space("su3", cutoff)
    z, zd = build_Z_su3(p, ops)
    sb = sector_basis(z + zd, list(p.links), [space.dim] * 4)
    W = sum_matrix(z + zd, sb)
    e0 = np.zeros(sb.dim, dtype=complex)
    e0[sb.index_of(np.array([0]))[0]] = 1.0
    psi = sla.expm_multiply((trial.C * W).tocsc(), e0)

    def lab(c):
        return "Z[" + ";".join(str(space.states[i]) for i in c) + "]"
    return _support_target(psi, sb, lab)


def plaquette_target(group: str, cutoff: tuple, trial: TrialSpec):
    """(configs, amplitudes, labels, vacuum amplitude) in application order."""
    if group == "u1":
        return _u1_target(cutoff, trial)
    if group == "su2":
        return _su2_target((HalfInt.of(cutoff[0]),), trial)
    if group == "su3":
        return _su3_target(cutoff, trial)
    raise ConfigError(f"unknown group {group!r}")


def plaquette_schedule(group: str, cutoff: tuple, trial: TrialSpec) -> AngleSchedule:
    configs, amps, labels, vac = plaquette_target(group, cutoff, trial)
    sched = solve_angles(amps, labels, vacuum=vac)
    sched.configs = list(configs)
    return sched


# --------------------------------------------------------------------------
# lattice states

def prepare_sparse(trial: TrialSpec, spec: HamiltonianSpec, schedule: Optional[AngleSchedule] = None):
    """Apply every plaquette's schedule (plaquettes in enumeration order) to |0>.

    Returns (sorted keys, amplitudes) over the global mixed-radix labels.
    """
    links = enumerate_links(spec.lattice)
    d = spec.space.dim
    basis = GlobalBasis(links, [d] * len(links))
    sched = plaquette_schedule(spec.group, spec.cutoff, trial) if schedule is None else schedule
    state: Dict[int, float] = {0: 1.0}
    for p in enumerate_plaquettes(spec.lattice):
        strides = [basis.strides[basis.pos[l]] for l in p.links]
        vac_keys = [k for k in state if all((k // s) % d == 0 for s in strides)]
        offs = [sum(c * s for c, s in zip(cfg, strides)) for cfg in sched.configs]
        for phi, off in zip(sched.phis, offs):
            c, s = math.cos(phi), math.sin(phi)
            for k0 in vac_keys:
                a = state.get(k0, 0.0)
                b = state.get(k0 + off, 0.0)
                if a == 0.0 and b == 0.0:
                    continue
                state[k0] = c * a - s * b
                state[k0 + off] = s * a + c * b
    keys = np.array(sorted(state), dtype=np.int64)
    amps = np.array([state[int(k)] for k in keys], dtype=complex)
    return keys, amps


def prepare_state(trial: TrialSpec, spec: HamiltonianSpec, basis: Optional[GlobalBasis] = None) -> StateVector:
    keys, amps = prepare_sparse(trial, spec)
    if basis is None:
        links = enumerate_links(spec.lattice)
        basis = GlobalBasis(links, [spec.space.dim] * len(links))
        if basis.total > 2_000_000:
            raise CapacityError("full basis too large for a dense state; pass a sector basis")
    idx = basis.index_of(keys)
    if np.any(idx < 0):
        raise DomainError("prepared state leaves the chosen basis")
    v = np.zeros(basis.dim, dtype=complex)
    v[idx] = amps
    n = np.linalg.norm(v)
    if abs(n - 1) > 1e-10:
        raise NumericError(f"prepared state norm {n:.12g}")
    return StateVector(v, "link")


def oracle_trial_state(spec: HamiltonianSpec, trial: TrialSpec, extra: Optional[int] = None) -> np.ndarray:
    """Reference single-plaquette trial state over the full 4-link basis at the working cutoff.

    The exponential is taken at a larger cutoff (so truncation does not feed
    back into the kept amplitudes), projected to the working cutoff and
    normalized.  U(1) and SU(2) only.
    """
    group = spec.group
    if group == "u1":
        lmax = spec.cutoff[0]
        big = (lmax + (10 if extra is None else extra),)
    elif group == "su2":
        jm = spec.cutoff[0]
        big = (HalfInt(jm.twice + (4 if extra is None else extra)),)
    else:
        raise DomainError("the larger-cutoff oracle covers u1 and su2")
    if len(enumerate_plaquettes(spec.lattice)) != 1 or len(enumerate_links(spec.lattice)) != 4:
        raise DomainError("oracle trial state is single-plaquette only")
    lat, p, ops = _local_plaquette(group, big)
    from .hamiltonian import build_plaquette

    terms = build_plaquette(group, p, ops)
    big_space = link_space(group, big)
    sb = sector_basis(terms, list(p.links), [big_space.dim] * 4)
    W = sum_matrix(terms, sb)
    if group == "su2":
        W = W * 0.5  # build_plaquette returns 2Z for SU(2); the trial exponent is C Z
    e0 = np.zeros(sb.dim, dtype=complex)
    e0[sb.index_of(np.array([0]))[0]] = 1.0
    psi = sla.expm_multiply((trial.C * W).tocsc(), e0)
    # project onto the working cutoff, in the lattice's link order
    small = spec.space
    target = GlobalBasis(enumerate_links(spec.lattice), [small.dim] * 4)
    (q,) = enumerate_plaquettes(spec.lattice)
    strides = [target.strides[target.pos[l]] for l in q.links]
    out = np.zeros(target.total, dtype=complex)
    for i, k in enumerate(sb.all_keys()):
        labels = [big_space.states[x] for x in sb.digits(int(k))]
        if all(lab in small.index for lab in labels):
            out[sum(small.index[lab] * st for lab, st in zip(labels, strides))] += psi[i]
    return out / np.linalg.norm(out)

