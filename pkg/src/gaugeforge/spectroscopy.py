"""Energy spectra from overlap series and Wilson-loop observables.

Conventions: U(t) = exp(-iHt), the series is v_k = <psi|U(k dt)|psi>, and
a mode exp(-iEt) shows up at +E on the frequency axis.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm

from .errors import ConfigError, DomainError, NumericError
from .hamiltonian import GlobalBasis, HamiltonianTerm, SparseHamiltonian, group_ops, sum_matrix
from .lattice_topology import LatticeSpec, LinkId, enumerate_plaquettes, rectangular_contour, shift_site
from .link_registers import Encoding
from .simulator import SpectrumResult, evolve_exact
from .trotter_compiler import Circuit, block_sums, trotterize

__all__ = [
    "TimeSeries",
    "Contour",
    "parse_mode",
    "hamiltonian_bound",
    "trotter_slice",
    "time_series",
    "fft_peaks",
    "wilson_loop_operator",
    "hermitized",
    "wilson_matrix",
    "wilson_expectation",
    "compile_wilson_evolution",
]


@dataclass
class TimeSeries:
    dt: float
    values: np.ndarray
    mode: str = "oracle"
    e_bound: Optional[float] = None  # bound on max |E|, for the aliasing guard

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)

    @property
    def K(self) -> int:
        return len(self.values)

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.K)

    def to_csv(self) -> str:
        rows = ["t,re,im"]
        for t, v in zip(self.times, self.values):
            rows.append(f"{t:.17g},{v.real:.17g},{v.imag:.17g}")
        return "\n".join(rows) + "\n"


@dataclass(frozen=True)
class Contour:
    """Closed loop as (link, backward) legs; a backward leg is traversed against the link."""

    legs: tuple
    spec: Optional[LatticeSpec] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.legs:
            raise DomainError("empty contour")
        if self.spec is not None:
            ends = [self._ends(l, back) for l, back in self.legs]
            for (a, b), (c, _) in zip(ends, ends[1:] + ends[:1]):
                if b != c:
                    raise DomainError("contour is not closed")

    def _ends(self, link: LinkId, back: bool):
        head = shift_site(link.site, link.mu, self.spec)
        return (head, link.site) if back else (link.site, head)

    @classmethod
    def rectangle(cls, spec: LatticeSpec, r, mu: int, nu: int, a: int, b: int) -> "Contour":
        return cls(rectangular_contour(spec, r, mu, nu, a, b), spec)

    @classmethod
    def plaquette(cls, spec: LatticeSpec, index: int = 0) -> "Contour":
        return cls(tuple(enumerate_plaquettes(spec)[index].legs), spec)

    @property
    def links(self) -> tuple:
        return tuple(l for l, _ in self.legs)


# --------------------------------------------------------------------------
# series

def parse_mode(mode: str) -> tuple:
    """'oracle' -> ('oracle', 0); 'trotter(512)' or 'trotter' + m -> ('trotter', m)."""
    m = re.fullmatch(r"\s*(oracle|trotter)\s*(?:\(\s*(\d+)\s*\))?\s*", mode)
    if not m:
        raise ConfigError(f"unknown series mode {mode!r}")
    return m.group(1), int(m.group(2)) if m.group(2) else 0


def hamiltonian_bound(H) -> float:
    M = H.matrix if isinstance(H, SparseHamiltonian) else H
    A = abs(sp.csr_matrix(M))
    return float(A.sum(axis=1).max())


def _term_blocks(terms: Sequence[HamiltonianTerm]):
    order, acc = [], {}
    for t in terms:
        if t.block not in acc:
            order.append(t.block)
            acc[t.block] = []
        acc[t.block].append(t)
    return [acc[b] for b in order]


def trotter_slice(terms: Sequence[HamiltonianTerm], basis: GlobalBasis, delta: float) -> np.ndarray:
    """prod_blocks exp(-i delta H_block), blocks in Hamiltonian order, on the basis."""
    U = None
    for group in _term_blocks(terms):
        B = sum_matrix(group, basis, strict=False).toarray()
        E = expm(-1j * delta * B)
        U = E if U is None else E @ U
    return U


def time_series(psi, H: SparseHamiltonian, dt: float, K: int, mode: str = "oracle",
                terms: Optional[Sequence[HamiltonianTerm]] = None) -> TimeSeries:
    """<psi|exp(-iH t_k)|psi> on t_k = k dt.

    ``trotter(m)`` advances each dt with m first-order slices over the
    Hamiltonian's blocks (electric terms per link, Z + Z^dag per plaquette).
    """
    psi = np.asarray(getattr(psi, "amplitudes", psi), dtype=complex)
    n = np.linalg.norm(psi)
    if abs(n - 1) > 1e-10:
        raise DomainError(f"time_series needs a normalized state (norm {n:.12g})")
    if K < 1 or dt <= 0:
        raise DomainError("need K >= 1 and dt > 0")
    kind, m = parse_mode(mode)
    if kind == "oracle":
        vals = evolve_exact(psi, H, dt * np.arange(K)) @ psi.conj()
    else:
        if m < 1:
            raise ConfigError("trotter mode needs m >= 1")
        if terms is None:
            from .hamiltonian import build_hamiltonian

            terms = build_hamiltonian(H.spec)
        S = np.linalg.matrix_power(trotter_slice(terms, H.basis, dt / m), m)
        vals = np.empty(K, dtype=complex)
        v = psi.copy()
        for k in range(K):
            vals[k] = np.vdot(psi, v)
            v = S @ v
    return TimeSeries(dt, vals, kind if kind == "oracle" else f"trotter({m})", hamiltonian_bound(H))


# --------------------------------------------------------------------------
# peaks

def fft_peaks(series: TimeSeries, threshold: float = 0.05, e_max: Optional[float] = None) -> SpectrumResult:
    """Hann-windowed spectrum peaks, quadratic interpolation on |F|.

    ``threshold`` is relative to the tallest peak.  Weights are peak heights
    normalized by the window sum, so a pure mode of amplitude w reads ~ w.
    """
    K, dt = series.K, series.dt
    if K < 64:
        raise DomainError("fft_peaks needs K >= 64")
    bound = series.e_bound if e_max is None else e_max
    if bound is not None and bound * dt > math.pi:
        raise NumericError(f"undersampled: max |E| dt = {bound * dt:.4g} > pi")
    w = np.hanning(K)
    F = np.fft.ifft(series.values * w) * K / w.sum()  # sum_k x_k e^{+i omega t_k}
    F = np.fft.fftshift(F)
    omega = np.fft.fftshift(np.fft.fftfreq(K, d=dt)) * 2 * math.pi
    res = 2 * math.pi / (K * dt)
    mag = np.abs(F)
    top = mag.max()
    peaks = []
    for i in range(1, K - 1):
        if mag[i] >= mag[i - 1] and mag[i] > mag[i + 1] and mag[i] >= threshold * top:
            a, b, c = mag[i - 1], mag[i], mag[i + 1]
            den = a - 2 * b + c
            off = 0.5 * (a - c) / den if den != 0 else 0.0
            height = b - 0.25 * (a - c) * off
            peaks.append((omega[i] + off * res, height))
    peaks.sort(key=lambda p: (-p[1], p[0]))
    return SpectrumResult(
        eigenvalues=np.array([p[0] for p in peaks]),
        method="fourier",
        resolution=res,
        weights=np.array([p[1] for p in peaks]),
    )


# --------------------------------------------------------------------------
# Wilson loops

_FLIP = {1: 2, 2: 1}


def _leg_op(group: str, ops: dict, a: int, b: int, back: bool):
    """Operator carrying a loop index from a to b across one leg, with its sign."""
    if group == "su2":
        if not back:
            return 1.0, ops[f"V{a}{b}"]
        # (U^dag)_{ab} = (-1)^{a-b} U_{b-bar a-bar}
        return (-1.0 if a != b else 1.0), ops[f"V{_FLIP[b]}{_FLIP[a]}"]
    name = f"V{b}{a}"
    if not back:
        return 1.0, ops[f"V{a}{b}"]
    key = name + "^dag"
    if key not in ops:
        ops[key] = ops[name].dagger(key)
    return 1.0, ops[key]


def wilson_loop_operator(contour: Contour, group: str, cutoff: tuple, block: str = "W") -> list:
    """Traced product of link operators around the loop, as a list of terms."""
    ops = group_ops(group, cutoff)
    legs = contour.legs
    if group == "u1":
        f = tuple((l, ops["Lminus"] if back else ops["Lplus"]) for l, back in legs)
        return [HamiltonianTerm(1.0, f, block, "wilson")]
    if group not in ("su2", "su3"):
        raise ConfigError(f"unknown group {group!r}")
    idx = (1, 2) if group == "su2" else (1, 2, 3)
    n = len(legs)
    out = []
    for assign in np.ndindex(*([len(idx)] * n)):
        ms = [idx[i] for i in assign]
        coef = 1.0
        f = []
        for i, (l, back) in enumerate(legs):
            s, op = _leg_op(group, ops, ms[i], ms[(i + 1) % n], back)
            coef *= s
            f.append((l, op))
        out.append(HamiltonianTerm(coef, tuple(f), block, "wilson"))
    return out


def hermitized(terms: Sequence[HamiltonianTerm]) -> list:
    """W + W^dag term list (factor-wise adjoints)."""
    out = list(terms)
    for t in terms:
        out.append(HamiltonianTerm(np.conj(t.coefficient),
                                   tuple((l, op.dagger(op.name + "^dag")) for l, op in t.factors),
                                   t.block, t.kind))
    return out


def wilson_matrix(terms: Sequence[HamiltonianTerm], basis: GlobalBasis, strict: bool = False) -> sp.csr_matrix:
    return sum_matrix(terms, basis, strict=strict)


def wilson_expectation(psi, terms: Sequence[HamiltonianTerm], basis: GlobalBasis) -> complex:
    """<psi|W|psi>; components W moves outside ``basis`` drop out of the overlap."""
    v = np.asarray(getattr(psi, "amplitudes", psi), dtype=complex)
    return complex(np.vdot(v, wilson_matrix(terms, basis) @ v))


def compile_wilson_evolution(terms: Sequence[HamiltonianTerm], links: Sequence[LinkId], space,
                             enc: Encoding, steps: int = 1, t: float = 1.0,
                             D: Optional[int] = None) -> Circuit:
    """Circuit for exp(-i t W) with W Hermitian (pass a hermitized term list)."""
    li = {l: i for i, l in enumerate(links)}
    D = enc.qubits_per_register(space) if D is None else D
    blocks = block_sums(terms, enc, li, space, D)
    n = len(links) * space.n_registers * D
    return trotterize(blocks, t, steps, n)
