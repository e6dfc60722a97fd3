"""Pauli lowering of Hamiltonian terms, gate synthesis, Trotter circuits and routing.

Gate conventions: ``R1(theta, n) = exp(i theta n.sigma)`` on one qubit and
``R2(omega) = exp(-i omega Z Z)`` on a pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .errors import DomainError, NumericError
from .lattice_topology import LayoutModel
from .link_registers import Encoding, LinkOperator, LinkSpace, pauli_realize
from .pauli import PauliString, PauliSum, letters_of, popcount

__all__ = [
    "Gate",
    "Circuit",
    "link_realization",
    "pauli_decompose",
    "block_sums",
    "synthesize_exp_pauli",
    "worked_example_sequence",
    "trotterize",
    "route",
    "gate_matrix",
    "circuit_matrix",
    "string_cost",
]

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_AXES = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}


@dataclass(frozen=True)
class Gate:
    kind: str  # R1 | R2 | SWAP
    qubits: tuple
    theta: float = 0.0  # R1 angle or R2 omega
    axis: tuple = (0.0, 0.0, 1.0)

    @classmethod
    def r1(cls, q: int, theta: float, axis="z") -> "Gate":
        n = _AXES[axis] if isinstance(axis, str) else tuple(float(a) for a in axis)
        return cls("R1", (int(q),), float(theta), n)

    @classmethod
    def r2(cls, a: int, b: int, omega: float) -> "Gate":
        if a == b:
            raise DomainError("two-qubit gate needs distinct qubits")
        return cls("R2", (int(a), int(b)), float(omega))

    @classmethod
    def swap(cls, a: int, b: int) -> "Gate":
        return cls("SWAP", (int(a), int(b)))

    def inverse(self) -> "Gate":
        if self.kind == "SWAP":
            return self
        return Gate(self.kind, self.qubits, -self.theta, self.axis)

    def on(self, mapping) -> "Gate":
        return Gate(self.kind, tuple(mapping[q] for q in self.qubits), self.theta, self.axis)

    def to_text(self) -> str:
        if self.kind == "R1":
            nx, ny, nz = self.axis
            return f"R1 q={self.qubits[0]} theta={self.theta:.17g} nx={nx:.17g} ny={ny:.17g} nz={nz:.17g}"
        if self.kind == "R2":
            return f"R2 q1={self.qubits[0]} q2={self.qubits[1]} omega={self.theta:.17g}"
        return f"SWAP q1={self.qubits[0]} q2={self.qubits[1]}"


def gate_matrix(g: Gate) -> np.ndarray:
    """2x2 or 4x4 kernel; for 4x4 the first listed qubit is the high index."""
    if g.kind == "R1":
        nx, ny, nz = g.axis
        ns = nx * _PAULI["X"] + ny * _PAULI["Y"] + nz * _PAULI["Z"]
        return math.cos(g.theta) * np.eye(2) + 1j * math.sin(g.theta) * ns
    if g.kind == "R2":
        ph = np.exp(-1j * g.theta * np.array([1, -1, -1, 1]))
        return np.diag(ph)
    return np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


@dataclass
class Circuit:
    n_qubits: int
    gates: list = field(default_factory=list)
    steps: int = 1
    time: float = 0.0
    layout: str = "logical"
    global_phase: float = 0.0  # overall factor exp(-i * global_phase)
    repeat: int = 1  # ``gates`` is applied this many times in sequence

    def counts(self) -> dict:
        out = {"R1": 0, "R2": 0, "SWAP": 0}
        for g in self.gates:
            out[g.kind] += 1
        return {k: v * self.repeat for k, v in out.items()}

    def to_text(self) -> str:
        return "".join(g.to_text() + "\n" for g in self.gates) * self.repeat

    def flat_gates(self) -> list:
        return list(self.gates) * self.repeat

    def extend(self, other: "Circuit") -> None:
        if self.repeat != 1:
            raise DomainError("cannot append to a repeated circuit")
        self.gates.extend(other.flat_gates())
        self.global_phase += other.global_phase


# --------------------------------------------------------------------------
# Pauli lowering

_REAL_CACHE: Dict[tuple, tuple] = {}


def link_realization(op: LinkOperator, enc: Encoding, D: int) -> PauliSum:
    key = (id(op), enc.kind, D)
    hit = _REAL_CACHE.get(key)
    if hit is None or hit[0] is not op:
        hit = _REAL_CACHE[key] = (op, pauli_realize(op, enc, D=D))
    return hit[1]


def pauli_decompose(term, enc: Encoding, link_index: dict, space: LinkSpace,
                    D: Optional[int] = None, cap: Optional[int] = 5_000_000) -> PauliSum:
    """Tensor expansion of coefficient * (link factors) on logical qubits.

    Logical qubit of (link, slot, k) is ``link_index[link] * regs * D + slot * D + k``.
    """
    D = enc.qubits_per_register(space) if D is None else D
    w = space.n_registers * D
    out = PauliSum.identity(term.coefficient)
    for link, op in term.factors:
        ps = link_realization(op, enc, D).shifted(link_index[link] * w)
        out = out.mul_disjoint(ps, cap=cap)
    return out.pruned()


def block_sums(terms, enc: Encoding, link_index: dict, space: LinkSpace,
               D: Optional[int] = None, tol: float = 1e-10) -> list:
    """Hermitian Pauli sums per block, in first-appearance order of the blocks."""
    order: list = []
    acc: Dict[str, PauliSum] = {}
    for t in terms:
        if t.block not in acc:
            order.append(t.block)
            acc[t.block] = PauliSum()
        acc[t.block].add_inplace(pauli_decompose(t, enc, link_index, space, D))
    out = []
    for b in order:
        ps = acc[b].pruned(1e-13)
        worst = max((abs(v.imag) for v in ps.terms.values()), default=0.0)
        if worst > tol:
            raise NumericError(f"block {b} is not Hermitian (imaginary weight {worst:.3e})")
        out.append((b, PauliSum({k: complex(v.real) for k, v in ps.terms.items() if abs(v.real) > 1e-13})))
    return out


# --------------------------------------------------------------------------
# synthesis

def _conj_letter(g: Gate, a: str) -> tuple:
    U = gate_matrix(g)
    M = U @ _PAULI[a] @ U.conj().T
    for b in "XYZ":
        s = np.trace(_PAULI[b] @ M).real / 2
        if abs(abs(s) - 1) < 1e-9:
            return (1 if s > 0 else -1), b
    raise NumericError("basis change did not map a Pauli to a Pauli")


def _conj_pair(g: Gate, a: str, b: str) -> tuple:
    U = gate_matrix(g)
    M = U @ np.kron(_PAULI[a], _PAULI[b]) @ U.conj().T
    for c in "IXYZ":
        for d in "IXYZ":
            s = np.trace(np.kron(_PAULI[c], _PAULI[d]).conj().T @ M).real / 4
            if abs(abs(s) - 1) < 1e-9:
                return (1 if s > 0 else -1), c, d
    raise NumericError("entangler did not map a Pauli pair to a Pauli pair")


def _basis_change(letter: str, q: int) -> Optional[Gate]:
    if letter == "X":
        return Gate.r1(q, math.pi / 4, "y")
    if letter == "Y":
        return Gate.r1(q, -math.pi / 4, "x")
    return None


def synthesize_exp_pauli(s, angle: float) -> list:
    """Gates (time order) realizing exp(-i * angle * P) for a Pauli string P.

    ``s`` is a PauliString (its real weight multiplies the angle) or an
    (x, z) key.  X/Y factors are rotated to Z in descending qubit order; for
    three or more factors a ladder strips one Z per pair so that the angle
    lands on a single R1 at the last qubit.
    """
    if isinstance(s, PauliString):
        if abs(s.weight.imag) > 1e-12:
            raise DomainError("exponent needs a real string weight")
        angle = angle * s.weight.real
        letters = dict(s.factors)
    else:
        letters = letters_of(s)
    if not letters:
        raise DomainError("identity string has no gate realization")
    qs = sorted(letters)
    sign = 1
    pre: list = []
    for q in reversed(qs):
        g = _basis_change(letters[q], q)
        if g is not None:
            sg, b = _conj_letter(g, letters[q])
            sign *= sg
            letters[q] = b
            pre.append(g)
    k = len(qs)
    if k == 1:
        core = [Gate.r1(qs[0], -angle * sign, "z")]
    elif k == 2:
        core = [Gate.r2(qs[0], qs[1], angle * sign)]
    else:
        for a, b in zip(qs, qs[1:]):
            g1 = Gate.r1(b, math.pi / 4, "x")
            s1, lb = _conj_letter(g1, "Z")
            g2 = Gate.r2(a, b, -math.pi / 4)
            s2, la, lb = _conj_pair(g2, "Z", lb)
            g3 = Gate.r1(b, math.pi / 4, "y")
            s3, lb = _conj_letter(g3, lb)
            if la != "I" or lb != "Z":
                raise NumericError("ladder step failed to strip a qubit")
            sign *= s1 * s2 * s3
            pre.extend((g1, g2, g3))
        core = [Gate.r1(qs[-1], -angle * sign, "z")]
    return pre + core + [g.inverse() for g in reversed(pre)]


def worked_example_sequence(q1: int = 0, q2: int = 1) -> list:
    """The printed five-gate sequence for exp(-i X1 Y2), read right to left."""
    return [
        Gate.r1(q2, math.pi / 4, "x"),
        Gate.r1(q1, math.pi / 4, "y"),
        Gate.r2(q1, q2, 1.0),
        Gate.r1(q1, -math.pi / 4, "y"),
        Gate.r1(q2, -math.pi / 4, "x"),
    ]


def string_cost(k: int, nxy: int, hops: int = 0) -> tuple:
    """(R1, R2, SWAP) counts of one synthesized string; hops = sum of (distance - 1)."""
    if k == 0:
        return 0, 0, 0
    if k == 1:
        return 2 * nxy + 1, 0, 0
    if k == 2:
        return 2 * nxy, 1, 2 * hops
    return 2 * nxy + 4 * (k - 1) + 1, 2 * (k - 1), 4 * hops


def trotterize(blocks: Sequence, t: float, m: int, n_qubits: int) -> Circuit:
    """m slices of prod_blocks prod_strings exp(-i w P t/m), strings in key order.

    The slice is stored once with ``repeat = m``.
    """
    if m < 1:
        raise DomainError("Trotter steps m must be >= 1")
    dt = t / m
    gates = []
    phase = 0.0
    for _, ps in blocks:
        for key in sorted(ps.terms):
            w = ps.terms[key].real
            if key == (0, 0):
                phase += w * dt
                continue
            gates.extend(synthesize_exp_pauli(key, w * dt))
    return Circuit(n_qubits, gates, m, t, global_phase=phase * m, repeat=m)


# --------------------------------------------------------------------------
# routing

def _path(a: tuple, b: tuple) -> list:
    """Grid positions from a to b, one coordinate at a time."""
    cur = list(a)
    out = [tuple(cur)]
    for i in range(len(a)):
        step = 1 if b[i] > cur[i] else -1
        while cur[i] != b[i]:
            cur[i] += step
            out.append(tuple(cur))
    return out


def route(circuit: Circuit, layout: LayoutModel) -> tuple:
    """Map logical qubits to physical sites; make every R2 adjacent by swap-in/swap-back.

    Returns (routed circuit on physical indices, report dict).  Qubits return
    to their home sites after each gate, so no final permutation remains.
    """
    phys = [layout.phys_index(p) for p in layout.positions]
    out = Circuit(layout.n_phys, [], circuit.steps, circuit.time, layout.kind, circuit.global_phase,
                  circuit.repeat)
    swaps = 0
    for g in circuit.gates:
        if g.kind != "R2":
            out.gates.append(g.on(phys))
            continue
        a, b = g.qubits
        path = _path(layout.positions[a], layout.positions[b])
        chain = [layout.phys_index(p) for p in path[:-1]]
        moves = [Gate.swap(chain[i], chain[i + 1]) for i in range(len(chain) - 1)]
        out.gates.extend(moves)
        out.gates.append(Gate.r2(chain[-1], phys[b], g.theta))
        out.gates.extend(reversed(moves))
        swaps += 2 * len(moves)
    swaps *= circuit.repeat
    rep = {"swaps": swaps, "gates_by_kind": out.counts()}
    return out, rep


# --------------------------------------------------------------------------
# dense checks (small circuits)

def circuit_matrix(circuit: Circuit, n: Optional[int] = None) -> np.ndarray:
    """Dense unitary; a repeated body is evaluated once and powered."""
    from .simulator import apply_gate_array, apply_kernel_1q

    n = circuit.n_qubits if n is None else n
    if n > 12:
        raise DomainError("dense circuit matrices are limited to 12 qubits")
    U = np.eye(1 << n, dtype=complex)
    pending: Dict[int, np.ndarray] = {}  # fused single-qubit kernels not yet applied

    def flush(qs):
        nonlocal U
        for q in qs:
            K = pending.pop(q, None)
            if K is not None:
                U = apply_kernel_1q(U, K, q, n)

    for g in circuit.gates:
        if len(g.qubits) == 1:
            q = g.qubits[0]
            K = gate_matrix(g)
            pending[q] = K @ pending[q] if q in pending else K
            continue
        flush(g.qubits)
        U = apply_gate_array(U, g, n)
    flush(list(pending))
    if circuit.repeat > 1:
        U = np.linalg.matrix_power(U, circuit.repeat)
    return U * np.exp(-1j * circuit.global_phase)
