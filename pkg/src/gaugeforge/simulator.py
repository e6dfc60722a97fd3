"""Statevector engine over link bases or encoded qubit spaces, with the ED oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from .errors import CapacityError, DomainError, NumericError
from .pauli import I_PHASE, PauliSum, popcount

__all__ = [
    "StateVector",
    "SpectrumResult",
    "apply_gate",
    "apply_gate_array",
    "apply_circuit",
    "apply_link_operator",
    "exact_diagonalize",
    "evolve_exact",
    "expectation",
    "EncodedSubspace",
    "pauli_apply",
    "apply_exp_pauli",
    "trotter_step_matrix",
    "DEFAULT_MAX_STATE_BYTES",
]

DEFAULT_MAX_STATE_BYTES = 1 << 30


@dataclass
class StateVector:
    amplitudes: np.ndarray
    basis: str = "link"  # link | encoded
    n_qubits: Optional[int] = None

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.basis not in ("link", "encoded"):
            raise DomainError(f"unknown basis tag {self.basis!r}")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.basis, self.n_qubits)

    @classmethod
    def zero_qubits(cls, n: int, max_bytes: int = DEFAULT_MAX_STATE_BYTES) -> "StateVector":
        if 16 * (1 << n) > max_bytes:
            raise CapacityError(f"{n}-qubit state exceeds max_state_bytes={max_bytes}")
        v = np.zeros(1 << n, dtype=complex)
        v[0] = 1.0
        return cls(v, "encoded", n)


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    method: str  # oracle | fourier
    resolution: float = 0.0
    weights: Optional[np.ndarray] = None
    vectors: Optional[np.ndarray] = field(default=None, repr=False)
    residual: float = 0.0

    def to_dict(self) -> dict:
        out = {
            "eigenvalues": [float(e) for e in self.eigenvalues],
            "method": self.method,
            "resolution": float(self.resolution),
        }
        if self.weights is not None:
            out["weights"] = [float(w) for w in self.weights]
        return out


# --------------------------------------------------------------------------
# gates

def apply_kernel_1q(arr: np.ndarray, K: np.ndarray, q: int, n: int) -> np.ndarray:
    cols = 1 if arr.ndim == 1 else arr.shape[1]
    t = arr.reshape(1 << (n - 1 - q), 2, (1 << q) * cols)
    return np.matmul(K, t).reshape(arr.shape)


def apply_gate_array(arr: np.ndarray, gate, n: int) -> np.ndarray:
    """Apply a gate to a (2^n,) vector or to each column of a (2^n, c) array."""
    from .trotter_compiler import gate_matrix

    for q in gate.qubits:
        if not 0 <= q < n:
            raise DomainError(f"qubit {q} outside 0..{n - 1}")
    shape = arr.shape
    cols = 1 if arr.ndim == 1 else shape[1]
    K = gate_matrix(gate)
    if len(gate.qubits) == 1:
        q = gate.qubits[0]
        return apply_kernel_1q(arr, K, q, n)
    qa, qb = gate.qubits
    hi, lo = max(qa, qb), min(qa, qb)
    t = arr.reshape(1 << (n - 1 - hi), 2, 1 << (hi - lo - 1), 2, (1 << lo) * cols)
    K4 = K.reshape(2, 2, 2, 2)  # (a_out, b_out, a_in, b_in), a = first listed qubit
    if qa < qb:
        K4 = K4.transpose(1, 0, 3, 2)  # reindex as (hi, lo)
    if gate.kind == "R2":
        ph = np.diagonal(K).reshape(2, 2)
        out = t * ph[None, :, None, :, None]
    elif gate.kind == "SWAP":
        out = t.swapaxes(1, 3)
    else:
        out = np.einsum("abcd,icjdk->iajbk", K4, t)
    return out.reshape(shape)


def apply_gate(state: StateVector, gate) -> StateVector:
    if state.basis != "encoded":
        raise DomainError("gates act on encoded states")
    n = state.n_qubits
    return StateVector(apply_gate_array(state.amplitudes, gate, n), "encoded", n)


def apply_circuit(state: StateVector, circuit) -> StateVector:
    v = state.amplitudes
    for _ in range(circuit.repeat):
        for g in circuit.gates:
            v = apply_gate_array(v, g, state.n_qubits)
    return StateVector(v * np.exp(-1j * circuit.global_phase), "encoded", state.n_qubits)


# --------------------------------------------------------------------------
# link-basis action

def apply_link_operator(state: StateVector, link: int, op, dims: Sequence[int]) -> StateVector:
    """Act with a one-link operator on a full product-basis state (link 0 most significant)."""
    if state.basis != "link":
        raise DomainError("link operators act on link-basis states")
    dims = list(dims)
    if state.amplitudes.size != int(np.prod(dims)):
        raise DomainError("state size does not match the link dimensions")
    pre = int(np.prod(dims[:link]))
    post = int(np.prod(dims[link + 1:]))
    t = state.amplitudes.reshape(pre, dims[link], post)
    m = op.matrix if hasattr(op, "matrix") else sp.csr_matrix(op)
    out = np.empty_like(t)
    for i in range(pre):
        out[i] = m @ t[i]
    return StateVector(out.reshape(-1), "link")


def expectation(vec: np.ndarray, H) -> complex:
    v = np.asarray(vec, dtype=complex)
    Hv = H @ v
    # fixed pairwise reduction order
    return complex(np.sum(np.conj(v) * Hv))


# --------------------------------------------------------------------------
# oracle

def _matrix_of(H):
    return H.matrix if hasattr(H, "matrix") else H


def exact_diagonalize(H, k: int = 1, dense_limit: int = 3000, tol: float = 1e-8) -> SpectrumResult:
    M = _matrix_of(H)
    n = M.shape[0]
    k = min(k, n)
    if n <= dense_limit:
        w, V = np.linalg.eigh(M.toarray() if sp.issparse(M) else M)
        w, V = w[:k], V[:, :k]
    else:
        try:
            w, V = sla.eigsh(M, k=k, which="SA", tol=1e-12, maxiter=20 * n)
        except sla.ArpackNoConvergence as e:
            raise NumericError(f"eigensolver did not converge: {e}") from None
        order = np.argsort(w)
        w, V = w[order], V[:, order]
    R = M @ V - V * w
    res = float(np.max(np.linalg.norm(R, axis=0))) if k else 0.0
    if res > tol:
        raise NumericError(f"eigenpair residual {res:.3e} above {tol}")
    return SpectrumResult(np.asarray(w, dtype=float), "oracle", 0.0, None, V, res)


def evolve_exact(psi: np.ndarray, H, t, dense_limit: int = 3000) -> np.ndarray:
    """exp(-i H t) psi; ``t`` scalar or 1-D array of times (rows of the result)."""
    M = _matrix_of(H)
    psi = np.asarray(psi, dtype=complex)
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    n = M.shape[0]
    if n <= dense_limit:
        w, V = np.linalg.eigh(M.toarray() if sp.issparse(M) else M)
        c = V.conj().T @ psi
        out = (V @ (np.exp(-1j * np.outer(w, ts)) * c[:, None])).T
    else:
        A = (-1j * M).tocsc()
        out = np.array([sla.expm_multiply(A * float(s), psi) for s in ts])
    return out[0] if np.ndim(t) == 0 else out


# --------------------------------------------------------------------------
# encoded block-level simulation

def pauli_apply(ps_or_key, v: np.ndarray, idx: Optional[np.ndarray] = None, basis: Optional[np.ndarray] = None):
    """P v for a single key (x, z) on the full space, or on a subspace given by ``basis`` ints."""
    x, z = ps_or_key
    if basis is None:
        b = np.arange(v.shape[0])
        tgt = b ^ x
    else:
        b = basis
        tgt = idx
    par = _parity(b & z)
    ph = I_PHASE[popcount(x & z) % 4] * (1 - 2 * par)
    out = np.zeros_like(v)
    if v.ndim == 1:
        out[tgt] = ph * v
    else:
        out[tgt] = ph[:, None] * v
    return out


def _parity(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64).copy()
    p = np.zeros_like(a)
    while np.any(a):
        p ^= a & 1
        a >>= 1
    return p


class EncodedSubspace:
    """Span of the given codewords closed under XOR with the strings' x-masks."""

    def __init__(self, codes: Sequence[int], xmasks: Sequence[int], cap: int = 1 << 16):
        gens = []
        for m in sorted(set(int(v) for v in xmasks if v)):
            r = m
            for g in gens:
                r = min(r, r ^ g)
            if r:
                gens.append(r)
                gens.sort(reverse=True)
        states = set(int(c) for c in codes)
        for g in gens:
            states |= {s ^ g for s in states}
            if len(states) > cap:
                raise CapacityError(f"encoded subspace exceeds {cap} states")
        self.basis = np.array(sorted(states), dtype=np.int64)
        self._pos = {int(s): i for i, s in enumerate(self.basis)}

    @property
    def dim(self) -> int:
        return len(self.basis)

    def index(self, code: int) -> int:
        return self._pos[int(code)]

    def perm(self, x: int) -> np.ndarray:
        return np.searchsorted(self.basis, self.basis ^ x)


def apply_exp_pauli(v: np.ndarray, key, theta: float, sub: Optional[EncodedSubspace] = None,
                    perm: Optional[np.ndarray] = None) -> np.ndarray:
    """exp(-i theta P) v = cos(theta) v - i sin(theta) P v."""
    if sub is None:
        Pv = pauli_apply(key, v)
    else:
        Pv = pauli_apply(key, v, sub.perm(key[0]) if perm is None else perm, sub.basis)
    return math.cos(theta) * v - 1j * math.sin(theta) * Pv


def trotter_step_matrix(blocks, dt: float, sub: EncodedSubspace) -> np.ndarray:
    """Matrix of one slice prod exp(-i w P dt) (strings in key order) on the subspace."""
    U = np.eye(sub.dim, dtype=complex)
    phase = 0.0
    for _, ps in blocks:
        for key in sorted(ps.terms):
            w = ps.terms[key].real
            if key == (0, 0):
                phase += w * dt
                continue
            U = apply_exp_pauli(U, key, w * dt, sub)
    return U * np.exp(-1j * phase)
