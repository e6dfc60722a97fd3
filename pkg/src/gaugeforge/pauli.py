"""Weighted Pauli strings stored as (x-mask, z-mask) bit pairs.

A key ``(x, z)`` denotes ``i^{|x & z|} X^x Z^z`` so that a qubit with both bits
set carries Y.  Qubit ``q`` is bit ``q`` (little-endian).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Tuple

import numpy as np

from .errors import CapacityError, DomainError

Key = Tuple[int, int]

__all__ = [
    "PauliString",
    "PauliSum",
    "popcount",
    "key_from_letters",
    "letters_of",
    "matrix_to_pauli",
]

I_PHASE = (1, 1j, -1, -1j)


def popcount(v: int) -> int:
    return bin(v).count("1")


def key_from_letters(factors: Mapping[int, str]) -> Key:
    x = z = 0
    for q, a in factors.items():
        a = a.upper()
        if a in ("X", "Y"):
            x |= 1 << q
        if a in ("Z", "Y"):
            z |= 1 << q
        if a not in ("X", "Y", "Z"):
            raise DomainError(f"unknown Pauli letter {a!r}")
    return x, z


def letters_of(key: Key) -> Dict[int, str]:
    x, z = key
    out = {}
    m = x | z
    q = 0
    while m:
        if m & 1:
            bx, bz = (x >> q) & 1, (z >> q) & 1
            out[q] = "Y" if bx and bz else ("X" if bx else "Z")
        m >>= 1
        q += 1
    return out


def _mul_keys(k1: Key, k2: Key) -> Tuple[complex, Key]:
    x1, z1 = k1
    x2, z2 = k2
    x3, z3 = x1 ^ x2, z1 ^ z2
    e = popcount(x1 & z1) + popcount(x2 & z2) - popcount(x3 & z3) + 2 * popcount(z1 & x2)
    return I_PHASE[e % 4], (x3, z3)


@dataclass(frozen=True)
class PauliString:
    weight: complex
    factors: tuple  # sorted ((qubit, letter), ...)

    @classmethod
    def from_key(cls, key: Key, weight: complex = 1.0) -> "PauliString":
        return cls(complex(weight), tuple(sorted(letters_of(key).items())))

    @property
    def key(self) -> Key:
        return key_from_letters(dict(self.factors))

    @property
    def qubits(self) -> tuple:
        return tuple(q for q, _ in self.factors)

    def __str__(self):
        body = " ".join(f"{a}{q}" for q, a in self.factors) or "I"
        return f"({self.weight.real:+.6g}{self.weight.imag:+.6g}j) {body}"


class PauliSum:
    """Sparse linear combination of Pauli strings."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Key, complex] | None = None):
        self.terms: Dict[Key, complex] = dict(terms) if terms else {}

    # construction helpers
    @classmethod
    def identity(cls, w: complex = 1.0) -> "PauliSum":
        return cls({(0, 0): complex(w)})

    @classmethod
    def single(cls, q: int, letter: str, w: complex = 1.0) -> "PauliSum":
        return cls({key_from_letters({q: letter}): complex(w)})

    @classmethod
    def sigma_plus(cls, q: int) -> "PauliSum":
        # |0><1| with |0> the up state
        b = 1 << q
        return cls({(b, 0): 0.5, (b, b): 0.5j})

    @classmethod
    def sigma_minus(cls, q: int) -> "PauliSum":
        b = 1 << q
        return cls({(b, 0): 0.5, (b, b): -0.5j})

    @classmethod
    def proj(cls, q: int, bit: int) -> "PauliSum":
        b = 1 << q
        return cls({(0, 0): 0.5, (0, b): 0.5 if bit == 0 else -0.5})

    @classmethod
    def unit(cls, q: int, row_bit: int, col_bit: int) -> "PauliSum":
        """|row><col| on qubit q."""
        if row_bit == col_bit:
            return cls.proj(q, row_bit)
        return cls.sigma_plus(q) if row_bit == 0 else cls.sigma_minus(q)

    # algebra
    def copy(self) -> "PauliSum":
        return PauliSum(self.terms)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def __add__(self, other: "PauliSum") -> "PauliSum":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return PauliSum(out)

    def add_inplace(self, other: "PauliSum", scale: complex = 1.0) -> None:
        t = self.terms
        for k, v in other.terms.items():
            t[k] = t.get(k, 0) + scale * v

    def scale(self, c: complex) -> "PauliSum":
        return PauliSum({k: c * v for k, v in self.terms.items()})

    def __mul__(self, other: "PauliSum") -> "PauliSum":
        out: Dict[Key, complex] = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                ph, k3 = _mul_keys(k1, k2)
                out[k3] = out.get(k3, 0) + ph * v1 * v2
        return PauliSum(out)

    def mul_disjoint(self, other: "PauliSum", cap: int | None = None) -> "PauliSum":
        """Product of sums acting on disjoint qubit sets (no phases arise)."""
        if cap is not None and len(self) * len(other) > cap:
            raise CapacityError(f"Pauli expansion of {len(self) * len(other)} strings exceeds cap {cap}")
        out: Dict[Key, complex] = {}
        for (x1, z1), v1 in self.terms.items():
            for (x2, z2), v2 in other.terms.items():
                k = (x1 | x2, z1 | z2)
                out[k] = out.get(k, 0) + v1 * v2
        return PauliSum(out)

    def dagger(self) -> "PauliSum":
        return PauliSum({k: np.conj(v) for k, v in self.terms.items()})

    def shifted(self, offset: int) -> "PauliSum":
        return PauliSum({(x << offset, z << offset): v for (x, z), v in self.terms.items()})

    def pruned(self, tol: float = 1e-14) -> "PauliSum":
        return PauliSum({k: v for k, v in self.terms.items() if abs(v) > tol})

    def strings(self) -> list[PauliString]:
        return [PauliString.from_key(k, v) for k, v in sorted(self.terms.items())]

    def support_mask(self) -> int:
        m = 0
        for x, z in self.terms:
            m |= x | z
        return m

    # action
    def apply_to_basis(self, b: int) -> Dict[int, complex]:
        out: Dict[int, complex] = {}
        for (x, z), v in self.terms.items():
            ph = I_PHASE[popcount(x & z) % 4] * (-1) ** popcount(b & z)
            t = b ^ x
            out[t] = out.get(t, 0) + v * ph
        return out

    def to_matrix(self, n: int) -> np.ndarray:
        if n > 14:
            raise CapacityError(f"dense matrix on {n} qubits refused")
        N = 1 << n
        M = np.zeros((N, N), dtype=complex)
        cols = np.arange(N)
        for (x, z), v in self.terms.items():
            bz = np.array([popcount(int(c) & z) & 1 for c in cols]) if z else np.zeros(N, int)
            ph = I_PHASE[popcount(x & z) % 4]
            M[cols ^ x, cols] += v * ph * (1 - 2 * bz)
        return M

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(np.imag(v)) <= tol for v in self.terms.values())


def matrix_to_pauli(M: np.ndarray, tol: float = 1e-14) -> PauliSum:
    """Generic expansion of a dense 2^n x 2^n matrix (Walsh-Hadamard per x)."""
    N = M.shape[0]
    n = N.bit_length() - 1
    if 1 << n != N or M.shape != (N, N):
        raise DomainError("matrix must be 2^n square")
    cols = np.arange(N)
    out = {}
    for x in range(N):
        f = M[cols ^ x, cols].astype(complex)
        if not np.any(np.abs(f) > tol):
            continue
        # Walsh-Hadamard: g[z] = sum_b (-1)^{b.z} f[b]
        g = f.copy()
        h = 1
        while h < N:
            g = g.reshape(-1, 2, h)
            a, b = g[:, 0, :].copy(), g[:, 1, :].copy()
            g[:, 0, :], g[:, 1, :] = a + b, a - b
            g = g.reshape(N)
            h *= 2
        for z in np.nonzero(np.abs(g) > tol * N)[0]:
            z = int(z)
            ph = I_PHASE[popcount(x & z) % 4]
            out[(x, z)] = g[z] / N / ph
    return PauliSum(out)
