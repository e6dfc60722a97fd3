from __future__ import annotations

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, strategies as st
from scipy.linalg import expm

import oracles
from gaugeforge.errors import CapacityError, DomainError
from gaugeforge.pauli import PauliSum
from gaugeforge.simulator import (
    EncodedSubspace,
    StateVector,
    apply_circuit,
    apply_exp_pauli,
    apply_gate_array,
    apply_link_operator,
    evolve_exact,
    exact_diagonalize,
    expectation,
    pauli_apply,
    trotter_step_matrix,
)
from gaugeforge.trotter_compiler import Circuit, Gate, circuit_matrix, gate_matrix, trotterize

N = 4


def _embed(gate, n):
    """Dense n-qubit matrix of a gate via explicit index bookkeeping (qubit q = bit q)."""
    K = gate_matrix(gate)
    qs = gate.qubits
    M = np.zeros((1 << n, 1 << n), complex)
    for col in range(1 << n):
        sub_in = 0
        for q in qs:
            sub_in = (sub_in << 1) | ((col >> q) & 1)  # first listed qubit is the high index
        for sub_out in range(1 << len(qs)):
            row = col
            for k, q in enumerate(qs):
                bit = (sub_out >> (len(qs) - 1 - k)) & 1
                row = (row & ~(1 << q)) | (bit << q)
            M[row, col] += K[sub_out, sub_in]
    return M


gates = st.one_of(
    st.builds(lambda q, t, a: Gate.r1(q, t, a), st.integers(0, N - 1), st.floats(-3, 3), st.sampled_from("xyz")),
    st.builds(lambda p, t: Gate.r2(p[0], p[1], t),
              st.lists(st.integers(0, N - 1), min_size=2, max_size=2, unique=True), st.floats(-3, 3)),
    st.builds(lambda p: Gate.swap(p[0], p[1]),
              st.lists(st.integers(0, N - 1), min_size=2, max_size=2, unique=True)),
)


@given(gates)
def test_gate_application_matches_embedding(g):
    rng = np.random.default_rng(0)
    v = rng.normal(size=1 << N) + 1j * rng.normal(size=1 << N)
    assert np.allclose(apply_gate_array(v, g, N), _embed(g, N) @ v)
    cols = np.stack([v, v[::-1]], axis=1)
    assert np.allclose(apply_gate_array(cols, g, N), _embed(g, N) @ cols)


def test_apply_circuit_matches_matrix():
    rng = np.random.default_rng(3)
    gs = [Gate.r1(int(rng.integers(N)), float(rng.normal()), "xyz"[i % 3]) for i in range(10)]
    gs += [Gate.r2(0, 3, 0.4), Gate.swap(1, 2)]
    c = Circuit(N, gs, repeat=3, global_phase=0.2)
    v = StateVector.zero_qubits(N)
    out = apply_circuit(v, c)
    assert np.allclose(out.amplitudes, circuit_matrix(c)[:, 0])
    assert out.norm == pytest.approx(1.0)


def test_gate_errors():
    with pytest.raises(DomainError):
        apply_gate_array(np.zeros(4, complex), Gate.r1(2, 0.1, "x"), 2)
    with pytest.raises(CapacityError):
        StateVector.zero_qubits(40)
    with pytest.raises(DomainError):
        StateVector(np.zeros(2), basis="weird")


def _herm(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (A + A.conj().T) / 2


def test_exact_diagonalize_dense_and_sparse():
    H = _herm(40, 1)
    w = np.linalg.eigvalsh(H)
    r = exact_diagonalize(H, k=3)
    assert np.allclose(r.eigenvalues, w[:3])
    # same matrix through the sparse path
    rs = exact_diagonalize(sp.csr_matrix(H), k=3, dense_limit=10)
    assert np.allclose(rs.eigenvalues, w[:3], atol=1e-8)
    assert r.method == "oracle" and r.residual < 1e-8 and r.to_dict()["eigenvalues"][0] == pytest.approx(w[0])


def test_evolve_exact_matches_expm():
    H = _herm(30, 2)
    psi = np.eye(30)[0].astype(complex)
    ts = np.array([0.0, 0.3, 1.1])
    out = evolve_exact(psi, H, ts)
    for row, t in zip(out, ts):
        assert np.allclose(row, expm(-1j * H * t) @ psi)
    sparse = evolve_exact(psi, sp.csr_matrix(H), 1.1, dense_limit=5)
    assert np.allclose(sparse, out[2])


def test_expectation_and_link_operator():
    H = _herm(6, 4)
    v = np.arange(6) + 1j
    assert expectation(v, H) == pytest.approx(np.vdot(v, H @ v))
    op = np.array([[0, 1, 0], [0, 0, 1], [0, 0, 0]], float)
    s = StateVector(np.arange(6, dtype=complex), "link")
    out = apply_link_operator(s, 1, op, [2, 3])
    assert np.allclose(out.amplitudes, np.kron(np.eye(2), op) @ s.amplitudes)
    with pytest.raises(DomainError):
        apply_link_operator(s, 0, op, [3, 3])


@given(st.integers(0, 15), st.integers(0, 15), st.floats(-2, 2))
def test_pauli_actions(x, z, th):
    word = "".join("IXZY"[((x >> q) & 1) | (((z >> q) & 1) << 1)] for q in range(N))
    P = oracles.pauli_matrix(word)
    v = np.random.default_rng(x * 16 + z).normal(size=1 << N).astype(complex)
    assert np.allclose(pauli_apply((x, z), v), P @ v)
    assert np.allclose(apply_exp_pauli(v, (x, z), th), expm(-1j * th * P) @ v)


def test_encoded_subspace_closure():
    sub = EncodedSubspace([0b0001], [0b0011, 0b0110, 0b0101])
    # x-masks span a 2-dim space, so the orbit of one code has 4 states
    assert sub.dim == 4
    assert set(sub.basis ^ 0b0011) == set(sub.basis)
    with pytest.raises(CapacityError):
        EncodedSubspace([0], [1, 2, 4, 8], cap=8)


def test_trotter_step_matrix_matches_circuit():
    ps = PauliSum({(0, 0b011): 0.4, (0b110, 0): -0.7, (0b101, 0b100): 0.3, (0, 0): 0.9})
    blocks = [("a", ps)]
    sub = EncodedSubspace(range(8), [])
    U = trotter_step_matrix(blocks, 0.3, sub)
    assert np.allclose(U, circuit_matrix(trotterize(blocks, 0.3, 1, 3)), atol=1e-12)
    # restricted to a closed orbit it is the corresponding block
    orbit = EncodedSubspace([0b001], [0b110, 0b101])
    Ur = trotter_step_matrix(blocks, 0.3, orbit)
    idx = orbit.basis
    assert np.allclose(Ur, U[np.ix_(idx, idx)], atol=1e-12)
