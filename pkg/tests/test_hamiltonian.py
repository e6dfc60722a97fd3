from __future__ import annotations

import numpy as np
import pytest
import scipy.sparse.linalg as sla
from hypothesis import given, strategies as st

import oracles
from gaugeforge.errors import CapacityError, ConfigError, DomainError
from gaugeforge.hamiltonian import (
    GlobalBasis,
    HamiltonianSpec,
    HamiltonianTerm,
    apply_term,
    assemble_sparse,
    build_hamiltonian,
    build_Z_su3,
    group_ops,
    sector_basis,
    sum_matrix,
    term_matrix,
    terms_to_json,
)
from gaugeforge.lattice_topology import LatticeSpec, enumerate_links, enumerate_plaquettes
from gaugeforge.link_registers import Cutoffs
from gaugeforge.su_algebra import HalfInt

PLAQ = LatticeSpec(2, (2, 2), "open")


def spec(group="u1", x=1.0, lat=PLAQ, **cut):
    return HamiltonianSpec(group, x, Cutoffs(**cut), lat)


@given(st.lists(st.integers(1, 6), min_size=1, max_size=6), st.data())
def test_basis_keys_roundtrip(dims, data):
    gb = GlobalBasis(list(range(len(dims))), dims)
    digits = tuple(data.draw(st.integers(0, d - 1)) for d in dims)
    k = gb.key_of(digits)
    assert 0 <= k < gb.total and gb.digits(k) == digits
    assert gb.strides[-1] == 1  # link 0 most significant


def test_term_structure():
    for group, cut, per_plaq in (("u1", {"l_max": 1}, 2), ("su2", {"j_max": HalfInt(1)}, 16),
                                 ("su3", {"p_max": 1, "q_max": 1}, 162)):
        s = spec(group, **cut)
        terms = build_hamiltonian(s)
        kinds = [t.kind for t in terms]
        assert kinds.count("electric") == 4
        assert kinds.count("plaquette") == per_plaq
        s0 = spec(group, 0.0, **cut)
        assert all(t.kind == "electric" for t in build_hamiltonian(s0))


def test_terms_json():
    js = terms_to_json(build_hamiltonian(spec(l_max=1)))
    assert js[0]["kind"] == "electric" and js[0]["operators"] == ["E2"]
    assert js[-1]["coefficient"] == -1.0 and len(js[-1]["links"]) == 4


def test_term_rejects_repeated_link():
    ops = group_ops("u1", (1,))
    l = enumerate_links(PLAQ)[0]
    with pytest.raises(DomainError):
        HamiltonianTerm(1.0, ((l, ops["E2"]), (l, ops["E2"])))


def test_apply_term_matches_matrix():
    s = spec(l_max=2)
    H = assemble_sparse(s)
    rng = np.random.default_rng(0)
    v = rng.normal(size=H.dimension) + 1j * rng.normal(size=H.dimension)
    keys = H.basis.all_keys()
    total = np.zeros(H.dimension, complex)
    for t in build_hamiltonian(s):
        k, a, src = apply_term(t, H.basis, keys, v)
        np.add.at(total, H.basis.index_of(k), a)
        assert term_matrix(t, H.basis).shape == (H.dimension, H.dimension)
    assert np.allclose(total, H.matrix @ v)


@pytest.mark.parametrize("ext,bc", [((2, 2), "periodic"), ((3, 2), "open")])
def test_u1_lattice_matches_kron_oracle(ext, bc):
    lat = LatticeSpec(2, ext, bc)
    H = assemble_sparse(spec(l_max=1, x=0.7, lat=lat), basis="full").matrix
    ref = oracles.u1_lattice_sparse(ext, bc == "periodic", 1, 0.7)
    w = np.sort(sla.eigsh(H, k=4, which="SA")[0])
    w_ref = np.sort(sla.eigsh(ref, k=4, which="SA")[0])
    assert np.allclose(w, w_ref, atol=1e-9)
    # traces of H and H^2 are basis-order invariant
    assert H.diagonal().sum() == pytest.approx(ref.diagonal().sum())
    assert (H @ H).diagonal().sum() == pytest.approx((ref @ ref).diagonal().sum())


def test_sector_is_closed_and_holds_ground_state():
    s = spec(l_max=1, x=1.2, lat=LatticeSpec(2, (3, 2), "open"))
    full = assemble_sparse(s, basis="full")
    sec = assemble_sparse(s, basis="sector")
    assert sec.dimension < full.dimension
    e_full = sla.eigsh(full.matrix, k=1, which="SA")[0][0]
    e_sec = np.linalg.eigvalsh(sec.matrix.toarray())[0]
    assert e_sec == pytest.approx(e_full, abs=1e-9)
    # strict assembly succeeds only if every term maps the sector into itself
    sum_matrix(build_hamiltonian(s), sec.basis, strict=True)


def test_sector_for_zero_coupling_is_coupling_independent():
    a = assemble_sparse(spec(l_max=1, x=0.0), basis="sector")
    b = assemble_sparse(spec(l_max=1, x=1.0), basis="sector")
    assert np.array_equal(a.basis.keys, b.basis.keys)
    assert np.allclose(a.matrix.toarray(), np.diag(a.matrix.diagonal()))


def test_basis_leak_is_detected():
    s = spec(l_max=1)
    terms = build_hamiltonian(s)
    gb = GlobalBasis(enumerate_links(PLAQ), [3] * 4, np.array([0], dtype=np.int64))
    with pytest.raises(DomainError):
        sum_matrix(terms, gb, strict=True)


def test_su3_conjugate_plaquette_is_adjoint():
    s = spec("su3", p_max=1, q_max=1)
    ops = group_ops("su3", s.cutoff)
    (p,) = enumerate_plaquettes(PLAQ)
    z, zd = build_Z_su3(p, ops)
    gb = sector_basis(z + zd, enumerate_links(PLAQ), [s.space.dim] * 4)
    Z = sum_matrix(z, gb, strict=False)
    Zd = sum_matrix(zd, gb, strict=False)
    D = Zd - Z.conj().T
    assert (np.abs(D.data).max() if D.nnz else 0.0) < 1e-12


def test_capacity_and_config_errors():
    with pytest.raises(CapacityError):
        assemble_sparse(spec("su2", j_max=HalfInt(2)), basis="full", cap=1000)
    with pytest.raises(ConfigError):
        assemble_sparse(spec(l_max=1), basis="nope")
    with pytest.raises(ConfigError):
        spec("u1", x=-1.0, l_max=1)
    with pytest.raises(ConfigError):
        spec("u2", l_max=1)


def test_vacuum_is_electric_ground_state():
    H = assemble_sparse(spec("su2", x=0.0, j_max=HalfInt(1)), basis="sector")
    v = H.vacuum()
    assert np.vdot(v, H.matrix @ v).real == 0.0
    assert H.matrix.diagonal().min() == 0.0
