from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gaugeforge.errors import DomainError, NumericError
from gaugeforge.gatecount import count_lattice, scaling_fit, string_table, sweep
from gaugeforge.hamiltonian import HamiltonianSpec, build_hamiltonian
from gaugeforge.lattice_topology import LatticeSpec, build_layout, enumerate_links
from gaugeforge.link_registers import Cutoffs, Encoding
from gaugeforge.pauli import PauliSum
from gaugeforge.su_algebra import HalfInt
from gaugeforge.trotter_compiler import block_sums, route, trotterize


def _routed_counts(spec, enc, kind, steps):
    idx = {l: i for i, l in enumerate(enumerate_links(spec.lattice))}
    D = enc.qubits_per_register(spec.space)
    w = D * spec.space.n_registers
    c = trotterize(block_sums(build_hamiltonian(spec), enc, idx, spec.space, D), 1.0, steps, len(idx) * w)
    routed, _ = route(c, build_layout(spec.lattice, kind, spec.space.n_registers, D))
    return routed.counts()


@pytest.mark.parametrize("kind", ["local", "linear_chain"])
@pytest.mark.parametrize("enc", ["one_hot", "binary"])
def test_exact_counts_match_routed_circuit(kind, enc):
    spec = HamiltonianSpec("u1", 1.0, Cutoffs(l_max=1), LatticeSpec(2, (2, 2), "open"))
    r = count_lattice(spec, Encoding(enc), kind, steps=2)
    assert r.exact
    assert r.gates_by_kind == _routed_counts(spec, Encoding(enc), kind, 2)


def test_exact_counts_match_routed_circuit_two_plaquettes():
    spec = HamiltonianSpec("u1", 1.0, Cutoffs(l_max=1), LatticeSpec(2, (3, 2), "open"))
    r = count_lattice(spec, Encoding("binary"), "local")
    assert r.gates_by_kind == _routed_counts(spec, Encoding("binary"), "local", 1)


@pytest.mark.parametrize("kind", ["local", "linear_chain"])
def test_bound_dominates_exact_count(kind):
    spec = HamiltonianSpec("u1", 1.0, Cutoffs(l_max=1), LatticeSpec(2, (3, 2), "open"))
    exact = count_lattice(spec, Encoding("binary"), kind)
    bound = count_lattice(spec, Encoding("binary"), kind, explicit_cap=0)
    assert not bound.exact and bound.to_dict()["count"] == "upper_bound"
    for k in ("R1", "R2", "SWAP"):
        assert bound.gates_by_kind[k] >= exact.gates_by_kind[k]


def test_su2_plaquette_falls_back_to_bound():
    spec = HamiltonianSpec("su2", 1.0, Cutoffs(j_max=HalfInt.of("1/2")), LatticeSpec(2, (2, 2), "open"))
    r = count_lattice(spec, Encoding("binary"), "local")
    assert not r.exact and r.total > 0


def test_steps_scale_linearly():
    spec = HamiltonianSpec("u1", 1.0, Cutoffs(l_max=2), LatticeSpec(2, (3, 3), "periodic"))
    a = count_lattice(spec, Encoding("binary"), "local", steps=1)
    b = count_lattice(spec, Encoding("binary"), "local", steps=5)
    assert b.gates_by_kind == {k: 5 * v for k, v in a.gates_by_kind.items()}
    assert b.strings == 5 * a.strings


def test_report_dict():
    spec = HamiltonianSpec("u1", 1.0, Cutoffs(l_max=1), LatticeSpec(2, (2, 2), "periodic"))
    d = count_lattice(spec, Encoding("one_hot"), "local").to_dict()
    assert d["count"] == "exact" and d["total_gates"] == sum(d["gates_by_kind"].values())
    assert d["qubits"] == 8 * 3 and d["swaps"] == d["gates_by_kind"]["SWAP"]


@given(st.floats(0.5, 3.0), st.floats(0.1, 100.0))
def test_scaling_fit_recovers_power(p, a):
    sizes = [4, 9, 16, 25, 36]
    assert scaling_fit(sizes, [a * s**p for s in sizes]) == pytest.approx(p, rel=1e-9)


def test_scaling_fit_errors():
    with pytest.raises(DomainError):
        scaling_fit([1, 2, 3], [1, 2, 3])
    with pytest.raises(DomainError):
        scaling_fit([1, 2, 3, 4], [1, 2, 3])
    with pytest.raises(NumericError):
        scaling_fit([1, 2, 3, 4], [1, 0, 3, 4])


def test_sweep_fits_and_records():
    r = sweep("u1", Cutoffs(l_max=1), [(2, 2), (3, 3), (4, 4), (5, 5)], Encoding("binary"), "linear_chain")
    assert [row["sites"] for row in r.sweep] == [4, 9, 16, 25]
    assert r.exponent_fit > 1.5


def test_string_table():
    ps = PauliSum({(0, 0): 1.0, (0b101, 0): 0.5, (0b010, 0b110): 0.2})
    t = string_table(ps)
    assert list(t.k) == [2, 2] and list(t.nxy) == [1, 2]  # key order: (0b010, 0b110) first
    assert np.all(t.qubits[:, :2] >= 0)
