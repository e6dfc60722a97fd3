from __future__ import annotations


import pytest
from hypothesis import given, strategies as st

from gaugeforge.errors import ConfigError, DomainError
from gaugeforge.lattice_topology import (
    LatticeSpec,
    LinkId,
    build_layout,
    enumerate_links,
    enumerate_plaquettes,
    enumerate_sites,
    rectangular_contour,
    route_distance,
    shift_site,
)

lattices = st.builds(
    lambda ext, b: LatticeSpec(len(ext), tuple(ext), b),
    st.lists(st.integers(1, 5), min_size=1, max_size=3),
    st.sampled_from(["periodic", "open"]),
)


def _ends(link, spec):
    return link.site, shift_site(link.site, link.mu, spec)


@given(lattices)
def test_link_and_plaquette_counts(spec):
    M, d = spec.n_sites, spec.d
    links = enumerate_links(spec)
    plaqs = enumerate_plaquettes(spec)
    assert len(set(links)) == len(links)
    if spec.periodic:
        assert len(links) == M * d
        assert len(plaqs) == M * d * (d - 1) // 2
    else:
        assert len(links) == sum(M // e * (e - 1) for e in spec.extents)
        n_p = 0
        for mu in range(d):
            for nu in range(mu + 1, d):
                n_p += M // (spec.extents[mu] * spec.extents[nu]) * (spec.extents[mu] - 1) * (spec.extents[nu] - 1)
        assert len(plaqs) == n_p


@given(lattices)
def test_plaquettes_close(spec):
    for p in enumerate_plaquettes(spec):
        walk = []
        for link, dag in p.legs:
            a, b = _ends(link, spec)
            walk.append((b, a) if dag else (a, b))
        for (_, end), (start, _) in zip(walk, walk[1:] + walk[:1]):
            assert end == start
        assert [dag for _, dag in p.legs] == [False, False, True, True]


def test_sites_row_major():
    spec = LatticeSpec(2, (2, 3))
    assert enumerate_sites(spec)[:4] == [(0, 0), (0, 1), (0, 2), (1, 0)]


def test_shift_wraps_or_stops():
    per = LatticeSpec(2, (3, 3), "periodic")
    opn = LatticeSpec(2, (3, 3), "open")
    assert shift_site((2, 0), 1, per) == (0, 0)
    assert shift_site((2, 0), 1, opn) is None
    assert shift_site((0, 0), 2, per, -1) == (0, 2)
    with pytest.raises(DomainError):
        shift_site((0, 0), 3, per)


def test_bad_specs():
    with pytest.raises(ConfigError):
        LatticeSpec(2, (3,))
    with pytest.raises(ConfigError):
        LatticeSpec(1, (0,))
    with pytest.raises(ConfigError):
        LatticeSpec(1, (3,), "twisted")


@given(st.integers(1, 3), st.integers(1, 3), st.sampled_from(["periodic", "open"]))
def test_rectangles_close(a, b, bc):
    spec = LatticeSpec(2, (4, 4), bc)
    legs = rectangular_contour(spec, (0, 0), 1, 2, a, b)
    assert len(legs) == 2 * (a + b)
    pos = (0, 0)
    for link, back in legs:
        s, e = _ends(link, spec)
        if back:
            s, e = e, s
        assert s == pos
        pos = e
    assert pos == (0, 0)


def test_rectangle_leaving_open_lattice():
    with pytest.raises(DomainError):
        rectangular_contour(LatticeSpec(2, (2, 2), "open"), (0, 0), 1, 2, 2, 1)


@pytest.mark.parametrize("kind", ["local", "linear_chain"])
@pytest.mark.parametrize("ext,bc", [((4, 4), "periodic"), ((3, 3), "open"), ((5,), "periodic"), ((2, 2, 2), "open")])
def test_layouts_are_injective(kind, ext, bc):
    spec = LatticeSpec(len(ext), ext, bc)
    lay = build_layout(spec, kind, 3, 2)
    n = len(enumerate_links(spec)) * 6
    assert lay.n_qubits == n
    assert len(set(lay.positions)) == n
    assert len({lay.phys_index(p) for p in lay.positions}) == n
    assert all(0 <= lay.phys_index(p) < lay.n_phys for p in lay.positions)


def test_local_layout_keeps_plaquettes_close():
    """Distances inside a plaquette do not grow with the lattice (unlike the chain)."""
    def worst(kind, L):
        spec = LatticeSpec(2, (L, L))
        lay = build_layout(spec, kind, 1, 2)
        idx = {l: i for i, l in enumerate(enumerate_links(spec))}
        far = 0
        for p in enumerate_plaquettes(spec):
            qs = [idx[l] * 2 for l in p.links]
            far = max(far, max(route_distance(a, b, lay) for a in qs for b in qs))
        return far

    assert worst("local", 4) == worst("local", 8)
    assert worst("linear_chain", 8) > 2 * worst("linear_chain", 4) - 2


def test_route_distance_adjacent_is_zero():
    lay = build_layout(LatticeSpec(1, (4,), "open"), "local", 1, 2)
    assert route_distance(0, 0, lay) == 0
    assert route_distance(0, 1, lay) == 0
    assert route_distance(0, 3, lay) == 2


def test_link_str():
    assert str(LinkId((1, 2), 2)) == "(1,2;2)"
