"""Lattice geometry, plaquettes with their oriented legs, and qubit layouts."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import ConfigError, DomainError

__all__ = [
    "LatticeSpec",
    "LinkId",
    "PlaquetteId",
    "LayoutModel",
    "enumerate_sites",
    "enumerate_links",
    "enumerate_plaquettes",
    "shift_site",
    "route_distance",
    "build_layout",
    "rectangular_contour",
]


@dataclass(frozen=True)
class LatticeSpec:
    d: int
    extents: tuple
    boundary: str = "periodic"

    def __post_init__(self):
        object.__setattr__(self, "extents", tuple(int(e) for e in self.extents))
        if self.d < 1 or len(self.extents) != self.d:
            raise ConfigError(f"lattice.extents must list {self.d} sizes, got {self.extents}")
        if any(e < 1 for e in self.extents):
            raise ConfigError("lattice.extents must be positive")
        if self.boundary not in ("periodic", "open"):
            raise ConfigError(f"lattice.boundary must be periodic or open, got {self.boundary!r}")

    @property
    def n_sites(self) -> int:
        n = 1
        for e in self.extents:
            n *= e
        return n

    @property
    def periodic(self) -> bool:
        return self.boundary == "periodic"


@dataclass(frozen=True, order=True)
class LinkId:
    site: tuple
    mu: int  # 1-based direction

    def __str__(self):
        return f"({','.join(map(str, self.site))};{self.mu})"


@dataclass(frozen=True)
class PlaquetteId:
    site: tuple
    mu: int
    nu: int
    legs: tuple = field(compare=False)  # ((LinkId, dagger_flag), ...) in Fig. 1 order

    @property
    def links(self) -> tuple:
        return tuple(l for l, _ in self.legs)


def enumerate_sites(spec: LatticeSpec) -> list[tuple]:
    # row-major: first coordinate varies slowest
    return list(itertools.product(*(range(e) for e in spec.extents)))


def shift_site(r: Sequence[int], mu: int, spec: LatticeSpec, step: int = 1) -> Optional[tuple]:
    """r + step * mu-hat; None when an open boundary is crossed."""
    if not 1 <= mu <= spec.d:
        raise DomainError(f"direction {mu} outside 1..{spec.d}")
    r = list(r)
    i = mu - 1
    v = r[i] + step
    if spec.periodic:
        v %= spec.extents[i]
    elif not 0 <= v < spec.extents[i]:
        return None
    r[i] = v
    return tuple(r)


def enumerate_links(spec: LatticeSpec) -> list[LinkId]:
    out = []
    for r in enumerate_sites(spec):
        for mu in range(1, spec.d + 1):
            if shift_site(r, mu, spec) is not None:
                out.append(LinkId(r, mu))
    return out


def enumerate_plaquettes(spec: LatticeSpec) -> list[PlaquetteId]:
    out = []
    if spec.d < 2:
        return out
    for r in enumerate_sites(spec):
        for mu in range(1, spec.d + 1):
            for nu in range(mu + 1, spec.d + 1):
                r_mu = shift_site(r, mu, spec)
                r_nu = shift_site(r, nu, spec)
                if r_mu is None or r_nu is None:
                    continue
                if shift_site(r_mu, nu, spec) is None:
                    continue
                legs = (
                    (LinkId(r, mu), False),
                    (LinkId(r_mu, nu), False),
                    (LinkId(r_nu, mu), True),
                    (LinkId(r, nu), True),
                )
                out.append(PlaquetteId(r, mu, nu, legs))
    return out


def rectangular_contour(spec: LatticeSpec, r, mu: int, nu: int, a: int, b: int) -> tuple:
    """Closed a x b loop: a steps along mu, b along nu, then back."""
    legs = []
    cur = tuple(r)

    def step(direction, forward):
        nonlocal cur
        if forward:
            nxt = shift_site(cur, direction, spec)
            if nxt is None:
                raise DomainError("contour leaves the lattice")
            legs.append((LinkId(cur, direction), False))
            cur = nxt
        else:
            prv = shift_site(cur, direction, spec, -1)
            if prv is None:
                raise DomainError("contour leaves the lattice")
            legs.append((LinkId(prv, direction), True))
            cur = prv

    for _ in range(a):
        step(mu, True)
    for _ in range(b):
        step(nu, True)
    for _ in range(a):
        step(mu, False)
    for _ in range(b):
        step(nu, False)
    return tuple(legs)


# --------------------------------------------------------------------------
# layouts

def _fold(x: int, n: int) -> int:
    """Interleave 0, n-1, 1, n-2, ... so that periodic neighbours stay close."""
    return 2 * x if 2 * x < n else 2 * (n - 1 - x) + 1


@dataclass
class LayoutModel:
    """Physical position of every logical qubit.

    Logical qubit numbering is link-major: ``link * regs * D + slot * D + k``.
    """

    kind: str
    n_links: int
    regs: int
    D: int
    positions: list  # index -> tuple position
    shape: tuple

    @property
    def n_qubits(self) -> int:
        return len(self.positions)

    def distance(self, a: int, b: int) -> int:
        pa, pb = self.positions[a], self.positions[b]
        return sum(abs(x - y) for x, y in zip(pa, pb))

    def sort_key(self, q: int):
        return self.positions[q]

    def phys_index(self, pos: tuple) -> int:
        idx = 0
        for x, n in zip(pos, self.shape):
            idx = idx * n + x
        return idx

    @property
    def n_phys(self) -> int:
        n = 1
        for s in self.shape:
            n *= s
        return n

    def assignment(self, links: Sequence[LinkId]) -> dict:
        out = {}
        for li, link in enumerate(links):
            for s in range(self.regs):
                for k in range(self.D):
                    out[(link, s, k)] = self.positions[(li * self.regs + s) * self.D + k]
        return out


def build_layout(spec: LatticeSpec, kind: str, regs: int, D: int) -> LayoutModel:
    links = enumerate_links(spec)
    nl = len(links)
    w = regs * D
    positions = []
    if kind == "local":
        d = spec.d
        ext = spec.extents
        fold = [spec.periodic and e > 2 for e in ext]
        if d == 1:
            shape = (ext[0] * w,)
        else:
            shape = (ext[0] * w, ext[1] * d) + tuple(ext[2:])
        for link in links:
            x = [(_fold(c, e) if f else c) for c, e, f in zip(link.site, ext, fold)]
            for s in range(regs):
                for k in range(D):
                    col = x[0] * w + s * D + k
                    if d == 1:
                        positions.append((col,))
                    else:
                        positions.append((col, x[1] * d + link.mu - 1) + tuple(x[2:]))
    elif kind == "linear_chain":
        # qubit-major order: equal (slot, k) sit together, so a link's own
        # qubits are n_links apart and every multi-qubit term spans O(M)
        shape = (nl * w,)
        for li in range(nl):
            for s in range(regs):
                for k in range(D):
                    positions.append(((s * D + k) * nl + li,))
    else:
        raise ConfigError(f"layout must be local or linear_chain, got {kind!r}")
    return LayoutModel(kind, nl, regs, D, positions, shape)


def route_distance(a, b, layout: LayoutModel) -> int:
    """Nearest-neighbour swaps needed to make qubits a and b adjacent."""
    if a == b:
        return 0
    return max(layout.distance(a, b) - 1, 0)
