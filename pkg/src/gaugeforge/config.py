"""Run configuration: TOML file plus flag overrides, fully validated."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

try:
    import tomllib as tomli
except ModuleNotFoundError:  # python < 3.11
    import tomli
import tomli_w

from .errors import ConfigError
from .hamiltonian import HamiltonianSpec
from .lattice_topology import LatticeSpec
from .link_registers import Cutoffs, Encoding
from .su_algebra import HalfInt

__all__ = ["RunConfig", "DEFAULTS", "parse_config", "load_toml", "apply_override", "parse_value"]

_REQ = object()  # marker for required keys

# schema: key -> default (or _REQ), with the accepted python types
SCHEMA: dict = {
    "group": (_REQ, str),
    "x": (_REQ, (int, float)),
    "encoding": ("one_hot", str),
    "layout": ("local", str),
    "seed": (0, int),
    "lattice": {
        "dimension": (None, int),
        "extents": (_REQ, list),
        "boundary": ("periodic", str),
    },
    "cutoffs": {
        "l_max": (None, int),
        "j_max": (None, (int, float, str)),
        "p_max": (None, int),
        "q_max": (None, int),
    },
    "trial": {
        "C": (None, (int, float)),  # None -> x/4
        "depth": (None, int),
    },
    "spectroscopy": {
        "mode": ("oracle", str),
        "dt": (0.05, (int, float)),
        "steps": (4096, int),
        "trotter_m": (512, int),
        "threshold": (0.05, (int, float)),
        "basis": ("sector", str),
    },
    "gatecount": {
        "steps": (1, int),
        "sweep": (None, list),  # list of extents lists
    },
    "wilson": {
        "site": (None, list),
        "mu": (1, int),
        "nu": (2, int),
        "a": (1, int),
        "b": (1, int),
        "steps": (64, int),
        "time": (1.0, (int, float)),
    },
    "simulator": {
        "max_state_bytes": (1 << 30, int),
        "dim_cap": (2_000_000, int),
    },
    "output": {
        "csv": ("", str),
        "circuit": ("", str),
    },
}

_CHOICES = {
    "group": ("u1", "su2", "su3"),
    "encoding": ("one_hot", "binary"),
    "layout": ("local", "linear_chain"),
    "lattice.boundary": ("periodic", "open"),
    "spectroscopy.mode": ("oracle", "trotter"),
    "spectroscopy.basis": ("sector", "full"),
}

_REQUIRED_CUTOFFS = {"u1": ("l_max",), "su2": ("j_max",), "su3": ("p_max", "q_max")}


def parse_half(v, path: str) -> HalfInt:
    try:
        if isinstance(v, str):
            f = Fraction(v.strip())
        elif isinstance(v, float):
            f = Fraction(v).limit_denominator(2)
            if float(f) != v:
                raise ValueError
        else:
            f = Fraction(v)
        return HalfInt.of(f)
    except (ValueError, TypeError, ZeroDivisionError):
        raise ConfigError(f"{path}: expected a non-negative half-integer, got {v!r}") from None


def _type_name(t) -> str:
    if isinstance(t, tuple):
        return " or ".join(x.__name__ for x in t)
    return t.__name__


def _fill(raw: dict, schema: dict, prefix: str) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError(f"{prefix.rstrip('.') or 'config'}: expected a table")
    for k in raw:
        if k not in schema:
            raise ConfigError(f"unknown key {prefix}{k}")
    out = {}
    for k, spec in schema.items():
        path = prefix + k
        if isinstance(spec, dict):
            out[k] = _fill(raw.get(k, {}), spec, path + ".")
            continue
        default, typ = spec
        if k not in raw:
            if default is _REQ:
                raise ConfigError(f"missing required key {path}")
            out[k] = copy.deepcopy(default)
            continue
        v = raw[k]
        ok = isinstance(v, typ) and not (isinstance(v, bool) and bool not in (typ if isinstance(typ, tuple) else (typ,)))
        if not ok:
            raise ConfigError(f"{path}: expected {_type_name(typ)}, got {type(v).__name__}")
        out[k] = v
    return out


@dataclass
class RunConfig:
    data: dict
    overrides: list = field(default_factory=list)
    source: Optional[str] = None

    # convenience views -------------------------------------------------
    @property
    def group(self) -> str:
        return self.data["group"]

    @property
    def x(self) -> float:
        return float(self.data["x"])

    @property
    def lattice(self) -> LatticeSpec:
        lat = self.data["lattice"]
        return LatticeSpec(lat["dimension"], tuple(lat["extents"]), lat["boundary"])

    @property
    def cutoffs(self) -> Cutoffs:
        c = self.data["cutoffs"]
        j = parse_half(c["j_max"], "cutoffs.j_max") if c["j_max"] is not None else None
        return Cutoffs(l_max=c["l_max"], j_max=j, p_max=c["p_max"], q_max=c["q_max"])

    @property
    def encoding(self) -> Encoding:
        return Encoding(self.data["encoding"])

    @property
    def hamiltonian(self) -> HamiltonianSpec:
        return HamiltonianSpec(self.group, self.x, self.cutoffs, self.lattice)

    @property
    def trial_C(self) -> float:
        c = self.data["trial"]["C"]
        return self.x / 4 if c is None else float(c)

    def section(self, name: str) -> dict:
        return self.data[name]

    def echo(self) -> dict:
        """Resolved config with defaults filled (None values dropped, TOML has no null)."""
        def clean(d):
            return {k: clean(v) if isinstance(v, dict) else v for k, v in d.items() if v is not None}
        return clean(self.data)

    def to_toml(self) -> str:
        return tomli_w.dumps(self.echo())


def _validate(d: dict) -> None:
    for path, choices in _CHOICES.items():
        node = d
        *head, last = path.split(".")
        for h in head:
            node = node[h]
        if node[last] not in choices:
            raise ConfigError(f"{path}: expected one of {', '.join(choices)}, got {node[last]!r}")
    group = d["group"]
    cut = d["cutoffs"]
    for k in _REQUIRED_CUTOFFS[group]:
        if cut[k] is None:
            raise ConfigError(f"missing required key cutoffs.{k} for group {group}")
    for k, v in cut.items():
        if v is not None and k not in _REQUIRED_CUTOFFS[group]:
            raise ConfigError(f"cutoffs.{k} does not apply to group {group}")
    if group == "su2":
        j = parse_half(cut["j_max"], "cutoffs.j_max")
        cut["j_max"] = str(j)
    lat = d["lattice"]
    ext = lat["extents"]
    if not ext or not all(isinstance(e, int) and not isinstance(e, bool) and e >= 1 for e in ext):
        raise ConfigError("lattice.extents: expected a list of positive integers")
    if lat["dimension"] is None:
        lat["dimension"] = len(ext)
    if lat["dimension"] != len(ext):
        raise ConfigError(f"lattice.dimension = {lat['dimension']} but lattice.extents has {len(ext)} entries")
    if d["x"] < 0:
        raise ConfigError("x: coupling must be >= 0")
    sp = d["spectroscopy"]
    if sp["dt"] <= 0:
        raise ConfigError("spectroscopy.dt must be > 0")
    if sp["steps"] < 1 or sp["trotter_m"] < 1:
        raise ConfigError("spectroscopy.steps and spectroscopy.trotter_m must be >= 1")
    sw = d["gatecount"]["sweep"]
    if sw is not None and not all(isinstance(e, list) and all(isinstance(v, int) for v in e) for e in sw):
        raise ConfigError("gatecount.sweep: expected a list of integer lists")
    # the typed views must build
    try:
        RunConfig(d).hamiltonian
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse_value(text: str):
    """Parse an override value with TOML rules, falling back to a bare string."""
    try:
        return tomli.loads(f"v = {text}")["v"]
    except tomli.TOMLDecodeError:
        return text


def apply_override(raw: dict, path: str, value: Any) -> None:
    node = raw
    keys = path.split(".")
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigError(f"{path}: {k} is not a table")
    node[keys[-1]] = value


def load_toml(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomli.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


DEFAULTS = SCHEMA


def parse_config(path: Optional[str] = None, overrides: Optional[dict] = None,
                 raw: Optional[dict] = None) -> RunConfig:
    """File (or raw dict) first, then overrides {dotted.path: value}; flags win."""
    data = copy.deepcopy(raw) if raw is not None else (load_toml(path) if path else {})
    applied = []
    for k, v in (overrides or {}).items():
        apply_override(data, k, v)
        applied.append(k)
    filled = _fill(data, SCHEMA, "")
    _validate(filled)
    return RunConfig(filled, sorted(applied), path)
