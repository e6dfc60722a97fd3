"""Command-line entry point: ``gaugeforge <subcommand> [options]``."""

from __future__ import annotations

import argparse
import contextlib
import io
import json
import os
import platform
import sys
import time
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .config import RunConfig, parse_config, parse_value
from .errors import CapacityError, ConfigError, GaugeForgeError

# flag dest -> config key path
_FLAG_KEYS = {
    "group": "group",
    "x": "x",
    "encoding": "encoding",
    "layout": "layout",
    "seed": "seed",
    "extents": "lattice.extents",
    "boundary": "lattice.boundary",
    "l_max": "cutoffs.l_max",
    "j_max": "cutoffs.j_max",
    "p_max": "cutoffs.p_max",
    "q_max": "cutoffs.q_max",
    "C": "trial.C",
    "depth": "trial.depth",
    "mode": "spectroscopy.mode",
    "dt": "spectroscopy.dt",
    "steps": "spectroscopy.steps",
    "trotter_m": "spectroscopy.trotter_m",
    "threshold": "spectroscopy.threshold",
    "basis": "spectroscopy.basis",
    "trotter_steps": "gatecount.steps",
    "sweep": "gatecount.sweep",
    "wilson_steps": "wilson.steps",
    "csv": "output.csv",
    "circuit": "output.circuit",
}


def _extents(text: str) -> list:
    try:
        return [int(v) for v in text.replace("x", ",").split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad extents {text!r}; use e.g. 4,4 or 4x4") from None


def _sweep(text: str) -> list:
    return [_extents(part) for part in text.split(";") if part.strip()]


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("configuration")
    g.add_argument("--config", help="TOML run configuration")
    g.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key (dotted path), repeatable")
    g.add_argument("--group", choices=("u1", "su2", "su3"))
    g.add_argument("--x", type=float, help="coupling x")
    g.add_argument("--extents", type=_extents, help="lattice extents, e.g. 4,4")
    g.add_argument("--boundary", choices=("periodic", "open"))
    g.add_argument("--l-max", dest="l_max", type=int)
    g.add_argument("--j-max", dest="j_max", help="SU(2) cutoff, e.g. 1/2 or 1")
    g.add_argument("--p-max", dest="p_max", type=int)
    g.add_argument("--q-max", dest="q_max", type=int)
    g.add_argument("--encoding", choices=("one_hot", "binary"))
    g.add_argument("--layout", choices=("local", "linear_chain"))
    g.add_argument("--seed", type=int)
    o = p.add_argument_group("output")
    o.add_argument("--out", help="write the JSON result here instead of stdout")
    o.add_argument("--echo-config", help="write the resolved config as TOML")
    o.add_argument("--timing", action="store_true", help="include wall time in the JSON (breaks byte-determinism)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gaugeforge", description="Lattice gauge theory Hamiltonians on qubit registers.")
    ap.add_argument("--version", action="version", version=f"gaugeforge {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum", help="eigenvalues from the overlap series of a trial state")
    _common(s)
    s.add_argument("--mode", choices=("oracle", "trotter"))
    s.add_argument("--dt", type=float)
    s.add_argument("--steps", type=int, help="number of series points K")
    s.add_argument("--trotter-m", dest="trotter_m", type=int)
    s.add_argument("--threshold", type=float)
    s.add_argument("--basis", choices=("sector", "full"))
    s.add_argument("--C", type=float, help="trial-state parameter (default x/4)")
    s.add_argument("--depth", type=int)
    s.add_argument("--csv", help="series dump (t, re, im)")

    g = sub.add_parser("gatecount", help="gate and qubit counts of Trotter steps")
    _common(g)
    g.add_argument("--trotter-steps", dest="trotter_steps", type=int)
    g.add_argument("--sweep", type=_sweep, help="extents list, e.g. '4,4;6,6;8,8;10,10'")

    p = sub.add_parser("prepare", help="prepared trial-state amplitudes")
    _common(p)
    p.add_argument("--C", type=float)
    p.add_argument("--depth", type=int)
    p.add_argument("--basis", choices=("sector", "full"))

    c = sub.add_parser("cg-table", help="CG / isoscalar tables as CSV")
    c.add_argument("--group", choices=("su2", "su3"), required=True)
    c.add_argument("--j", help="SU(2) source spin, e.g. 3/2")
    c.add_argument("--p", type=int)
    c.add_argument("--q", type=int)
    c.add_argument("--table", choices=("I", "II", "III"), help="default I for su2, II for su3")
    c.add_argument("--out")

    w = sub.add_parser("wilson", help="Wilson-loop expectations and evolution circuit")
    _common(w)
    w.add_argument("--C", type=float)
    w.add_argument("--wilson-steps", dest="wilson_steps", type=int)
    w.add_argument("--basis", choices=("sector", "full"))
    w.add_argument("--circuit", help="export the e^{-iW} circuit as text")
    return ap


def config_from_args(args) -> RunConfig:
    overrides = {}
    for dest, key in _FLAG_KEYS.items():
        v = getattr(args, dest, None)
        if v is not None:
            overrides[key] = v
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        overrides[k.strip()] = parse_value(v.strip())
    return parse_config(args.config, overrides)


def _versions() -> dict:
    import scipy

    return {"gaugeforge": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def _f(v) -> float:
    return float(np.real(v))


# --------------------------------------------------------------------------
# subcommands

def _hamiltonian(cfg: RunConfig, basis: str):
    from .hamiltonian import assemble_sparse

    return assemble_sparse(cfg.hamiltonian, basis=basis, cap=cfg.section("simulator")["dim_cap"])


def _oracle_spectrum(H, k: int = 8):
    from .simulator import exact_diagonalize

    return exact_diagonalize(H, k=min(k, H.dimension))


def run_spectrum(cfg: RunConfig) -> dict:
    from .spectroscopy import fft_peaks, time_series
    from .state_prep import TrialSpec, prepare_state

    sp = cfg.section("spectroscopy")
    H = _hamiltonian(cfg, sp["basis"])
    trial = TrialSpec(cfg.trial_C, cfg.section("trial")["depth"])
    psi = prepare_state(trial, cfg.hamiltonian, H.basis)
    mode = "oracle" if sp["mode"] == "oracle" else f"trotter({sp['trotter_m']})"
    series = time_series(psi, H, float(sp["dt"]), sp["steps"], mode)
    peaks = fft_peaks(series, float(sp["threshold"]))
    ed = _oracle_spectrum(H)
    out = peaks.to_dict()
    out.update({
        "mode": series.mode,
        "dimension": H.dimension,
        "basis": sp["basis"],
        "oracle_eigenvalues": [float(e) for e in ed.eigenvalues],
        "series_K": series.K,
        "dt": series.dt,
    })
    path = cfg.section("output")["csv"]
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(series.to_csv())
        out["csv"] = path
    return out


def run_gatecount(cfg: RunConfig) -> dict:
    from .gatecount import count_lattice, sweep

    gc = cfg.section("gatecount")
    if gc["sweep"]:
        rep = sweep(cfg.group, cfg.cutoffs, [tuple(e) for e in gc["sweep"]], cfg.encoding,
                    cfg.data["layout"], cfg.x, cfg.lattice.boundary, gc["steps"])
    else:
        rep = count_lattice(cfg.hamiltonian, cfg.encoding, cfg.data["layout"], gc["steps"])
    out = rep.to_dict()
    path = cfg.section("output")["circuit"]
    if path:
        out["circuit"] = _export_hamiltonian_circuit(cfg, path)
    return out


def _export_hamiltonian_circuit(cfg: RunConfig, path: str) -> dict:
    from .hamiltonian import build_hamiltonian
    from .lattice_topology import build_layout, enumerate_links
    from .trotter_compiler import block_sums, route, trotterize

    spec = cfg.hamiltonian
    enc = cfg.encoding
    links = enumerate_links(spec.lattice)
    D = enc.qubits_per_register(spec.space)
    blocks = block_sums(build_hamiltonian(spec), enc, {l: i for i, l in enumerate(links)}, spec.space, D)
    n = len(links) * spec.space.n_registers * D
    circ = trotterize(blocks, 1.0, cfg.section("gatecount")["steps"], n)
    layout = build_layout(spec.lattice, cfg.data["layout"], spec.space.n_registers, D)
    phys, rep = route(circ, layout)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(phys.to_text())
    return {"path": path, "gates_by_kind": rep["gates_by_kind"], "qubits": phys.n_qubits}


def run_prepare(cfg: RunConfig) -> dict:
    from .hamiltonian import GlobalBasis
    from .lattice_topology import enumerate_links, enumerate_plaquettes
    from .state_prep import TrialSpec, plaquette_schedule, prepare_sparse

    spec = cfg.hamiltonian
    trial = TrialSpec(cfg.trial_C, cfg.section("trial")["depth"])
    sched = plaquette_schedule(spec.group, spec.cutoff, trial)
    keys, amps = prepare_sparse(trial, spec, sched)
    links = enumerate_links(spec.lattice)
    basis = GlobalBasis(links, [spec.space.dim] * len(links))
    states = spec.space.states
    dump = []
    for k, a in zip(keys, amps):
        if abs(a) < 1e-15:
            continue
        dig = basis.digits(int(k))
        dump.append({"key": int(k),
                     "links": {str(links[i]): str(states[d]) for i, d in enumerate(dig) if d != spec.space.vacuum},
                     "re": _f(a), "im": float(np.imag(a))})
    return {
        "C": trial.C,
        "schedule": sched.to_dict(),
        "n_plaquettes": len(enumerate_plaquettes(spec.lattice)),
        "norm": float(np.linalg.norm(amps)),
        "vacuum_amplitude": _f(amps[0]) if len(keys) and keys[0] == 0 else 0.0,
        "amplitudes": dump,
    }


def run_wilson(cfg: RunConfig) -> dict:
    from .lattice_topology import enumerate_links
    from .spectroscopy import Contour, compile_wilson_evolution, hermitized, wilson_expectation, wilson_loop_operator
    from .state_prep import TrialSpec, prepare_state

    wc = cfg.section("wilson")
    spec = cfg.hamiltonian
    lat = spec.lattice
    site = tuple(wc["site"]) if wc["site"] is not None else (0,) * lat.d
    contour = Contour.rectangle(lat, site, wc["mu"], wc["nu"], wc["a"], wc["b"])
    W = wilson_loop_operator(contour, spec.group, spec.cutoff)
    Wh = hermitized(W)
    H = _hamiltonian(cfg, cfg.section("spectroscopy")["basis"])
    ed = _oracle_spectrum(H, 1)
    gs = ed.vectors[:, 0]
    trial = prepare_state(TrialSpec(cfg.trial_C, cfg.section("trial")["depth"]), spec, H.basis)
    vac = H.vacuum()
    res = {"legs": [[str(l), bool(b)] for l, b in contour.legs], "n_legs": len(contour.legs),
           "terms": len(W), "expectation": {}}
    for name, v in (("vacuum", vac), ("ground", gs), ("trial", trial.amplitudes)):
        e = wilson_expectation(v, W, H.basis)
        eh = wilson_expectation(v, Wh, H.basis)
        res["expectation"][name] = {"re": _f(e), "im": float(np.imag(e)), "hermitized": _f(eh)}
    links = enumerate_links(lat)
    circ = compile_wilson_evolution(Wh, links, spec.space, cfg.encoding, wc["steps"], float(wc["time"]))
    res["circuit"] = {"qubits": circ.n_qubits, "steps": wc["steps"],
                      "gates_by_kind": circ.counts()}
    path = cfg.section("output")["circuit"]
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(circ.to_text())
        res["circuit"]["path"] = path
    return res


def cg_table(group: str, j: Optional[str] = None, p: Optional[int] = None, q: Optional[int] = None,
             table: Optional[str] = None) -> str:
    """CSV rows (labels..., value) instantiating the coefficient tables."""
    from .config import parse_half
    from .su_algebra import TABLE_I, TABLE_II, TABLE_III, HalfInt, IrrepSU3, su2_cg, su3_cg, su3_isoscalar

    buf = io.StringIO()
    if group == "su2":
        if j is None:
            raise ConfigError("cg-table --group su2 needs --j")
        if table not in (None, "I"):
            raise ConfigError("su2 has only table I")
        jj = parse_half(j, "--j")
        buf.write("symbol,j,m,dj,dm,value\n")
        for tw in range(-jj.twice, jj.twice + 1, 2):
            m = HalfInt(tw)
            for sym, dj, dm, _ in TABLE_I:
                v = su2_cg(jj, m, dj, dm)
                buf.write(f"{sym},{jj},{m},{HalfInt.of(dj)},{HalfInt.of(dm)},{v:.17g}\n")
        return buf.getvalue()
    if p is None or q is None:
        raise ConfigError("cg-table --group su3 needs --p and --q")
    if table == "I":
        raise ConfigError("table I is the SU(2) table")
    irrep = IrrepSU3(p, q)
    if table in (None, "II"):
        buf.write("symbol,p,q,T,Tz,Y,target_T,value\n")
        for w in irrep.weights():
            for sym, branch, lam, dT in TABLE_II:
                T2 = w.T if dT is None else HalfInt(w.T.twice + (1 if dT > 0 else -1))
                if T2.twice < 0:
                    continue
                v = su3_cg(p, q, w, "3", lam, branch, T2)
                buf.write(f"{sym},{p},{q},{w.T},{w.Tz},{w.Y},{T2},{v:.17g}\n")
        return buf.getvalue()
    buf.write("symbol,p,q,T,Y,value\n")
    seen = []
    for w in irrep.weights():
        if (w.T, w.Y) in seen:
            continue
        seen.append((w.T, w.Y))
        for sym, b, r, _ in TABLE_III:
            v = su3_isoscalar(p, q, w.T, w.Y, b, r)
            buf.write(f"{sym},{p},{q},{w.T},{w.Y},{v:.17g}\n")
    return buf.getvalue()


_RUNNERS = {"spectrum": run_spectrum, "gatecount": run_gatecount, "prepare": run_prepare, "wilson": run_wilson}


def _thread_limit():
    raw = os.environ.get("GAUGEFORGE_THREADS")
    if raw is None or raw == "":
        return contextlib.nullcontext()
    try:
        n = int(raw)
        if n < 1:
            raise ValueError
    except ValueError:
        raise ConfigError(f"GAUGEFORGE_THREADS must be a positive integer, got {raw!r}") from None
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        with _thread_limit():
            if args.command == "cg-table":
                header = f"# gaugeforge {__version__} cg-table group={args.group}"
                header += f" j={args.j}" if args.group == "su2" else f" p={args.p} q={args.q}"
                body = cg_table(args.group, args.j, args.p, args.q, args.table)
                _emit(header + "\n" + body, args.out)
            else:
                cfg = config_from_args(args)
                if args.echo_config:
                    with open(args.echo_config, "w", encoding="utf-8", newline="\n") as fh:
                        fh.write(cfg.to_toml())
                result = _RUNNERS[args.command](cfg)
                doc = {"command": args.command, "config": cfg.echo(), "overrides": cfg.overrides,
                       "versions": _versions(), "result": result}
                if args.timing:
                    doc["wall_time_s"] = time.perf_counter() - t0
                _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)
    except GaugeForgeError as exc:
        print(f"gaugeforge: error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except MemoryError:
        print("gaugeforge: error [CapacityError]: out of memory", file=sys.stderr)
        return CapacityError.exit_code
    finally:
        print(f"gaugeforge: wall time {time.perf_counter() - t0:.3f} s", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
