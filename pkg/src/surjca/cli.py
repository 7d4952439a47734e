"""Command-line experiment runner.

Every run writes a JSON summary (stdout unless ``--out-json``) carrying
``tool_version``, ``config_echo`` and ``wall_time``; tabular data goes to
``--out-csv`` with a single header row.  Exit status: 0 success, 1 I/O or
parse error, 2 contract violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    find_garden_of_eden,
    is_injective,
    is_permutive,
    is_preinjective,
)
from .conservation import (
    ContractViolation,
    LocalObservable,
    discover_conserved,
    is_conserved,
    rational_str,
    synthesize_flux,
)
from .gibbs import (
    bernoulli,
    block_entropy_profile,
    check_invariance,
    entropy,
    gibbs_from_observable,
    pressure,
    pushforward,
)
from .lattice2d import (
    Q2RSimulator,
    TorusConfig2D,
    block_distribution,
    contour_map,
    ising_energy,
    is_valid_contour,
    magnetization,
)
from .models import BUILTIN_NAMES, ModelParseError, builtin, load_model, load_sft, parse_observable, serialize_model
from .randomization import density_one_diagnostic, exact_series, sample_orbit, spike_ratios
from .symbolic import SymbolicError


class ConfigError(ValueError):
    pass


# parameters accepted per subcommand; anything else in a config file is rejected
COMMAND_PARAMS = {
    "analyze": {"model"},
    "conserve check": {"model", "observable"},
    "conserve discover": {"model", "range"},
    "conserve flux": {"model", "observable"},
    "gibbs build": {"sft", "observable"},
    "gibbs push": {"model", "observable", "bernoulli", "length"},
    "gibbs invariance": {"model", "observable", "bernoulli", "length", "tol"},
    "gibbs entropy": {"model", "observable", "bernoulli", "length"},
    "gibbs pressure": {"sft", "observable"},
    "simulate q2r": {"width", "height", "steps", "init", "seed", "record", "every"},
    "simulate contour-map": {"input"},
    "randomize exact": {"model", "p", "n", "T", "eps", "spikes"},
    "randomize sample": {"model", "p", "t", "width", "samples", "seed", "n"},
    "models list": set(),
    "models show": {"name"},
}
OUTPUT_KEYS = {"out_json", "out_csv", "out"}


@dataclass
class ExperimentConfig:
    command: str
    params: dict = field(default_factory=dict)
    out_json: str | None = None
    out_csv: str | None = None

    @classmethod
    def from_dict(cls, command: str, data: dict) -> ExperimentConfig:
        if command not in COMMAND_PARAMS:
            raise ConfigError(f"unknown command {command!r}")
        allowed = COMMAND_PARAMS[command] | OUTPUT_KEYS
        unknown = set(data) - allowed
        if unknown:
            raise ConfigError(f"unknown keys for {command}: {sorted(unknown)}")
        params = {k: v for k, v in data.items() if k in COMMAND_PARAMS[command]}
        return cls(command, params, data.get("out_json"), data.get("out_csv") or data.get("out"))

    def echo(self) -> dict:
        return {"command": self.command, **{k: self.params[k] for k in sorted(self.params)}}


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _measure(params, phi_domain):
    if params.get("observable"):
        f = parse_observable(Path(params["observable"]).read_text(), phi_domain)
        return gibbs_from_observable(phi_domain, f)
    probs = [float(x) for x in str(params.get("bernoulli") or "").split(",") if x]
    if not probs:
        n = len(phi_domain.alphabet)
        probs = [1.0 / n] * n
    if len(probs) == 1 and len(phi_domain.alphabet) == 2:
        probs = [1.0 - probs[0], probs[0]]
    return bernoulli(phi_domain, probs)


def _map_model(params):
    model = load_model(params["model"])
    if model.map is None:
        raise ContractViolation(f"model {model.name} is not a one-dimensional sliding block map")
    return model


def _table_rows(table, alphabet):
    rows = []
    for n in range(1, table.max_length + 1):
        for w, p in table.levels[n].items():
            rows.append([alphabet.decode(w), n, _fmt(p)])
    return rows


def _cmd_analyze(p):
    model = _map_model(p)
    phi = model.map
    goe = find_garden_of_eden(phi)
    out = {
        "model": model.name,
        "surjective": goe is None,
        "preinjective": is_preinjective(phi),
        "injective": is_injective(phi),
        "goe_witness": None if goe is None else phi.codomain.alphabet.decode(goe),
    }
    if phi.is_ca:
        out["left_permutive"] = is_permutive(phi, "left")
        out["right_permutive"] = is_permutive(phi, "right")
    return out, None


def _observable(p, sft) -> LocalObservable:
    return parse_observable(Path(p["observable"]).read_text(), sft)


def _pairs(f: LocalObservable):
    return [[f.sft.alphabet.decode(w), rational_str(v)] for w, v in f.table.items()]


def _cmd_conserve_check(p):
    phi = _map_model(p).map
    return {"conserved": is_conserved(phi, _observable(p, phi.domain))}, None


def _cmd_conserve_discover(p):
    phi = _map_model(p).map
    basis = discover_conserved(phi, int(p["range"]))
    return {
        "range": basis.k,
        "quotient_dim": basis.quotient_dim,
        "nullspace_dim": basis.nullspace_dim,
        "trivial_dim": len(basis.trivial_basis),
        "basis": [_pairs(f) for f in basis.representatives],
    }, None


def _cmd_conserve_flux(p):
    phi = _map_model(p).map
    flux = synthesize_flux(phi, _observable(p, phi.domain))
    return {"conserved": True, "flux_range": flux.h.k, "flux_offset": flux.h.offset, "flux": _pairs(flux.h)}, None


def _cmd_gibbs_build(p):
    sft = load_sft(p["sft"])
    f = _observable(p, sft)
    mu = gibbs_from_observable(sft, f)
    a = sft.alphabet
    rows = []
    for i, u in enumerate(mu.contexts):
        for s in range(len(a)):
            rows.append([a.decode(u), a.symbols[s], _fmt(mu.P[i, s])])
    summary = {
        "order": mu.order,
        "entropy": entropy(mu),
        "pressure": pressure(sft, f),
        "stationary": {a.decode(u): float(mu.rho[i]) for i, u in enumerate(mu.contexts)},
    }
    return summary, (["context", "symbol", "probability"], rows)


def _cmd_gibbs_push(p):
    phi = _map_model(p).map
    mu = _measure(p, phi.domain)
    table = pushforward(phi, mu, int(p.get("length") or 6))
    return {"max_length": table.max_length, "max_inconsistency": table.max_inconsistency()}, (
        ["word", "length", "probability"], _table_rows(table, phi.codomain.alphabet))


def _cmd_gibbs_invariance(p):
    phi = _map_model(p).map
    mu = _measure(p, phi.domain)
    rep = check_invariance(phi, mu, int(p.get("length") or 6), float(p.get("tol") or 1e-9))
    mm = None
    if rep.first_mismatch:
        n, w, a, b = rep.first_mismatch
        mm = {"length": n, "word": phi.domain.alphabet.decode(w), "pushed": a, "original": b}
    return {"equal_up_to_L": rep.equal_up_to_L, "L": rep.L, "max_deviation": rep.max_deviation,
            "first_mismatch": mm, "note": rep.note}, None


def _cmd_gibbs_entropy(p):
    phi = _map_model(p).map
    mu = _measure(p, phi.domain)
    L = int(p.get("length") or 8)
    prof = block_entropy_profile(pushforward(phi, mu, L))
    rows = [[n, _fmt(a), _fmt(b)] for n, a, b in prof]
    return {"entropy": entropy(mu), "profile_last_increment": prof[-1][2] if prof else None}, (
        ["n", "block_entropy_per_site", "conditional_increment"], rows)


def _cmd_gibbs_pressure(p):
    sft = load_sft(p["sft"])
    return {"pressure": pressure(sft, _observable(p, sft))}, None


def _parse_init(source: str) -> float:
    kind, _, val = str(source).partition(":")
    if kind != "bernoulli" or not val:
        raise ConfigError("init must look like bernoulli:<p>")
    return float(val)


def _cmd_simulate_q2r(p):
    W, H = int(p.get("width") or 200), int(p.get("height") or 200)
    steps = int(p.get("steps") or 1000)
    every = int(p.get("every") or 1)
    p_up = _parse_init(p.get("init") or "bernoulli:0.1")
    rng = np.random.Generator(np.random.Philox(int(p.get("seed") or 0)))
    record = [r for r in str(p.get("record") or "energy,magnetization").split(",") if r]
    blocks = None
    header = ["t"]
    for r in record:
        if r == "energy":
            header.append("energy")
        elif r == "magnetization":
            header.append("magnetization")
        elif r.startswith("blocks:"):
            blocks = int(r.split(":", 1)[1])
            header += [f"block_{i}" for i in range(2 ** (blocks * blocks))]
        else:
            raise ConfigError(f"unknown record item {r!r}")
    sim = Q2RSimulator(TorusConfig2D.bernoulli(H, W, p_up, rng))
    rows = []

    def snap():
        row = [sim.t]
        for r in record:
            if r == "energy":
                row.append(ising_energy(sim.x))
            elif r == "magnetization":
                row.append(magnetization(sim.x))
        if blocks:
            row += [_fmt(v) for v in block_distribution(sim.x, blocks)]
        rows.append(row)

    snap()
    e0 = ising_energy(sim.x)
    conserved = True
    for t in range(1, steps + 1):
        sim.step()
        if ising_energy(sim.x) != e0:
            conserved = False
        if t % every == 0:
            snap()
    return {"initial_energy": e0, "energy_conserved": conserved, "steps": steps}, (header, rows)


def _cmd_simulate_contour(p):
    c = TorusConfig2D.from_text(Path(p["input"]).read_text())
    y = contour_map(c)
    return {"valid": is_valid_contour(y), "height": c.height, "width": c.width, "grid": y.to_text()}, None


def _cmd_randomize_exact(p):
    phi = _map_model(p).map
    T = int(p.get("T") or 1025)
    n = int(p.get("n") or 8)
    prob = float(p.get("p") or 0.1)
    eps = float(p.get("eps") or 0.01)
    series = exact_series(phi, T, prob, n)
    rows = [[t, _fmt(series.tv[t]), _fmt(series.cesaro_tv[t]), _fmt(series.density[t])] for t in range(T)]
    ks = [int(k) for k in str(p.get("spikes") or "").split(",") if k]
    if not ks:
        ks = [k for k in range(1, 32) if 2 ** (k + 1) <= T]
    return {"density_one_fraction": density_one_diagnostic(series.tv, eps),
            "spike_ratios": {str(k): v for k, v in spike_ratios(series.tv, ks).items()}}, (
        ["t", "tv", "cesaro_tv", "density"], rows)


def _cmd_randomize_sample(p):
    phi = _map_model(p).map
    t = int(p.get("t") or 300)
    width = int(p.get("width") or 10000 + t * (phi.window - 1))
    res = sample_orbit(phi, float(p.get("p") or 0.1), t, width, int(p.get("samples") or 1),
                       int(p.get("seed") or 0), int(p.get("n") or 1))
    rows = [[i, _fmt(d)] for i, d in enumerate(res.density)]
    return {"initial_density": float(res.density[0]), "final_density": float(res.density[-1]),
            "marginal": [float(x) for x in res.marginal.probs], "windows": res.n_windows}, (["t", "density"], rows)


def _cmd_models_list(p):
    return {"models": [{"name": m.name, "kind": m.kind, "description": m.description}
                       for m in (builtin(n) for n in BUILTIN_NAMES)]}, None


def _cmd_models_show(p):
    return {"name": p["name"], "text": serialize_model(load_model(p["name"]))}, None


HANDLERS = {
    "analyze": _cmd_analyze,
    "conserve check": _cmd_conserve_check,
    "conserve discover": _cmd_conserve_discover,
    "conserve flux": _cmd_conserve_flux,
    "gibbs build": _cmd_gibbs_build,
    "gibbs push": _cmd_gibbs_push,
    "gibbs invariance": _cmd_gibbs_invariance,
    "gibbs entropy": _cmd_gibbs_entropy,
    "gibbs pressure": _cmd_gibbs_pressure,
    "simulate q2r": _cmd_simulate_q2r,
    "simulate contour-map": _cmd_simulate_contour,
    "randomize exact": _cmd_randomize_exact,
    "randomize sample": _cmd_randomize_sample,
    "models list": _cmd_models_list,
    "models show": _cmd_models_show,
}


def run(config: ExperimentConfig, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    start = time.perf_counter()
    try:
        summary, table = HANDLERS[config.command](config.params)
    except (ContractViolation, SymbolicError, ConfigError) as exc:
        print(json.dumps({"error": str(exc), "kind": "contract"}), file=sys.stderr)
        return 2
    except (OSError, ModelParseError, KeyError) as exc:
        print(json.dumps({"error": str(exc), "kind": "io"}), file=sys.stderr)
        return 1
    if table is not None and config.out_csv:
        Path(config.out_csv).write_text(_csv_text(*table))
    out = {"tool_version": __version__, "config_echo": config.echo(), **summary,
           "wall_time": round(time.perf_counter() - start, 6)}
    text = json.dumps(out, indent=2, sort_keys=False, default=_json_default) + "\n"
    if config.out_json:
        Path(config.out_json).write_text(text)
    else:
        stdout.write(text)
    return 0


def _json_default(x):
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    raise TypeError(type(x))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="surjca", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="group", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON file with parameters (unknown keys are rejected)")
        sp.add_argument("--out-json", dest="out_json")
        sp.add_argument("--out-csv", "--out", dest="out_csv")

    def leaf(parent, name, help_):
        sp = parent.add_parser(name, help=help_)
        common(sp)
        return sp

    sp = sub.add_parser("analyze", help="surjectivity, pre-injectivity, injectivity verdicts")
    common(sp)
    sp.add_argument("--model", required=True)

    cons = sub.add_parser("conserve", help="conservation laws").add_subparsers(dest="action", required=True)
    for name in ("check", "flux"):
        sp = leaf(cons, name, f"conservation {name}")
        sp.add_argument("--model", required=True)
        sp.add_argument("--observable", required=True)
    sp = leaf(cons, "discover", "all conserved observables up to a range")
    sp.add_argument("--model", required=True)
    sp.add_argument("--range", type=int, default=2)

    gib = sub.add_parser("gibbs", help="Gibbs measures").add_subparsers(dest="action", required=True)
    for name in ("build", "pressure"):
        sp = leaf(gib, name, f"Gibbs {name}")
        sp.add_argument("--sft", required=True, help="model file, built-in, or NAME:codomain")
        sp.add_argument("--observable", required=True)
    for name in ("push", "invariance", "entropy"):
        sp = leaf(gib, name, f"Gibbs {name}")
        sp.add_argument("--model", required=True)
        sp.add_argument("--observable", help="Gibbs measure of this observable on the domain")
        sp.add_argument("--bernoulli", help="comma separated symbol probabilities (or P(1) for binary)")
        sp.add_argument("--length", type=int)
        if name == "invariance":
            sp.add_argument("--tol", type=float, default=1e-9)

    sim = sub.add_parser("simulate", help="2D lattice models").add_subparsers(dest="action", required=True)
    sp = leaf(sim, "q2r", "Q2R time series")
    sp.add_argument("--width", type=int, default=200)
    sp.add_argument("--height", type=int, default=200)
    sp.add_argument("--steps", type=int, default=1000)
    sp.add_argument("--init", default="bernoulli:0.1")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--record", default="energy,magnetization")
    sp.add_argument("--every", type=int, default=1)
    sp = leaf(sim, "contour-map", "Ising spins to contour glyphs")
    sp.add_argument("--input", required=True)

    rnd = sub.add_parser("randomize", help="approach to equilibrium").add_subparsers(dest="action", required=True)
    sp = leaf(rnd, "exact", "exact marginals of an additive CA")
    sp.add_argument("--model", default="xor01")
    sp.add_argument("--p", type=float, default=0.1)
    sp.add_argument("--n", type=int, default=8)
    sp.add_argument("--T", type=int, default=1025)
    sp.add_argument("--eps", type=float, default=0.01)
    sp.add_argument("--spikes", default="")
    sp = leaf(rnd, "sample", "Monte-Carlo orbit sampling")
    sp.add_argument("--model", default="xor01")
    sp.add_argument("--p", type=float, default=0.1)
    sp.add_argument("--t", type=int, default=300)
    sp.add_argument("--width", type=int)
    sp.add_argument("--samples", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--n", type=int, default=1)

    mod = sub.add_parser("models", help="built-in models").add_subparsers(dest="action", required=True)
    leaf(mod, "list", "list built-ins")
    sp = leaf(mod, "show", "print a built-in in model file format")
    sp.add_argument("name")
    return parser


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    command = ns.group if ns.group == "analyze" else f"{ns.group} {ns.action}"
    data = {k: v for k, v in vars(ns).items() if k not in ("group", "action", "config") and v is not None}
    if ns.config:
        extra = json.loads(Path(ns.config).read_text())
        cfg = ExperimentConfig.from_dict(command, extra)  # rejects unknown keys
        data = {**cfg.params, **{k: v for k, v in data.items() if k in OUTPUT_KEYS or k not in cfg.params}}
    return ExperimentConfig.from_dict(command, data)


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        config = config_from_args(ns)
    except ConfigError as exc:
        print(json.dumps({"error": str(exc), "kind": "config"}), file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": str(exc), "kind": "io"}), file=sys.stderr)
        return 1
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
