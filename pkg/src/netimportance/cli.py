"""Command-line pipelines.

Every command writes into one output directory: JSON for machines, CSV for
plotting tools.  Each file embeds the effective configuration, so a rerun
with the same configuration and seed reproduces it byte for byte.

Exit codes: 0 ok, 1 computation failure, 2 missing input or bad usage,
3 degenerate ranking, 4 malformed input, 5 controllability failure.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import compare as cmp
from . import connectome as conn
from . import linctrl, netio, tipping
from .dynamics import DivergenceError, GeneModel, GeneParams, MutualisticModel, MutualisticParams
from .ranking import DegenerateRankingError, ImportanceRanking

log = logging.getLogger("netimportance")

EXIT_OK, EXIT_FAILURE, EXIT_USAGE, EXIT_DEGENERATE, EXIT_FORMAT, EXIT_CONTROL = 0, 1, 2, 3, 4, 5
# settings that change how, not what, is computed; kept out of provenance headers
_EXECUTION_ONLY = ("workers", "out", "config")


@dataclass
class RunConfig:
    input: str = ""
    out: str = "run"
    config: str = ""
    model: str = "auto"
    kind: str = "auto"
    subnetwork: str = "full"
    h: float = 0.2
    t: float = 0.5
    beta_intra: float = 1.0
    beta_inter: float = 0.0
    alpha: float = -0.3
    mu: float = 1e-4
    B: float = 1.0
    f: float = 1.0
    hill: float = 2.0
    gamma_grid: str = "0:3:0.05"
    c_grid: str = "0:1:0.02"
    threshold: float = tipping.DEFAULT_THRESHOLD
    held_value: float = tipping.DEFAULT_HELD_VALUE
    dt: float = 0.01
    eps: float = 1e-10
    t_max: float = 5000.0
    samples: int = 1000
    seed: int = 0
    cluster_tol: Optional[float] = None
    rank_tol: float = linctrl.DEFAULT_RANK_TOL
    max_retries: int = linctrl.MAX_RETRIES
    mode: str = "walks"
    max_length: int = 7
    save_sets: bool = False
    manifest: str = ""
    workers: int = 1

    def provenance(self) -> dict:
        d = dataclasses.asdict(self)
        for key in _EXECUTION_ONLY:
            d.pop(key)
        return d


class CLIError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _coerce(name: str, raw: str):
    ftype = {f.name: f.type for f in fields(RunConfig)}[name]
    if ftype in ("bool",):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if ftype == "int":
        return int(raw)
    if ftype == "float":
        return float(raw)
    if ftype == "Optional[float]":
        return None if raw.strip().lower() in ("", "none") else float(raw)
    return raw.strip()


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment; dashes in keys allowed."""
    known = {f.name for f in fields(RunConfig)}
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CLIError(EXIT_USAGE, f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "as":
            key = "held_value"
        if key not in known:
            raise CLIError(EXIT_USAGE, f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def parse_grid(spec: str) -> tuple[float, float, float]:
    try:
        start, stop, step = (float(v) for v in spec.split(":"))
    except ValueError:
        raise CLIError(EXIT_USAGE, f"grid must be start:stop:step, got {spec!r}") from None
    return start, stop, step


# ---------------------------------------------------------------- output


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not serializable: {type(o)}")


def write_json(path: Path, payload: dict, cfg: RunConfig) -> None:
    body = {"config": cfg.provenance(), **payload}
    path.write_text(json.dumps(body, indent=2, sort_keys=True, default=_json_default) + "\n")


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def write_csv(path: Path, header: list[str], rows, cfg: RunConfig) -> None:
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(cfg.provenance(), sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    path.write_text(buf.getvalue())


# ---------------------------------------------------------------- loading


def _require_file(path: str) -> Path:
    p = Path(path)
    if not path or not p.is_file():
        raise CLIError(EXIT_USAGE, f"input file not found: {path}")
    return p


def _model_kind(cfg: RunConfig, path: Path) -> str:
    if cfg.model != "auto":
        return cfg.model
    return "mutualistic" if path.suffix.lower() == ".csv" else "gene"


def load_network(cfg: RunConfig, path: Optional[str] = None):
    """Return ``(model_kind, bipartite or None, directed network)``."""
    p = _require_file(path or cfg.input)
    kind = _model_kind(cfg, p)
    if kind == "mutualistic":
        bip = netio.read_incidence(p)
        return kind, bip, netio.bipartite_to_adjacency(bip)
    lin_kind = netio.NetworkKind.UNDIRECTED if cfg.kind == "undirected" else netio.NetworkKind.DIRECTED
    net = netio.read_edge_list(p, lin_kind)
    if cfg.subnetwork == "giant":
        net = netio.giant_strong_component(net)
    elif cfg.subnetwork == "input":
        net = netio.input_connected_core(net)
    elif cfg.subnetwork != "full":
        raise CLIError(EXIT_USAGE, f"unknown subnetwork {cfg.subnetwork!r}")
    return kind, None, net


def build_model(cfg: RunConfig, kind, bip, net):
    if kind == "mutualistic":
        params = MutualisticParams(h=cfg.h, t=cfg.t, beta_intra=cfg.beta_intra,
                                   beta_inter=cfg.beta_inter, alpha_A=cfg.alpha,
                                   alpha_P=cfg.alpha, mu_A=cfg.mu, mu_P=cfg.mu)
        return MutualisticModel(bip, params), parse_grid(cfg.gamma_grid)
    params = GeneParams(B=cfg.B, f=cfg.f, h_hill=cfg.hill)
    return GeneModel(net, params), parse_grid(cfg.c_grid)


def _ranking_degrees(kind, net) -> np.ndarray:
    # gene rankings are ordered by out-degree, species by total degree
    return netio.out_degrees(net) if kind == "gene" else netio.degrees(net)


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------- commands


def cmd_ingest_check(cfg: RunConfig) -> dict:
    kind, bip, net = load_network(cfg)
    deg = netio.degrees(net)
    summary = {"model": kind, "n_nodes": net.n, "n_edges": int((net.adjacency != 0).sum()),
               "kind": net.kind.value}
    if bip is not None:
        summary.update(n_pollinators=bip.n_pollinators, n_plants=bip.n_plants, n_links=bip.n_links)
    if net.node_classes is not None:
        summary["classes"] = {c: int(n) for c, n in zip(*np.unique(net.node_classes, return_counts=True))}
    out = _out_dir(cfg)
    write_json(out / "ingest.json", {"summary": summary}, cfg)
    write_csv(out / "degrees.csv", ["node_label", "degree"], zip(net.node_labels, deg.tolist()), cfg)
    return summary


def _sweeps(cfg, model, grid_spec):
    lo, hi, step = grid_spec
    kw = dict(dt=cfg.dt, eps=cfg.eps, t_max=cfg.t_max)
    down = tipping.sweep(model, tipping.make_grid(hi, lo, step), tipping.DESCENDING,
                         threshold=cfg.threshold, **kw)
    up = tipping.sweep(model, tipping.make_grid(lo, hi, step), tipping.ASCENDING,
                       down.states[-1], cfg.threshold, **kw)
    return down, up


def cmd_sweep(cfg: RunConfig) -> dict:
    kind, bip, net = load_network(cfg)
    model, grid_spec = build_model(cfg, kind, bip, net)
    down, up = _sweeps(cfg, model, grid_spec)
    recovered = [float(g) for g, x in zip(up.grid, up.states) if (x >= cfg.threshold).all()]
    summary = {
        "model": kind, "parameter": model.parameter_name,
        "tipping_point": down.tipping_point,
        "uncontrolled_recovery": recovered[0] if recovered else None,
        "all_converged": bool(down.converged.all() and up.converged.all()),
    }
    out = _out_dir(cfg)
    header = ["direction", model.parameter_name, "converged"] + list(net.node_labels)
    rows = [[res.direction, float(g), int(ok)] + x.tolist()
            for res in (down, up) for g, ok, x in zip(res.grid, res.converged, res.states)]
    write_csv(out / "sweep.csv", header, rows, cfg)
    write_json(out / "sweep.json", {"summary": summary}, cfg)
    return summary


def _nonlinear(cfg, kind, bip, net):
    model, (lo, hi, step) = build_model(cfg, kind, bip, net)
    kw = dict(dt=cfg.dt, eps=cfg.eps, t_max=cfg.t_max)
    down = tipping.sweep(model, tipping.make_grid(hi, lo, step), tipping.DESCENDING,
                         threshold=cfg.threshold, **kw)
    table = tipping.recovery_table(model, tipping.make_grid(lo, hi, step), cfg.held_value,
                                   cfg.threshold, start_state=down.states[-1],
                                   workers=cfg.workers, **kw)
    labels = [net.node_labels[i] for i in table.nodes]
    ranking = tipping.rank_nonlinear(table, labels)
    return model, down, table, ranking


def cmd_rank_nl(cfg: RunConfig) -> dict:
    kind, bip, net = load_network(cfg)
    model, down, table, ranking = _nonlinear(cfg, kind, bip, net)
    deg = _ranking_degrees(kind, net)
    out = _out_dir(cfg)
    labels = [net.node_labels[i] for i in table.nodes]
    write_csv(out / "recovery.csv", ["node_label", "degree", "value"],
              [(lab, int(deg[i]), p) for lab, i, p in zip(labels, table.nodes, table.points)], cfg)
    write_csv(out / "ranking_nl.csv", ["node_label", "degree", "value"],
              [(lab, int(deg[i]), float(v)) for lab, i, v in
               zip(labels, ranking.nodes, ranking.values)], cfg)
    summary = {"model": kind, "parameter": model.parameter_name,
               "tipping_point": down.tipping_point, "n_ranked": len(table.nodes),
               "n_no_recovery": sum(p is None for p in table.points)}
    write_json(out / "ranking_nl.json",
               {"summary": summary, "ranking": ranking.as_dict(),
                "recovery": {"nodes": table.nodes.tolist(), "points": list(table.points)}}, cfg)
    return summary


def _linear(cfg, kind, net):
    lin_kind = net.kind
    report = linctrl.spectrum_multiplicities(net.adjacency, lin_kind, cfg.cluster_tol, cfg.rank_tol)
    ranking, sets = linctrl.linear_importance(
        net.adjacency, lin_kind, cfg.samples, cfg.seed, cfg.cluster_tol, cfg.rank_tol,
        cfg.workers, net.node_labels, return_sets=True, max_retries=cfg.max_retries)
    return report, ranking, sets


def cmd_rank_lin(cfg: RunConfig) -> dict:
    kind, bip, net = load_network(cfg)
    report, ranking, sets = _linear(cfg, kind, net)
    deg = _ranking_degrees(kind, net)
    out = _out_dir(cfg)
    n_drivers = ranking.metadata["n_drivers"]
    summary = {"model": kind, "kind": net.kind.value, "n_nodes": net.n,
               "n_drivers": n_drivers, "seed": cfg.seed, "samples": cfg.samples,
               "cluster_tol": report.cluster_tol, "rank_tol": report.rank_tol}
    write_json(out / "spectrum.json", {"summary": summary, "spectrum": report.as_dict()}, cfg)
    write_json(out / "ranking_lin.json", {"summary": summary, "ranking": ranking.as_dict()}, cfg)
    write_csv(out / "ranking_lin.csv", ["node_label", "degree", "value"],
              [(lab, int(d), float(v)) for lab, d, v in zip(net.node_labels, deg, ranking.values)], cfg)
    if cfg.save_sets:
        write_json(out / "controller_sets.json",
                   {"sets": [list(s.drivers) for s in sets]}, cfg)
    return summary


def _load_ranking(path: str) -> ImportanceRanking:
    d = json.loads(_require_file(path).read_text())["ranking"]
    counts = d.get("counts")
    return ImportanceRanking(d["kind"], d["nodes"], d["values"], d.get("labels", ()),
                             None if counts is None else np.asarray(counts), d.get("n_samples"),
                             d.get("metadata", {}))


def read_manifest(path: str) -> list[dict]:
    """CSV with header ``name,input[,model,nl_ranking,lin_ranking]``."""
    text = _require_file(path).read_text()
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows or "input" not in rows[0]:
        raise CLIError(EXIT_FORMAT, f"{path}: manifest needs a header with an 'input' column")
    base = Path(path).parent
    for row in rows:
        for key in ("input", "nl_ranking", "lin_ranking"):
            if row.get(key):
                p = Path(row[key])
                row[key] = str(p if p.is_absolute() else base / p)
        row.setdefault("name", Path(row["input"]).stem)
        if not row.get("name"):
            row["name"] = Path(row["input"]).stem
    return rows


def cmd_compare(cfg: RunConfig) -> dict:
    if cfg.manifest:
        entries = read_manifest(cfg.manifest)
    elif cfg.input:
        entries = [{"name": Path(cfg.input).stem, "input": cfg.input}]
    else:
        raise CLIError(EXIT_USAGE, "compare needs an input file or --manifest")
    out = _out_dir(cfg)
    records, skipped = [], []
    for entry in entries:
        sub = dataclasses.replace(cfg, model=entry.get("model") or cfg.model)
        kind, bip, net = load_network(sub, entry["input"])
        if entry.get("nl_ranking"):
            nl = _load_ranking(entry["nl_ranking"])
        else:
            nl = _nonlinear(sub, kind, bip, net)[3]
        if entry.get("lin_ranking"):
            lin = _load_ranking(entry["lin_ranking"])
        else:
            lin = _linear(sub, kind, net)[1]
        scope = "pollinators" if kind == "mutualistic" else "genes"
        try:
            record, rows = cmp.build_report(nl, lin, _ranking_degrees(kind, net), net.node_labels,
                                            entry["name"], cfg.seed, sub.provenance(), scope)
        except (cmp.ScopeMismatchError, ValueError) as exc:
            log.warning("skipping %s: %s", entry["name"], exc)
            skipped.append({"network": entry["name"], "reason": str(exc)})
            continue
        records.append(record)
        write_csv(out / f"{entry['name']}_table.csv",
                  ["node_label", "degree", "r_nl", "r_l", "in_scope"],
                  [(r.label, r.degree, r.nonlinear, r.linear, int(r.in_scope)) for r in rows], cfg)
    write_csv(out / "scatter.csv", ["network", "pearson", "cosine_distance", "n_nodes"],
              [(r.network, r.pearson, r.cosine_distance, r.n_nodes) for r in records], cfg)
    summary = {"n_networks": len(entries), "n_compared": len(records),
               "n_skipped": len(skipped), "skipped": skipped}
    write_json(out / "comparison.json",
               {"summary": summary, "records": [r.as_dict() for r in records]}, cfg)
    return summary


SENSORY, MOTOR = "sensory", "motor"


def cmd_connectome(cfg: RunConfig) -> dict:
    p = _require_file(cfg.input)
    net = netio.read_edge_list(p)
    if net.node_classes is None:
        raise CLIError(EXIT_FORMAT, f"{p}: edge list has no '# classes:' block")
    report, ranking, _ = _linear(cfg, "connectome", net)
    means = conn.class_mean_importance(ranking, net.node_classes)
    sources, targets = net.indices_of_class(SENSORY), net.indices_of_class(MOTOR)
    out = _out_dir(cfg)
    summary = {"n_nodes": net.n, "n_drivers": ranking.metadata["n_drivers"],
               "class_means": means, "n_sensory": len(sources), "n_motor": len(targets),
               "mode": cfg.mode, "max_length": cfg.max_length}
    if len(sources) and len(targets):
        if cfg.mode == "walks":
            paths = conn.count_walks(net, sources, targets, cfg.max_length)
        elif cfg.mode in ("simple", conn.SIMPLE_PATHS):
            paths = conn.simple_path_matrix(net, sources, targets, cfg.max_length)
        else:
            raise CLIError(EXIT_USAGE, f"unknown path mode {cfg.mode!r}")
        header = ["sensory"] + [net.node_labels[t] for t in targets]
        rows = [[net.node_labels[s]] + [int(c) for c in paths.counts[a]]
                for a, s in enumerate(sources)]
        write_csv(out / "paths.csv", header, rows, cfg)
        totals = paths.counts.sum(axis=0)
        write_csv(out / "paths_per_motor.csv", ["motor", "total"],
                  [(net.node_labels[t], int(v)) for t, v in zip(targets, totals)], cfg)
    write_csv(out / "class_means.csv", ["class", "mean_r_l", "n_nodes"],
              [(c, m, int(sum(1 for k in net.node_classes if k == c))) for c, m in means.items()], cfg)
    write_csv(out / "ranking_lin.csv", ["node_label", "class", "degree", "value"],
              [(lab, c, int(d), float(v)) for lab, c, d, v in
               zip(net.node_labels, net.node_classes, netio.degrees(net), ranking.values)], cfg)
    write_json(out / "connectome.json", {"summary": summary, "spectrum": report.as_dict()}, cfg)
    return summary


COMMANDS = {
    "ingest-check": cmd_ingest_check,
    "sweep": cmd_sweep,
    "rank-nl": cmd_rank_nl,
    "rank-lin": cmd_rank_lin,
    "compare": cmd_compare,
    "connectome": cmd_connectome,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netimportance",
        description="Nonlinear recovery-control and linear exact-controllability node importance.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("input", nargs="?", default=S, help="network file")
        p.add_argument("-o", "--out", default=S, help="output directory")
        p.add_argument("--config", default=S, help="key=value configuration file")
        p.add_argument("--model", choices=["auto", "mutualistic", "gene"], default=S)
        p.add_argument("--kind", choices=["auto", "directed", "undirected"], default=S,
                       help="treatment of edge-list input in linear analysis")
        p.add_argument("--subnetwork", choices=["full", "giant", "input"], default=S)
        p.add_argument("--h", type=float, default=S)
        p.add_argument("--t", type=float, default=S)
        p.add_argument("--beta-intra", type=float, default=S)
        p.add_argument("--beta-inter", type=float, default=S)
        p.add_argument("--alpha", type=float, default=S)
        p.add_argument("--mu", type=float, default=S)
        p.add_argument("--B", type=float, default=S)
        p.add_argument("--f", type=float, default=S)
        p.add_argument("--hill", type=float, default=S)
        p.add_argument("--gamma-grid", default=S, help="start:stop:step")
        p.add_argument("--c-grid", default=S, help="start:stop:step")
        p.add_argument("--threshold", type=float, default=S)
        p.add_argument("--as", dest="held_value", type=float, default=S,
                       help="value held on the controlled node")
        p.add_argument("--dt", type=float, default=S)
        p.add_argument("--eps", type=float, default=S)
        p.add_argument("--t-max", type=float, default=S)
        p.add_argument("--samples", type=int, default=S)
        p.add_argument("--seed", type=int, default=S)
        p.add_argument("--cluster-tol", type=float, default=S)
        p.add_argument("--rank-tol", type=float, default=S)
        p.add_argument("--max-retries", type=int, default=S,
                       help="row permutations tried per controller set before giving up")
        p.add_argument("--mode", choices=["walks", "simple"], default=S)
        p.add_argument("--max-length", type=int, default=S)
        p.add_argument("--save-sets", action="store_const", const=True, default=S)
        p.add_argument("--manifest", default=S)
        p.add_argument("--workers", type=int, default=S)
    return parser


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    """Defaults, then the config file, then command-line flags."""
    given = {k: v for k, v in vars(ns).items() if k not in ("command", "verbose")}
    values = {}
    if "config" in given:
        values.update(read_config_file(_require_file(given["config"]).as_posix()))
    values.update(given)
    if "out" not in values:
        values["out"] = f"run-{ns.command}"
    return RunConfig(**values)


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(ns)
        summary = COMMANDS[ns.command](cfg)
    except CLIError as exc:
        return _fail(exc.code, "usage" if exc.code == EXIT_USAGE else "input", str(exc))
    except DegenerateRankingError as exc:
        return _fail(EXIT_DEGENERATE, "degenerate_ranking", str(exc))
    except netio.NetworkFormatError as exc:
        return _fail(EXIT_FORMAT, "format", str(exc))
    except linctrl.ControllabilityError as exc:
        return _fail(EXIT_CONTROL, "controllability", str(exc))
    except (DivergenceError, RuntimeError, ValueError) as exc:
        return _fail(EXIT_FAILURE, type(exc).__name__, str(exc))
    print(json.dumps(summary, sort_keys=True, default=_json_default))
    return EXIT_OK


def _fail(code: int, kind: str, message: str) -> int:
    print(json.dumps({"error": kind, "message": message, "exit_code": code}), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
