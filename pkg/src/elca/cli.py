"""Command-line front end: ``elca {fit,select,simulate,sizedist,replay}``.

Every command writes its outputs into ``--out`` together with a
``manifest.json`` that records the resolved arguments; ``elca replay``
re-runs a manifest and reproduces the outputs byte for byte.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, em, sizedist
from .hypergraph import (HypergraphFormatError, READERS, read_hypergraph, size_histogram,
                         write_hypergraph)
from .model import (ElcaParams, InvalidParamsError, LcaParams, dumps, implied_lca,
                    load_lca_params, load_params, random_init, sample)
from .selection import CvConfig, greedy_search

log = logging.getLogger("elca")

MANIFEST = "manifest.json"
# arguments that never influence output bytes
_NOT_RECORDED = {"func", "verbose"}
_NOT_REPLAYED = {"out", "threads"}


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {v}")
    return v


def _probability(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"must lie strictly between 0 and 1, got {v}")
    return v


def _write(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else repr(getattr(v, "item", lambda: v)())
                           for v in row) + "\n")
    return buf.getvalue()


def _add_em_flags(p):
    p.add_argument("--tol", type=_positive_float, default=em.DEFAULT_TOL,
                   help="stop when the log-likelihood gain drops below this (default 1e-6)")
    p.add_argument("--max-iter", type=_positive_int, default=em.DEFAULT_MAX_ITER,
                   help="maximum EM iterations per run (default 2000)")
    p.add_argument("--restarts", type=_positive_int, default=em.DEFAULT_RESTARTS,
                   help="random restarts; the best log-likelihood is kept (default 10)")
    p.add_argument("--seed", type=int, default=1, help="base random seed (default 1)")
    p.add_argument("--threads", type=_positive_int, default=1,
                   help="worker processes; outputs do not depend on it (default 1)")


def _add_input_flags(p):
    p.add_argument("--input", required=True, help="hypergraph file")
    p.add_argument("--format", choices=sorted(READERS), default="edges",
                   help="input format (default edges)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="elca",
        description="Extended latent class analysis for random hypergraphs.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit an ELCA model with given G and K")
    _add_input_flags(p)
    p.add_argument("--clusters", "-G", type=_positive_int, required=True)
    p.add_argument("--extra", "-K", type=_positive_int, required=True)
    _add_em_flags(p)
    p.add_argument("--resp", action="store_true",
                   help="include full responsibilities in params.json")
    p.add_argument("--out", default="elca_fit", help="output directory")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("select", help="choose G and K by cross-validated likelihood")
    _add_input_flags(p)
    p.add_argument("--ncv", type=_positive_int, default=20,
                   help="cross-validation replicates (default 20)")
    p.add_argument("--q", type=_probability, default=0.7,
                   help="probability a hyperedge is used for training (default 0.7)")
    _add_em_flags(p)
    p.add_argument("--out", default="elca_select", help="output directory")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("simulate", help="draw a hypergraph from an ELCA model")
    p.add_argument("--params", help="parameter document (JSON)")
    p.add_argument("--vertices", "-N", type=_positive_int)
    p.add_argument("--clusters", "-G", type=_positive_int)
    p.add_argument("--extra", "-K", type=_positive_int)
    p.add_argument("--edges", "-M", type=int, required=True, help="number of hyperedges")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", default="elca_sim", help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sizedist", help="observed and model hyperedge-size distributions")
    _add_input_flags(p)
    p.add_argument("--params", help="fitted ELCA parameter document")
    p.add_argument("--lca-params", help="fitted LCA parameter document (or K=1 ELCA fit)")
    p.add_argument("--out", default="elca_sizes", help="output directory")
    p.set_defaults(func=cmd_sizedist)

    p = sub.add_parser("replay", help="re-run a manifest")
    p.add_argument("manifest", help="manifest.json written by an earlier run")
    p.add_argument("--out", help="output directory (default: the recorded one)")
    p.add_argument("--threads", type=_positive_int, help="override worker processes")
    p.set_defaults(func=cmd_replay)
    return parser


def _load_input(args):
    return read_hypergraph(args.input, args.format)


def cmd_fit(args) -> list[str]:
    m = _load_input(args)
    res = em.fit_restarts(m, args.clusters, args.extra, tol=args.tol, max_iter=args.max_iter,
                          n_restarts=args.restarts, seed=args.seed, n_jobs=args.threads)
    out = Path(args.out)
    doc = res.to_dict(include_resp=args.resp)
    doc["edge_labels"] = m.edge_labels
    _write(out / "params.json", dumps(doc))
    _write(out / "loglik_trace.csv",
           _csv(["iteration", "loglik"], enumerate(res.loglik_trace.tolist())))
    _write(out / "assignments.csv",
           _csv(["edge", "cluster", "extra_cluster"],
                ((e, str(int(a) + 1), str(int(b) + 1))
                 for e, a, b in zip(m.edge_labels, res.z1, res.z2))))
    G, K = args.clusters, args.extra
    _write(out / "cluster_probs.csv",
           _csv(["edge"] + [f"cluster_{g + 1}" for g in range(G)],
                ([e] + row for e, row in zip(m.edge_labels, res.cluster_probs().tolist()))))
    _write(out / "extra_probs.csv",
           _csv(["edge"] + [f"extra_{k + 1}" for k in range(K)],
                ([e] + row for e, row in zip(m.edge_labels, res.extra_probs().tolist()))))
    log.info("G=%d K=%d loglik %.6f (seed %s, %d iterations)", G, K, res.loglik,
             res.seed, res.n_iter)
    return ["params.json", "loglik_trace.csv", "assignments.csv", "cluster_probs.csv",
            "extra_probs.csv"]


def cmd_select(args) -> list[str]:
    m = _load_input(args)
    cfg = CvConfig(n_cv=args.ncv, q=args.q, tol=args.tol, max_iter=args.max_iter,
                   n_restarts=args.restarts, seed=args.seed, n_jobs=args.threads)
    sel = greedy_search(m, cfg)
    out = Path(args.out)
    _write(out / "cv_table.csv", sel.to_csv())
    _write(out / "selection.json", dumps(sel.to_dict()))
    print(f"selected G={sel.g_opt} K={sel.k_opt} (cv loglik {sel.best:.4f})")
    return ["cv_table.csv", "selection.json"]


def cmd_simulate(args) -> list[str]:
    if args.edges < 1:
        raise ValueError(f"--edges must be >= 1, got {args.edges}")
    if args.params:
        params = load_params(args.params)
    else:
        missing = [f for f in ("vertices", "clusters", "extra") if getattr(args, f) is None]
        if missing:
            raise ValueError("without --params, --vertices, --clusters and --extra are required")
        params = random_init(args.vertices, args.clusters, args.extra, args.seed)
    s = sample(params, args.edges, args.seed)
    out = Path(args.out)
    write_hypergraph(s.matrix, out / "hypergraph.txt", "edges")
    _write(out / "labels.csv",
           _csv(["edge", "cluster", "extra_cluster"],
                ((e, str(int(a) + 1), str(int(b) + 1))
                 for e, a, b in zip(s.matrix.edge_labels, s.z1, s.z2))))
    doc = params.replace(vertex_labels=s.matrix.vertex_labels).to_dict()
    _write(out / "params.json", dumps(doc))
    return ["hypergraph.txt", "labels.csv", "params.json"]


def cmd_sizedist(args) -> list[str]:
    m = _load_input(args)
    hist = size_histogram(m).as_array(m.n_vertices)
    header = ["size", "observed_count", "observed_freq"]
    columns = [list(range(m.n_vertices + 1)), hist.tolist(), (hist / hist.sum()).tolist()]
    summary: dict = {"n_edges": m.n_edges, "n_vertices": m.n_vertices}
    freq = hist / hist.sum()

    elca = load_params(args.params) if args.params else None
    lca = load_lca_params(args.lca_params) if args.lca_params else None
    for name, params in (("elca", elca), ("lca", lca)):
        if params is None:
            continue
        n = params.phi.shape[0] if isinstance(params, ElcaParams) else params.p.shape[0]
        if n != m.n_vertices:
            raise ValueError(f"{name} parameters have {n} vertices, data has {m.n_vertices}")
        pmf = (sizedist.size_pmf_elca(params) if isinstance(params, ElcaParams)
               else sizedist.size_pmf_lca(params))
        header.append(f"{name}_pmf")
        columns.append(pmf.probs.tolist())
        summary.setdefault("total_variation", {})[name] = sizedist.total_variation(freq, pmf)

    moments = {}
    if elca is not None:
        moments["elca_vs_implied_lca"] = sizedist.moments(implied_lca(elca), elca).to_dict()
        if lca is not None:
            try:
                moments["elca_vs_lca"] = sizedist.moments(lca, elca).to_dict()
            except (sizedist.ConditionViolatedError, ValueError) as exc:
                moments["elca_vs_lca"] = {"error": str(exc)}
    elif lca is not None:
        as_elca = ElcaParams(pi=lca.pi, tau=[1.0], a=[1.0], phi=lca.p)
        moments["lca"] = sizedist.moments(lca, as_elca).to_dict()
    if moments:
        summary["moments"] = moments

    out = Path(args.out)
    _write(out / "size_distribution.csv", _csv(header, zip(*columns)))
    _write(out / "sizedist.json", dumps(summary))
    return ["size_distribution.csv", "sizedist.json"]


def _recorded_args(args) -> dict:
    rec = {k: v for k, v in vars(args).items() if k not in _NOT_RECORDED}
    for key in ("input", "params", "lca_params"):
        if rec.get(key):
            rec[key] = str(Path(rec[key]).resolve())
    return rec


def _run(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    outputs = args.func(args)
    rec = _recorded_args(args)
    inputs = {k: rec[k] for k in ("input", "params", "lca_params") if rec.get(k)}
    manifest = {
        "command": args.command,
        "inputs": {k: {"path": v, "sha256": _sha256(v)} for k, v in inputs.items()},
        "args": rec,
        "seed": rec.get("seed"),
        "version": __version__,
        "outputs": outputs,
        "duration_seconds": time.perf_counter() - start,
    }
    _write(out / MANIFEST, json.dumps(manifest, indent=2) + "\n")
    return 0


def cmd_replay(args) -> int:
    with open(args.manifest, encoding="utf-8") as fh:
        manifest = json.load(fh)
    recorded = dict(manifest["args"])
    for name, info in manifest.get("inputs", {}).items():
        if os.path.exists(info["path"]) and _sha256(info["path"]) != info["sha256"]:
            log.warning("input %s changed since the manifest was written", info["path"])
    if args.out is not None:
        recorded["out"] = args.out
    if args.threads is not None and "threads" in recorded:
        recorded["threads"] = args.threads
    argv = [recorded.pop("command")]
    for key, value in recorded.items():
        flag = "--" + key.replace("_", "-")
        if value is None or value is False:
            continue
        if value is True:
            argv.append(flag)
        else:
            argv.extend([flag, repr(value) if isinstance(value, float) else str(value)])
    log.info("replaying: elca %s", " ".join(argv))
    return main(argv)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "replay":
            return cmd_replay(args)
        return _run(args)
    except (HypergraphFormatError, InvalidParamsError, ValueError, OSError,
            em.NumericalFailure, em.FitFailedError, sizedist.ConditionViolatedError) as exc:
        print(f"elca {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
