"""Command-line interface: simulate, fit, select, export-graph, report.

Exit codes: 0 success, 1 usage error, 2 data or validation error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io as nio
from .em import ConvergenceOpts, InitSpec, Penalties, em_fit
from .errors import DataError, IllPosedProblemError, NetinfError, NumericalError
from .model import Dims, observation_count, param_count, random_sparse_params, simulate
from .netgraph import assemble_graph, export_graph
from .report import render_report, trace_csv
from .selection import GridSpec, SelectionError, effective_params, aicc, select_model

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
RUN_FORMAT = "netinf-run"


class UsageError(Exception):
    pass


class StageError(Exception):
    def __init__(self, stage, exc):
        super().__init__(f"{stage}: {exc}")
        self.stage = stage
        self.exc = exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (NetinfError, ValueError, ArithmeticError, np.linalg.LinAlgError, OSError) as exc:
        raise StageError(name, exc) from exc


def _config_from(args) -> nio.RunConfig:
    cfg = nio.RunConfig()
    if getattr(args, "config", None):
        nio.read_config(args.config, cfg)
    for key in ("k", "rel_tol", "max_iter", "inner_sweeps", "mode", "search", "threshold",
                "seed", "init", "init_seed", "out"):
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    for axis in ("s_Z", "s_B", "s_F", "s_A", "k_values"):
        val = getattr(args, axis, None)
        if val is not None:
            cfg.update(axis, val)
    if getattr(args, "no_center", False):
        cfg.center = False
    return cfg.validate()


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


def _init_spec(cfg) -> InitSpec:
    return InitSpec(kind=cfg.init, seed=cfg.init_seed)


def _q0(cfg):
    return cfg.q0_scale * np.eye(cfg.k)


def _write_run(out: Path, fit, dims, data, cfg, data_label, model_name, selection=None):
    pen = {"s_Z": fit.penalties.s_Z, "s_B": fit.penalties.s_B, "s_F": fit.penalties.s_F,
           "s_A": fit.penalties.s_A, "mode": fit.penalties.mode}
    nio.save_model(fit.params, out / model_name, data.gene_names)
    P = effective_params(fit.params)
    N = observation_count(dims)
    doc = {
        "format": RUN_FORMAT,
        "version": 1,
        "data": data_label,
        "model": model_name,
        "dims": {"p": dims.p, "k": dims.k, "T": dims.T, "n_R": dims.n_R},
        "dense_param_count": param_count(dims),
        "N": N,
        "penalties": pen,
        "n_iter": fit.n_iter,
        "converged": fit.converged,
        "loglik_trace": [float(v) for v in fit.loglik_trace],
        "nonzero_counts": fit.nonzero_counts,
        "P_eff": P,
        "aicc": aicc(fit.loglik, P, N),
        "threshold": cfg.threshold,
    }
    if selection is not None:
        doc["selection_table"] = "selection.csv"
        doc["best_index"] = selection.best_index
    _write(out / "fit.json", json.dumps(doc, indent=2) + "\n")
    _write(out / "loglik_trace.csv", trace_csv(fit.loglik_trace))
    rows = selection.rows if selection is not None else None
    _write(out / "report.txt", render_report(
        fit.params, dims, fit.loglik_trace, fit.converged, fit.n_iter, pen, data.gene_names,
        cfg.threshold, rows, selection.best_index if selection is not None else None, data_label))


def cmd_simulate(args) -> int:
    dims = _stage("simulate/dims", Dims, p=args.p, k=args.k, T=args.T, n_R=args.n_rep)
    params = _stage("simulate/params", random_sparse_params, dims, args.density, args.scale, args.seed)
    data, _ = _stage("simulate/draw", simulate, params, dims, args.seed)
    out = Path(args.out)
    _stage("simulate/write", out.mkdir, parents=True, exist_ok=True)
    _stage("simulate/write", nio.write_dataset, data, out / "data.csv")
    _stage("simulate/write", nio.save_model, params, out / "truth_model.json", data.gene_names)
    return EXIT_OK


def _load(args, cfg):
    data = _stage("load", nio.load_dataset, args.data, center=cfg.center)
    dims = _stage("load", data.dims, cfg.k)
    return data, dims


def cmd_fit(args) -> int:
    cfg = _stage("config", _config_from, args)
    data, dims = _load(args, cfg)
    pen = _stage("config", Penalties, cfg.s_Z[0], cfg.s_B[0], cfg.s_F[0], cfg.s_A[0], cfg.mode)
    opts = ConvergenceOpts(cfg.rel_tol, cfg.max_iter, cfg.inner_sweeps)
    fit = _stage("em", em_fit, data, dims, pen, _init_spec(cfg), opts, Q0=_q0(cfg))
    out = Path(cfg.out)
    _stage("write", out.mkdir, parents=True, exist_ok=True)
    _stage("write", _write_run, out, fit, dims, data, cfg, str(args.data), "model.json")
    return EXIT_OK


def cmd_select(args) -> int:
    cfg = _stage("config", _config_from, args)
    data, dims = _load(args, cfg)
    grid = _stage("config", GridSpec, cfg.s_Z, cfg.s_B, cfg.s_F, cfg.s_A,
                  cfg.k_values or None, cfg.search, cfg.mode)
    opts = ConvergenceOpts(cfg.rel_tol, cfg.max_iter, cfg.inner_sweeps)
    out = Path(cfg.out)
    _stage("write", out.mkdir, parents=True, exist_ok=True)
    try:
        table, fit = select_model(data, dims, grid, _init_spec(cfg), opts, Q0=_q0(cfg))
    except SelectionError as exc:
        if exc.table is not None:
            _write(out / "selection.csv", nio.selection_table_csv(exc.table))
        raise StageError("select", exc) from exc
    except (NetinfError, ValueError, ArithmeticError) as exc:
        raise StageError("select", exc) from exc
    best_dims = Dims(p=dims.p, k=table.best.k, T=dims.T, n_R=dims.n_R)
    _stage("write", _write, out / "selection.csv", nio.selection_table_csv(table))
    _stage("write", _write_run, out, fit, best_dims, data, cfg, str(args.data), "best_model.json", table)
    return EXIT_OK


def cmd_export_graph(args) -> int:
    params, names = _stage("load", nio.load_model_with_names, args.model)
    names = names or [f"g{i + 1}" for i in range(params.p)]
    g = _stage("graph", assemble_graph, params, names, args.threshold)
    text = _stage("export", export_graph, g, args.format)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        _stage("write", Path(args.out).write_text, text, encoding="utf-8")
    return EXIT_OK


def cmd_report(args) -> int:
    run = Path(args.run)
    try:
        doc = json.loads((run / "fit.json").read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise StageError("load", DataError(f"{run / 'fit.json'}: {exc}")) from exc
    if doc.get("format") != RUN_FORMAT:
        raise StageError("load", DataError(f"{run / 'fit.json'}: not a netinf run record"))
    params, names = _stage("load", nio.load_model_with_names, run / doc["model"])
    d = doc["dims"]
    dims = _stage("load", Dims, p=d["p"], k=d["k"], T=d["T"], n_R=d["n_R"])
    rows = best = None
    if "selection_table" in doc:
        rows = _stage("load", nio.read_selection_table, run / doc["selection_table"])
        best = doc.get("best_index")
    text = render_report(params, dims, doc["loglik_trace"], doc["converged"], doc["n_iter"],
                         doc["penalties"], names, doc.get("threshold", 1e-8), rows, best, doc.get("data", ""))
    out = Path(args.out) if args.out else run
    _stage("write", out.mkdir, parents=True, exist_ok=True)
    _stage("write", _write, out / "report.txt", text)
    _stage("write", _write, out / "loglik_trace.csv", trace_csv(doc["loglik_trace"]))
    if args.print:
        sys.stdout.write(text)
    return EXIT_OK


def _add_fit_options(sp, grid: bool):
    sp.add_argument("--data", required=True, help="dataset CSV (replicate,time,genes...)")
    sp.add_argument("--config", help="flat key=value config file; flags override it")
    sp.add_argument("--out", help="output directory")
    sp.add_argument("--k", type=int, help="hidden state dimension")
    sp.add_argument("--mode", choices=("fraction", "absolute"))
    help_s = "comma-separated budgets" if grid else "budget (first value used)"
    for axis in ("s_Z", "s_B", "s_F", "s_A"):
        sp.add_argument("--" + axis.replace("_", "-"), dest=axis, help=help_s)
    sp.add_argument("--rel-tol", dest="rel_tol", type=float)
    sp.add_argument("--max-iter", dest="max_iter", type=int)
    sp.add_argument("--inner-sweeps", dest="inner_sweeps", type=int)
    sp.add_argument("--init", choices=("data", "random"))
    sp.add_argument("--init-seed", dest="init_seed", type=int)
    sp.add_argument("--threshold", type=float)
    sp.add_argument("--no-center", action="store_true", help="do not subtract per-gene means")
    if grid:
        sp.add_argument("--search", choices=("full-cross", "coordinate-descent"))
        sp.add_argument("--k-values", dest="k_values", help="comma-separated hidden dimensions to compare")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="netinf", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    sp = sub.add_parser("simulate", help="write a synthetic dataset and its true model")
    sp.add_argument("--p", type=int, default=10)
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--T", type=int, default=10)
    sp.add_argument("--n-rep", dest="n_rep", type=int, default=20)
    sp.add_argument("--density", type=float, default=0.1)
    sp.add_argument("--scale", type=float, default=1.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("fit", help="fit one penalty tuple")
    _add_fit_options(sp, grid=False)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("select", help="AICc grid search over penalty tuples")
    _add_fit_options(sp, grid=True)
    sp.set_defaults(func=cmd_select)

    sp = sub.add_parser("export-graph", help="export a model's interaction graph")
    sp.add_argument("--model", required=True)
    sp.add_argument("--format", choices=("dot", "edge-csv", "json"), default="dot")
    sp.add_argument("--threshold", type=float, default=1e-8)
    sp.add_argument("--out", help="output file (default stdout)")
    sp.set_defaults(func=cmd_export_graph)

    sp = sub.add_parser("report", help="re-render the report of a fit/select run directory")
    sp.add_argument("--run", required=True, help="directory written by fit or select")
    sp.add_argument("--out", help="directory for the rendered files (default: the run directory)")
    sp.add_argument("--print", action="store_true", help="also print the report")
    sp.set_defaults(func=cmd_report)
    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
    except UsageError as exc:
        print(f"netinf: usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except StageError as exc:
        inner = exc.exc
        print(f"netinf {args.command}: {exc}", file=sys.stderr)
        if isinstance(inner, (NumericalError, IllPosedProblemError, SelectionError,
                              ArithmeticError, np.linalg.LinAlgError)) and not isinstance(inner, DataError):
            return EXIT_NUMERIC
        return EXIT_DATA


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
