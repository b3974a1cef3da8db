"""Dataset CSV, model JSON, selection-table CSV and run-config parsing."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .model import Dataset, ModelParams

MODEL_FORMAT = "netinf-model"
MODEL_VERSION = 1
TABLE_COLUMNS = ("s_Z", "s_B", "s_F", "s_A", "k", "loglik", "P_eff", "N", "aicc", "converged")


# ---------------------------------------------------------------- datasets

def load_dataset(path, center: bool = True) -> Dataset:
    """Read ``replicate,time,<gene1>,...,<geneP>`` rows into a Dataset.

    Replicates keep their order of first appearance; times are sorted
    ascending and must be the same set for every replicate. With
    ``center`` each gene's grand mean over all replicates and times is
    subtracted.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except FileNotFoundError:
        raise DataError(f"{path}: file not found") from None
    except UnicodeDecodeError as exc:
        raise DataError(f"{path}: not valid UTF-8 ({exc})") from None
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if len(header) < 3 or header[0] != "replicate" or header[1] != "time":
        raise DataError(f"{path}: header must start with 'replicate,time' followed by gene names")
    genes = header[2:]
    if len(set(genes)) != len(genes) or any(not g for g in genes):
        raise DataError(f"{path}: gene names in header must be non-empty and unique")
    width = len(header)
    records = {}
    first_row = {}
    rep_order = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != width:
            raise DataError(f"{path}: row {lineno} has {len(row)} fields, expected {width}")
        rep = row[0].strip()
        if not rep:
            raise DataError(f"{path}: row {lineno}, column 'replicate': missing value")
        t_text = row[1].strip()
        if not t_text:
            raise DataError(f"{path}: row {lineno}, column 'time': missing value")
        try:
            t = float(t_text)
        except ValueError:
            raise DataError(f"{path}: row {lineno}, column 'time': non-numeric value {t_text!r}") from None
        vals = np.empty(len(genes))
        for c, (name, cell) in enumerate(zip(genes, row[2:])):
            cell = cell.strip()
            if not cell:
                raise DataError(f"{path}: row {lineno}, column {name!r}: missing value")
            try:
                vals[c] = float(cell)
            except ValueError:
                raise DataError(f"{path}: row {lineno}, column {name!r}: non-numeric value {cell!r}") from None
            if not math.isfinite(vals[c]):
                raise DataError(f"{path}: row {lineno}, column {name!r}: non-finite value {cell!r}")
        key = (rep, t)
        if key in records:
            raise DataError(f"{path}: row {lineno}: duplicate (replicate, time) pair ({rep}, {t_text}), "
                            f"first seen at row {first_row[key]}")
        records[key] = vals
        first_row[key] = lineno
        if rep not in rep_order:
            rep_order.append(rep)
    if not records:
        raise DataError(f"{path}: no data rows")
    times = sorted({t for (_, t) in records})
    for rep in rep_order:
        have = sorted(t for (r, t) in records if r == rep)
        if have != times:
            missing = sorted(set(times) - set(have))
            raise DataError(f"{path}: replicate {rep!r} is missing time(s) {missing}")
    values = np.array([[records[(rep, t)] for t in times] for rep in rep_order])
    if center:
        values = values - values.mean(axis=(0, 1), keepdims=True)
    try:
        return Dataset(values, genes)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None


def write_dataset(data: Dataset, path, times=None) -> None:
    times = list(range(1, data.T + 1)) if times is None else list(times)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["replicate", "time", *data.gene_names])
        for r in range(data.n_R):
            for t in range(data.T):
                w.writerow([r + 1, times[t], *(repr(float(v)) for v in data.values[r, t])])


# ---------------------------------------------------------------- models

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _matrix_json(M: np.ndarray) -> str:
    return "[" + ", ".join("[" + ", ".join(_fmt(v) for v in row) + "]" for row in M) + "]"


def model_to_json(params: ModelParams, gene_names=None) -> str:
    parts = [
        f'  "format": {json.dumps(MODEL_FORMAT)}',
        f'  "version": {MODEL_VERSION}',
        f'  "dims": {{"p": {params.p}, "k": {params.k}}}',
    ]
    if gene_names is not None:
        parts.append(f'  "gene_names": {json.dumps([str(g) for g in gene_names])}')
    for name in ("F", "A", "Z", "B", "Q0"):
        parts.append(f'  "{name}": {_matrix_json(getattr(params, name))}')
    return "{\n" + ",\n".join(parts) + "\n}\n"


def save_model(params: ModelParams, path, gene_names=None) -> None:
    """Write the model as JSON with 17 significant digits per entry."""
    Path(path).write_text(model_to_json(params, gene_names), encoding="utf-8")


def model_from_json(text: str) -> tuple[ModelParams, list | None]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"model file is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise DataError("not a netinf model document")
    if doc.get("version") != MODEL_VERSION:
        raise DataError(f"unsupported model format version {doc.get('version')!r}, expected {MODEL_VERSION}")
    try:
        p, k = int(doc["dims"]["p"]), int(doc["dims"]["k"])
        mats = {}
        for name in ("F", "A", "Z", "B", "Q0"):
            M = np.array(doc[name], dtype=float)
            if M.size == 0:
                M = M.reshape({"F": (k, k), "A": (k, p), "Z": (p, k), "B": (p, p), "Q0": (k, k)}[name])
            mats[name] = M
        params = ModelParams(**mats)
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"invalid model document: {exc}") from None
    if params.p != p or params.k != k:
        raise DataError(f"model matrices have p={params.p}, k={params.k} but dims say p={p}, k={k}")
    names = doc.get("gene_names")
    if names is not None and len(names) != p:
        raise DataError(f"model lists {len(names)} gene names for p={p}")
    return params, names


def load_model(path) -> ModelParams:
    return load_model_with_names(path)[0]


def load_model_with_names(path) -> tuple[ModelParams, list | None]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"{path}: file not found") from None
    return model_from_json(text)


# ---------------------------------------------------------------- selection tables

def _num(x) -> str:
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x)) if isinstance(x, float) else str(x)


def selection_table_csv(table) -> str:
    lines = [",".join(TABLE_COLUMNS)]
    for row in table.rows:
        vals = [*(repr(float(v)) for v in row.penalties), str(row.k), _num(float(row.loglik)),
                str(row.P_eff), str(row.N), _num(float(row.aicc)), "true" if row.converged else "false"]
        lines.append(",".join(vals))
    return "\n".join(lines) + "\n"


def read_selection_table(path) -> list[dict]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != TABLE_COLUMNS:
            raise DataError(f"{path}: unexpected selection table header {reader.fieldnames}")
        out = []
        for rec in reader:
            out.append({
                "penalties": tuple(float(rec[a]) for a in TABLE_COLUMNS[:4]),
                "k": int(rec["k"]), "loglik": float(rec["loglik"]), "P_eff": int(rec["P_eff"]),
                "N": int(rec["N"]), "aicc": float(rec["aicc"]), "converged": rec["converged"] == "true",
            })
        return out


# ---------------------------------------------------------------- run config

def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass
class RunConfig:
    """User choices for fit/select runs; every field has a flat config key."""

    k: int = 4
    center: bool = True
    init: str = "data"
    init_seed: int = 0
    rel_tol: float = 1e-6
    max_iter: int = 500
    inner_sweeps: int = 1
    mode: str = "fraction"
    s_Z: tuple = (0.05, 0.1, 0.2, 0.4, 0.8)
    s_B: tuple = (0.05, 0.1, 0.2, 0.4, 0.8)
    s_F: tuple = (0.05, 0.1, 0.2, 0.4, 0.8)
    s_A: tuple = (0.05, 0.1, 0.2, 0.4, 0.8)
    k_values: tuple = ()
    search: str = "coordinate-descent"
    threshold: float = 1e-8
    seed: int = 0
    q0_scale: float = 1.0
    out: str = "out"

    _PARSERS = {
        "k": int, "center": _bool, "init": str, "init_seed": int, "rel_tol": float,
        "max_iter": int, "inner_sweeps": int, "mode": str, "s_Z": _floats, "s_B": _floats,
        "s_F": _floats, "s_A": _floats, "k_values": lambda s: tuple(int(v) for v in s.split(",") if v.strip()),
        "search": str, "threshold": float, "seed": int, "q0_scale": float, "out": str,
    }

    def update(self, key: str, value: str) -> None:
        if key not in self._PARSERS:
            raise DataError(f"unknown config key {key!r}")
        try:
            setattr(self, key, self._PARSERS[key](value.strip()))
        except ValueError as exc:
            raise DataError(f"config key {key!r}: {exc}") from None

    def validate(self) -> "RunConfig":
        problems = []
        if self.k < 1:
            problems.append("k must be >= 1")
        if self.init not in ("data", "random"):
            problems.append("init must be 'data' or 'random'")
        if not 0 < self.rel_tol < 1:
            problems.append("rel_tol must be in (0, 1)")
        if self.max_iter < 1 or self.inner_sweeps < 1:
            problems.append("max_iter and inner_sweeps must be >= 1")
        if self.mode not in ("fraction", "absolute"):
            problems.append("mode must be 'fraction' or 'absolute'")
        for axis in ("s_Z", "s_B", "s_F", "s_A"):
            vals = getattr(self, axis)
            if not vals or any(v < 0 for v in vals) or (self.mode == "fraction" and any(v > 1 for v in vals)):
                problems.append(f"{axis} must be a non-empty list of budgets in the allowed range")
        if any(k < 1 for k in self.k_values):
            problems.append("k_values must be positive")
        if self.search not in ("full-cross", "coordinate-descent"):
            problems.append("search must be 'full-cross' or 'coordinate-descent'")
        if self.threshold < 0:
            problems.append("threshold must be nonnegative")
        if not self.q0_scale > 0:
            problems.append("q0_scale must be positive")
        if problems:
            raise DataError("invalid configuration: " + "; ".join(problems))
        return self


def read_config(path, config: RunConfig | None = None) -> RunConfig:
    """Apply a flat ``key = value`` file (``#`` starts a comment) to ``config``."""
    config = RunConfig() if config is None else config
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except FileNotFoundError:
        raise DataError(f"{path}: config file not found") from None
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"{path}: line {lineno}: expected key=value")
        key, value = line.split("=", 1)
        try:
            config.update(key.strip(), value)
        except DataError as exc:
            raise DataError(f"{path}: line {lineno}: {exc}") from None
    return config
