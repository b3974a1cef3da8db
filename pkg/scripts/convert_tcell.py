"""Convert the public T-cell expression matrices into a netinf dataset CSV.

The T-cell activation data (58 genes, 10 time points, two experiments with
34 and 10 replicates) is distributed as ``longitudinal`` matrices in the R
GeneNet/longitudinal packages. Export each one with, for example::

    library(GeneNet); data(tcell)
    write.csv(tcell.34, "tcell34.csv"); write.csv(tcell.10, "tcell10.csv")

Rows in those exports are ordered time-major (all replicates of the first
time point, then the next time point, ...). This script stacks the
experiments as replicates, optionally restricts to a gene list (one name
per line) and writes ``replicate,time,<genes...>``::

    python scripts/convert_tcell.py --input tcell34.csv:34 --input tcell10.csv:10 \\
        --genes genes45.txt --out tests/fixtures/tcell.csv

The gene list used for the 45-gene fixture is not part of the public data
and has to be supplied; without ``--genes`` all columns are kept.
"""

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

DEFAULT_TIMES = (0, 2, 4, 6, 8, 18, 24, 32, 48, 72)


def read_matrix(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if r]
    # R's write.csv puts row names in an unnamed first column
    first_is_label = header[0] in ("", '""') or not _is_number(body[0][0])
    genes = header[1:] if first_is_label else header
    start = 1 if first_is_label else 0
    values = np.array([[float(c) for c in r[start:]] for r in body])
    if values.shape[1] != len(genes):
        raise ValueError(f"{path}: {values.shape[1]} value columns but {len(genes)} gene names")
    return genes, values


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def reshape_time_major(values, n_rep, n_times):
    if values.shape[0] != n_rep * n_times:
        raise ValueError(f"expected {n_rep} x {n_times} = {n_rep * n_times} rows, got {values.shape[0]}")
    return values.reshape(n_times, n_rep, -1).transpose(1, 0, 2)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--input", action="append", required=True, metavar="CSV:NREP",
                    help="exported matrix and its replicate count; repeat for each experiment")
    ap.add_argument("--times", default=",".join(map(str, DEFAULT_TIMES)),
                    help="comma-separated measurement times (hours)")
    ap.add_argument("--genes", help="file with the gene subset to keep, one name per line")
    ap.add_argument("--out", required=True)
    args = ap.parse_args(argv)

    times = [float(t) for t in args.times.split(",")]
    blocks, genes = [], None
    for item in args.input:
        path, _, n_rep = item.rpartition(":")
        g, values = read_matrix(path)
        if genes is not None and g != genes:
            raise SystemExit(f"{path}: gene columns differ from the first input")
        genes = g
        blocks.append(reshape_time_major(values, int(n_rep), len(times)))
    data = np.concatenate(blocks, axis=0)

    if args.genes:
        keep = [ln.strip() for ln in Path(args.genes).read_text(encoding="utf-8").splitlines() if ln.strip()]
        missing = [g for g in keep if g not in genes]
        if missing:
            raise SystemExit(f"genes not found in the input: {', '.join(missing)}")
        data = data[:, :, [genes.index(g) for g in keep]]
        genes = keep

    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["replicate", "time", *genes])
        for r in range(data.shape[0]):
            for t, time in enumerate(times):
                w.writerow([r + 1, f"{time:g}", *(repr(float(v)) for v in data[r, t])])
    print(f"wrote {args.out}: {data.shape[0]} replicates x {data.shape[1]} times x {data.shape[2]} genes",
          file=sys.stderr)


if __name__ == "__main__":
    main()
