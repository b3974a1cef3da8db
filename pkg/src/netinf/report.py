"""Plain-text run reports and log-likelihood trace CSVs."""

from __future__ import annotations

import math

import numpy as np

from .model import Dims, ModelParams, observation_count, param_count
from .netgraph import assemble_graph, degree_ranking
from .selection import aicc, effective_params

# hubs previously reported for the T-cell data set
TCELL_REFERENCE_IN_HUBS = ("TRAF5", "JUND", "CDK4", "CASP4", "CD69", "C3X1")
TCELL_REFERENCE_OUT_HUBS = ("FYB", "CCNA2", "AKT1", "CASP8")


def trace_csv(trace) -> str:
    lines = ["iteration,loglik"]
    lines += [f"{i},{float(v)!r}" for i, v in enumerate(trace, start=1)]
    return "\n".join(lines) + "\n"


def _canon(name: str) -> str:
    return "".join(ch for ch in name.upper() if ch.isalnum())


def hub_comparison(params: ModelParams, gene_names, threshold: float = 1e-8, top: int = 10) -> list[str]:
    g = assemble_graph(params, gene_names, threshold)
    genes = set(g.nodes[: g.n_genes])
    lines = []
    for direction, reference in (("in", TCELL_REFERENCE_IN_HUBS), ("out", TCELL_REFERENCE_OUT_HUBS)):
        ranking = [(n, d) for n, d in degree_ranking(g, direction) if n in genes][:top]
        found = {_canon(n) for n, _ in ranking}
        overlap = [r for r in reference if _canon(r) in found]
        lines.append(f"top {top} genes by {direction}-degree: "
                     + ", ".join(f"{n}({d})" for n, d in ranking))
        lines.append(f"  reference {direction}-hubs: {', '.join(reference)}")
        lines.append(f"  overlap: {len(overlap)}/{len(reference)}"
                     + (f" ({', '.join(overlap)})" if overlap else ""))
    return lines


def render_report(params: ModelParams, dims: Dims, trace, converged: bool, n_iter: int,
                  penalties: dict, gene_names=None, threshold: float = 1e-8,
                  selection_rows=None, best_index=None, data_label: str = "") -> str:
    N = observation_count(dims)
    P = effective_params(params)
    ll = float(trace[-1]) if trace else math.nan
    steps = np.diff(np.asarray(trace, dtype=float)) if len(trace) > 1 else np.zeros(0)
    min_step = float(steps.min()) if steps.size else 0.0
    out = [
        "netinf run report",
        f"data: {data_label or 'n/a'}",
        f"dimensions: p={dims.p} k={dims.k} T={dims.T} n_R={dims.n_R}",
        f"dense parameter count p^2+2kp+k^2: {param_count(dims)}",
        f"observations N=p*T*n_R: {N}",
        "penalties: " + " ".join(f"{k}={v}" for k, v in penalties.items()),
        f"iterations: {n_iter} converged: {'yes' if converged else 'no'}",
        f"final log-likelihood: {ll:.6f}",
        f"log-likelihood trace monotone (slack 1e-8): {'yes' if min_step >= -1e-8 else 'no'} "
        f"(smallest step {min_step:.3e})",
        "nonzero coefficients: " + " ".join(
            f"{m}={int(np.count_nonzero(np.abs(getattr(params, m)) > 1e-12))}" for m in ("F", "A", "Z", "B")),
        f"effective parameters P_eff: {P}",
        f"AICc with P=P_eff: {aicc(ll, P, N):.6f}",
        "note: AICc counts nonzero coefficients; the dense count above is P of the unpenalized model.",
    ]
    if selection_rows is not None:
        out.append("")
        out.append(f"selection: {len(selection_rows)} grid points evaluated")
        if best_index is not None and best_index >= 0:
            b = selection_rows[best_index]
            pen = b["penalties"] if isinstance(b, dict) else b.penalties
            aic = b["aicc"] if isinstance(b, dict) else b.aicc
            out.append(f"selected (s_Z, s_B, s_F, s_A) = {tuple(pen)} with AICc {aic:.6f}")
    if gene_names is not None:
        out.append("")
        out.append("hub comparison (reported, not asserted):")
        out.extend(hub_comparison(params, gene_names, threshold))
    return "\n".join(out) + "\n"
