"""Information-theoretic quantities and replication moments.

All closed forms take pass rates: A is a source-to-node path rate, beta a
subtree rate.  Reports tag whether the inputs were simulation ground truth
or plug-in estimates, since the two roles give different numbers.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

from .decompose import DTreePlan


def fisher_information(A: float, beta: float, n: int = 1) -> float:
    """Information about the subtree rate carried by n probes from one source."""
    if not 0.0 < A <= 1.0:
        raise ValueError(f"path rate {A} outside (0, 1]")
    if not 0.0 < beta < 1.0:
        raise ValueError(f"subtree rate {beta} outside (0, 1): information undefined")
    return n * A / (beta * (1.0 - A * beta))


def crlb_beta(per_source, beta: float) -> float:
    """Reciprocal of the summed information; also the weighted-average low bound.

    ``per_source`` is a sequence of (A, n) pairs, one per contributing source.
    """
    pairs = list(per_source)
    if not pairs:
        raise ValueError("at least one source is required")
    total = sum(fisher_information(a, beta, n) for a, n in pairs)
    return 1.0 / total


def var_upstream(A: float, beta: float, n: int) -> float:
    """Variance of a source-to-node path estimate from n probes."""
    if not 0.0 < A <= 1.0:
        raise ValueError(f"path rate {A} outside (0, 1]")
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"subtree rate {beta} outside (0, 1]")
    if n < 1:
        raise ValueError("probe count must be positive")
    return A * (1.0 - A * beta) / (n * beta)


def empirical_moments(values) -> tuple[float, float]:
    """Mean and unbiased (n-1 denominator) sample variance."""
    vals = [float(v) for v in values]
    if len(vals) < 2:
        raise ValueError("need at least 2 replications for moments")
    mean = math.fsum(vals) / len(vals)
    var = math.fsum((v - mean) ** 2 for v in vals) / (len(vals) - 1)
    return mean, var


@dataclass(frozen=True)
class InfoRow:
    node: int
    source: int | None  # None for pooled quantities
    quantity: str
    value: float
    provenance: str  # true-parameters | plug-in


def info_report(plan: DTreePlan, probes: dict[int, int] | int, provenance="true-parameters",
                path_rates=None, betas=None) -> list[InfoRow]:
    """Per-joint-node information and variance bounds.

    With the default provenance the simulation ground truth is used; pass
    ``path_rates`` ((source, node) -> A) and ``betas`` (node -> beta) to
    evaluate the same formulas at plug-in estimates.
    """
    t = plan.topology
    if isinstance(probes, int):
        probes = {s: probes for s in t.sources}
    rows: list[InfoRow] = []
    for mt in plan.msource_trees:
        i = mt.joint
        beta = betas[i] if betas is not None else t.subtree_rate[i]
        pairs = []
        for s in mt.sources:
            a = path_rates[(s, i)] if path_rates is not None else t.path_rate(s, i)
            n = probes[s]
            pairs.append((a, n))
            rows.append(InfoRow(i, s, "per_probe_information", fisher_information(a, beta), provenance))
            rows.append(InfoRow(i, s, "var_path_estimate", var_upstream(a, beta, n), provenance))
        total = sum(fisher_information(a, beta, n) for a, n in pairs)
        rows.append(InfoRow(i, None, "total_information", total, provenance))
        rows.append(InfoRow(i, None, "crlb_var_beta", 1.0 / total, provenance))
    return rows


def report_csv(rows) -> str:
    buf = io.StringIO()
    buf.write("node,source,quantity,value,provenance\n")
    for r in rows:
        src = "" if r.source is None else r.source
        buf.write(f"{r.node},{src},{r.quantity},{r.value!r},{r.provenance}\n")
    return buf.getvalue()
