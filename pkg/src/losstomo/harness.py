"""Replication experiments: seeded runs, aggregation, CSV/markdown output.

A run sweeps probe counts x replications x estimators over one topology.
Replication r of a run draws its simulation seed from the master seed with
a fixed splitting function, so a config maps to byte-identical output no
matter how cells are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analysis import empirical_moments, var_upstream
from .decompose import DTreePlan, decompose
from .estimators import METHODS, FUSION_METHODS, estimate_network
from .probes import simulate
from .solvers import EstimationError
from .topology import parse_topology

DEFAULT_PROBES = (100, 500, 1000)
DEFAULT_REPS = 20

# the three settings used for the desk-scale statistical checks:
# two sources feeding one joint node with 2 or 3 receivers
def _star_setting(source_losses, receiver_losses) -> str:
    lines = []
    n_src = len(source_losses)
    joint = n_src
    recv0 = n_src + 1
    for nid in range(n_src + 1 + len(receiver_losses)):
        lines.append(f"node {nid}")
    for k, loss in enumerate(source_losses):
        lines.append(f"link {k + 1} {k} {joint} {loss}")
    for k, loss in enumerate(receiver_losses):
        lines.append(f"link {n_src + k + 1} {joint} {recv0 + k} {loss}")
    for k in range(n_src):
        lines.append(f"source {k}")
    for k in range(len(receiver_losses)):
        lines.append(f"receiver {recv0 + k}")
    return "\n".join(lines) + "\n"


SETTINGS = {
    "2x2-equal": _star_setting((0.01, 0.01), (0.01, 0.01)),
    "2x2-unequal": _star_setting((0.01, 0.03), (0.01, 0.03)),
    "2x3-equal": _star_setting((0.01, 0.01), (0.01, 0.01, 0.01)),
}


def replication_seed(master_seed: int, rep: int) -> int:
    """Stable per-replication seed derivation."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(rep,))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class ExperimentConfig:
    topology_text: str
    probe_counts: tuple[int, ...] = DEFAULT_PROBES
    reps: int = DEFAULT_REPS
    seed: int = 42
    estimators: tuple[str, ...] = ("mle",)

    def validate(self) -> None:
        if self.reps < 1:
            raise ValueError("replication count must be >= 1")
        if not self.probe_counts or any(n < 1 for n in self.probe_counts):
            raise ValueError("probe counts must be positive")
        if not self.estimators:
            raise ValueError("estimator list must be non-empty")
        for e in self.estimators:
            if e not in METHODS:
                raise ValueError(f"unknown estimator {e!r}; expected one of {METHODS}")


@dataclass
class TableRow:
    link: str
    estimator: str
    source: int | None
    probes: int
    reps: int  # successful replications
    mean_loss: float | None
    var_loss: float | None
    true_loss: float
    crlb_var: float | None
    clamped: int
    errors: int


@dataclass
class ReplicationTable:
    rows: list[TableRow] = field(default_factory=list)
    messages: list[str] = field(default_factory=list)


def _expected_keys(plan: DTreePlan, estimator: str):
    """Row keys (link label, source attribution) an estimator must produce."""
    if estimator == "tree-baseline":
        keys = []
        t = plan.topology
        for frag in plan.fragments:
            keys.extend((l.label, frag.source) for l in frag.links)
        for mt in plan.msource_trees:
            for s in mt.sources:
                keys.extend((l.label, s) for l in mt.links)
        return keys
    if estimator in FUSION_METHODS:
        return [(l.label, None) for mt in plan.msource_trees for l in mt.links]
    return [(l.label, None) for l in plan.logical_links]


def _crlb_loss_var(plan: DTreePlan, label: str, probes: int) -> float | None:
    """Closed-form variance where one exists: a source link into a joint node."""
    t = plan.topology
    joint_set = set(plan.joint_nodes)
    for frag in plan.fragments:
        for l in frag.links:
            if l.label == label and l.head == frag.source and l.tail in joint_set:
                return var_upstream(l.pass_rate, t.subtree_rate[l.tail], probes)
    return None


def run_experiment(cfg: ExperimentConfig, plan: DTreePlan | None = None) -> ReplicationTable:
    cfg.validate()
    if plan is None:
        plan = decompose(parse_topology(cfg.topology_text))
    true_loss = {l.label: l.loss_rate for l in plan.logical_links}

    table = ReplicationTable()
    for n in cfg.probe_counts:
        # losses[(estimator, label, source)] -> list of per-rep loss estimates
        losses: dict[tuple, list[float]] = {}
        clamped: dict[tuple, int] = {}
        errors: dict[str, int] = {e: 0 for e in cfg.estimators}
        for e in cfg.estimators:
            for key in _expected_keys(plan, e):
                losses[(e,) + key] = []
                clamped[(e,) + key] = 0
        for rep in range(cfg.reps):
            obs = simulate(plan.topology, n, replication_seed(cfg.seed, rep))
            for e in cfg.estimators:
                try:
                    est = estimate_network(obs, plan, e)
                except EstimationError as exc:
                    errors[e] += 1
                    table.messages.append(f"probes={n} rep={rep} {e}: {exc}")
                    continue
                for (label, src), le in est.links.items():
                    losses[(e, label, src)].append(le.loss_rate)
                    if le.clamped:
                        clamped[(e, label, src)] += 1
        for (e, label, src), vals in sorted(
            losses.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2] if kv[0][2] is not None else -1)
        ):
            if len(vals) >= 2:
                mean, var = empirical_moments(vals)
            elif len(vals) == 1:
                mean, var = vals[0], None
            else:
                mean = var = None
            table.rows.append(
                TableRow(
                    link=label,
                    estimator=e,
                    source=src,
                    probes=n,
                    reps=len(vals),
                    mean_loss=mean,
                    var_loss=var,
                    true_loss=true_loss[label],
                    crlb_var=_crlb_loss_var(plan, label, n),
                    clamped=clamped[(e, label, src)],
                    errors=errors[e],
                )
            )
    return table


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit(table: ReplicationTable, format: str = "csv") -> str:
    if not table.rows:
        raise ValueError("empty table")
    if format == "csv":
        return _emit_csv(table)
    if format == "markdown":
        return _emit_markdown(table)
    raise ValueError(f"unknown format {format!r}")


def _emit_csv(table: ReplicationTable) -> str:
    lines = ["link,estimator,source,probes,reps,mean_loss,var_loss,true_loss,crlb_var,clamped,errors"]
    for r in sorted(
        table.rows,
        key=lambda r: (r.estimator, r.link, r.source if r.source is not None else -1, r.probes),
    ):
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    r.link, r.estimator, r.source, r.probes, r.reps,
                    r.mean_loss, r.var_loss, r.true_loss, r.crlb_var,
                    r.clamped, r.errors,
                )
            )
        )
    return "\n".join(lines) + "\n"


def _emit_markdown(table: ReplicationTable) -> str:
    """One table per estimator: links as rows, probe counts as column groups."""
    by_est: dict[str, list[TableRow]] = {}
    for r in table.rows:
        by_est.setdefault(r.estimator, []).append(r)
    out = []
    for est in sorted(by_est):
        rows = by_est[est]
        probes = sorted({r.probes for r in rows})
        keys = sorted({(r.link, r.source) for r in rows},
                      key=lambda k: (k[0], k[1] if k[1] is not None else -1))
        out.append(f"## {est}\n")
        header = ["link"]
        for n in probes:
            header.extend((f"mean@{n}", f"var@{n}"))
        out.append("| " + " | ".join(header) + " |")
        out.append("|" + "---|" * len(header))
        cell = {(r.link, r.source, r.probes): r for r in rows}
        for label, src in keys:
            name = label if src is None else f"{label} (source {src})"
            cols = [name]
            for n in probes:
                r = cell.get((label, src, n))
                if r is None or r.mean_loss is None:
                    cols.extend(("", ""))
                else:
                    var = "" if r.var_loss is None else f"{r.var_loss:.3g}"
                    cols.extend((f"{r.mean_loss:.7f}", var))
            out.append("| " + " | ".join(cols) + " |")
        out.append("")
    return "\n".join(out) + "\n"
