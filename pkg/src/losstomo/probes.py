"""Seeded Bernoulli probe simulation and reduction to pass counts.

Each source multicasts its probes down its own tree; every link drops a
probe independently with its loss rate.  Only receiver bits are observable;
internal-node states are inferred with the OR rule over the receivers below
a node, which is what the pass counts are built from.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .topology import Topology, TopologyError, toposort


def source_stream(seed: int, source: int) -> np.random.Generator:
    """Independent per-source RNG stream derived from one experiment seed."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(source,)))


@dataclass(frozen=True)
class ObservationSet:
    """Receiver bit matrices, one per source (receivers x probes)."""

    probes: dict[int, int]  # source -> n^s
    receivers: dict[int, tuple[int, ...]]  # source -> receivers of T^s, sorted
    bits: dict[int, np.ndarray]  # source -> bool matrix, row order = receivers

    def receiver_row(self, source: int, receiver: int) -> np.ndarray:
        return self.bits[source][self.receivers[source].index(receiver)]

    def to_csv(self) -> str:
        """Audit dump with columns source,probe,receiver,bit (probes 1-based)."""
        buf = io.StringIO()
        buf.write("source,probe,receiver,bit\n")
        for s in sorted(self.probes):
            mat = self.bits[s]
            for o in range(self.probes[s]):
                for row, r in enumerate(self.receivers[s]):
                    buf.write(f"{s},{o + 1},{r},{int(mat[row, o])}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ObservationSet":
        probes: dict[int, int] = {}
        cells: dict[int, dict[tuple[int, int], int]] = {}
        lines = text.strip().splitlines()
        assert lines[0] == "source,probe,receiver,bit"
        for line in lines[1:]:
            s, o, r, b = map(int, line.split(","))
            probes[s] = max(probes.get(s, 0), o)
            cells.setdefault(s, {})[(r, o - 1)] = b
        receivers = {}
        bits = {}
        for s, entries in cells.items():
            recv = tuple(sorted({r for r, _ in entries}))
            mat = np.zeros((len(recv), probes[s]), dtype=bool)
            for (r, o), b in entries.items():
                mat[recv.index(r), o] = bool(b)
            receivers[s] = recv
            bits[s] = mat
        return cls(probes=probes, receivers=receivers, bits=bits)


@dataclass(frozen=True)
class PooledCounts:
    """n_i(s) for every node of every tree, plus the probe totals."""

    probes: dict[int, int]  # source -> n^s
    counts: dict[tuple[int, int], int]  # (node, source) -> n_i(s)

    def count(self, node: int, source: int) -> int:
        try:
            return self.counts[(node, source)]
        except KeyError:
            raise TopologyError(f"node {node} is not in the tree of source {source}") from None

    def pooled(self, node: int, sources) -> int:
        """n_i = sum of n_i(s) over the given sources."""
        return sum(self.count(node, s) for s in sources)


def simulate(t: Topology, probes: dict[int, int] | int, seed: int) -> ObservationSet:
    """Run one probing experiment; fully determined by (t, probes, seed)."""
    if isinstance(probes, int):
        probes = {s: probes for s in t.sources}
    for s in t.sources:
        if probes.get(s, 0) < 1:
            raise ValueError(f"source {s} needs a positive probe count")

    order = toposort(t)
    receivers = {}
    bits = {}
    for s in t.sources:
        rng = source_stream(seed, s)
        n = probes[s]
        members = t.tree_nodes[s]
        state: dict[int, np.ndarray] = {s: np.ones(n, dtype=bool)}
        for u in order:
            if u not in members:
                continue
            for l in t.out_links[u]:
                passed = rng.random(n) < l.pass_rate
                state[l.tail] = state[u] & passed
        recv = tuple(r for r in t.receivers if r in members)
        receivers[s] = recv
        bits[s] = np.vstack([state[r] for r in recv])
    return ObservationSet(probes=dict(probes), receivers=receivers, bits=bits)


def count_pass(obs: ObservationSet, t: Topology) -> PooledCounts:
    """Reduce receiver bits to n_i(s) for every node i of every tree T^s."""
    counts: dict[tuple[int, int], int] = {}
    for s, recv in obs.receivers.items():
        mat = obs.bits[s]
        row = {r: k for k, r in enumerate(recv)}
        for node in t.tree_nodes[s]:
            under = [row[r] for r in t.receivers_under(node) if r in row]
            if not under:
                counts[(node, s)] = 0
                continue
            seen = np.any(mat[under], axis=0) if len(under) > 1 else mat[under[0]]
            counts[(node, s)] = int(np.count_nonzero(seen))
    return PooledCounts(probes=dict(obs.probes), counts=counts)


def gamma_hat(counts: PooledCounts, node: int, source: int) -> float:
    """Empirical end-to-end pass rate n_i(s) / n^s."""
    return counts.count(node, source) / counts.probes[source]
