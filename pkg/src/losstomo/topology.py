"""Network model: nodes, directed lossy links, and multicast-tree coverage.

A topology is a DAG in which every source has exactly one outgoing link,
every receiver is a sink, and the links reachable from a single source form
a tree (a node may have several parents overall, but at most one per source).
Link reliability is stored internally as a pass rate; topology files declare
the complementary loss rate.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property


class TopologyError(ValueError):
    """Malformed or inconsistent topology description."""


class UnsupportedTopologyError(TopologyError):
    """Valid input whose shape falls outside the supported decompositions."""


@dataclass(frozen=True)
class Link:
    id: int
    head: int
    tail: int
    pass_rate: float

    @property
    def loss_rate(self) -> float:
        return 1.0 - self.pass_rate


@dataclass(frozen=True)
class Topology:
    nodes: frozenset[int]
    links: tuple[Link, ...]
    sources: tuple[int, ...]
    receivers: tuple[int, ...]

    @cached_property
    def link_by_id(self) -> dict[int, Link]:
        return {l.id: l for l in self.links}

    @cached_property
    def out_links(self) -> dict[int, tuple[Link, ...]]:
        out: dict[int, list[Link]] = {n: [] for n in self.nodes}
        for l in self.links:
            out[l.head].append(l)
        return {n: tuple(sorted(ls, key=lambda l: l.id)) for n, ls in out.items()}

    @cached_property
    def in_links(self) -> dict[int, tuple[Link, ...]]:
        inc: dict[int, list[Link]] = {n: [] for n in self.nodes}
        for l in self.links:
            inc[l.tail].append(l)
        return {n: tuple(sorted(ls, key=lambda l: l.id)) for n, ls in inc.items()}

    def children(self, node: int) -> tuple[int, ...]:
        return tuple(l.tail for l in self.out_links[node])

    @cached_property
    def tree_nodes(self) -> dict[int, frozenset[int]]:
        """Node set of each source's multicast tree, by reachability."""
        trees = {}
        for s in self.sources:
            seen = {s}
            stack = [s]
            while stack:
                u = stack.pop()
                for l in self.out_links[u]:
                    if l.tail not in seen:
                        seen.add(l.tail)
                        stack.append(l.tail)
            trees[s] = frozenset(seen)
        return trees

    @cached_property
    def tree_links(self) -> dict[int, frozenset[int]]:
        return {
            s: frozenset(l.id for l in self.links if l.head in nodes)
            for s, nodes in self.tree_nodes.items()
        }

    def sources_reaching(self, node: int) -> tuple[int, ...]:
        return tuple(s for s in self.sources if node in self.tree_nodes[s])

    @cached_property
    def descendants(self) -> dict[int, frozenset[int]]:
        """All nodes strictly below each node."""
        order = toposort(self)
        desc: dict[int, set[int]] = {n: set() for n in self.nodes}
        for u in reversed(order):
            for c in self.children(u):
                desc[u].add(c)
                desc[u] |= desc[c]
        return {n: frozenset(d) for n, d in desc.items()}

    def receivers_under(self, node: int) -> tuple[int, ...]:
        """R(node): receivers attached to the subtree rooted at node."""
        below = self.descendants[node] | {node}
        return tuple(r for r in self.receivers if r in below)

    def parent_in_tree(self, node: int, source: int) -> int:
        """The unique parent of node on the path up to source."""
        members = self.tree_nodes[source]
        if node not in members or node == source:
            raise TopologyError(f"node {node} has no parent in the tree of source {source}")
        parents = [l.head for l in self.in_links[node] if l.head in members]
        assert len(parents) == 1, "per-source tree shape was validated at parse time"
        return parents[0]

    def path_rate(self, source: int, node: int) -> float:
        """True pass rate A(source, node) of the path from source down to node."""
        rate = 1.0
        cur = node
        members = self.tree_nodes[source]
        while cur != source:
            parent = self.parent_in_tree(cur, source)
            link = next(l for l in self.in_links[cur] if l.head == parent and l.head in members)
            rate *= link.pass_rate
            cur = parent
        return rate

    @cached_property
    def subtree_rate(self) -> dict[int, float]:
        """True beta of each node: P(at least one receiver below sees a probe at the node)."""
        order = toposort(self)
        beta: dict[int, float] = {}
        for u in reversed(order):
            kids = self.out_links[u]
            if not kids:
                beta[u] = 1.0
            else:
                miss = 1.0
                for l in kids:
                    miss *= 1.0 - l.pass_rate * beta[l.tail]
                beta[u] = 1.0 - miss
        return beta


def toposort(t: Topology) -> list[int]:
    indeg = {n: len(t.in_links[n]) for n in t.nodes}
    ready = sorted(n for n, d in indeg.items() if d == 0)
    order = []
    while ready:
        u = ready.pop(0)
        order.append(u)
        for l in t.out_links[u]:
            indeg[l.tail] -= 1
            if indeg[l.tail] == 0:
                ready.append(l.tail)
        ready.sort()
    if len(order) != len(t.nodes):
        raise TopologyError("topology contains a cycle")
    return order


def ancestors(t: Topology, node: int, source: int) -> tuple[int, ...]:
    """Ordered ancestors of node on the path up to source: (parent, ..., source)."""
    if node not in t.tree_nodes[source]:
        raise TopologyError(f"node {node} is not covered by the tree of source {source}")
    chain = []
    cur = node
    while cur != source:
        cur = t.parent_in_tree(cur, source)
        chain.append(cur)
    return tuple(chain)


def parse_topology(text: str) -> Topology:
    """Parse the line-oriented topology format.

    Directives: ``node <id>``, ``link <id> <from> <to> <loss_rate>``,
    ``source <node_id>``, ``receiver <node_id>``.  ``#`` starts a comment.
    Loss rates are converted to pass rates on ingest.
    """
    nodes: set[int] = set()
    links: list[Link] = []
    link_ids: set[int] = set()
    sources: list[int] = []
    receivers: list[int] = []

    def fail(lineno: int, msg: str):
        raise TopologyError(f"line {lineno}: {msg}")

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        try:
            if kind == "node":
                (nid,) = map(int, parts[1:])
                if nid < 0:
                    fail(lineno, f"negative node id {nid}")
                if nid in nodes:
                    fail(lineno, f"duplicate node id {nid}")
                nodes.add(nid)
            elif kind == "link":
                lid, head, tail = map(int, parts[1:4])
                (loss,) = map(float, parts[4:])
                if lid < 0:
                    fail(lineno, f"negative link id {lid}")
                if lid in link_ids:
                    fail(lineno, f"duplicate link id {lid}")
                if not 0.0 <= loss <= 1.0:
                    fail(lineno, f"pass rate out of range: link {lid} loss {loss}")
                if head not in nodes or tail not in nodes:
                    fail(lineno, f"link {lid} references undeclared node")
                link_ids.add(lid)
                links.append(Link(lid, head, tail, 1.0 - loss))
            elif kind == "source":
                (nid,) = map(int, parts[1:])
                if nid not in nodes:
                    fail(lineno, f"source references undeclared node {nid}")
                if nid in sources:
                    fail(lineno, f"duplicate source {nid}")
                sources.append(nid)
            elif kind == "receiver":
                (nid,) = map(int, parts[1:])
                if nid not in nodes:
                    fail(lineno, f"receiver references undeclared node {nid}")
                if nid in receivers:
                    fail(lineno, f"duplicate receiver {nid}")
                receivers.append(nid)
            else:
                fail(lineno, f"unknown directive {kind!r}")
        except (ValueError, TypeError) as exc:
            if isinstance(exc, TopologyError):
                raise
            fail(lineno, f"syntax error: {line!r}")

    if not links:
        raise TopologyError("no links")
    if not sources:
        raise TopologyError("no sources declared")
    if not receivers:
        raise TopologyError("no receivers declared")

    t = Topology(
        nodes=frozenset(nodes),
        links=tuple(sorted(links, key=lambda l: l.id)),
        sources=tuple(sorted(sources)),
        receivers=tuple(sorted(receivers)),
    )
    validate(t)
    return t


def validate(t: Topology) -> None:
    toposort(t)  # raises on cycles
    src_set, recv_set = set(t.sources), set(t.receivers)
    if src_set & recv_set:
        raise TopologyError(f"nodes {sorted(src_set & recv_set)} declared both source and receiver")
    for s in t.sources:
        if t.in_links[s]:
            raise TopologyError(f"source {s} has incoming links")
        if len(t.out_links[s]) != 1:
            raise TopologyError(f"source {s} must have exactly one outgoing link")
    for r in t.receivers:
        if t.out_links[r]:
            raise TopologyError(f"receiver {r} has outgoing links")
    for n in t.nodes:
        if not t.out_links[n] and n not in recv_set:
            raise TopologyError(f"node {n} is a sink but not declared a receiver")
        if not t.in_links[n] and n not in src_set:
            raise TopologyError(f"node {n} is a root but not declared a source")
    covered = set().union(*t.tree_nodes.values())
    for r in t.receivers:
        if r not in covered:
            raise TopologyError(f"unreachable receiver {r}")
    # within one multicast tree every node must have a single parent
    for s in t.sources:
        members = t.tree_nodes[s]
        for n in members - {s}:
            parents = [l for l in t.in_links[n] if l.head in members]
            if len(parents) != 1:
                raise TopologyError(
                    f"node {n} has {len(parents)} parents inside the tree of source {s}"
                )
