"""Attack graphs: validated node/edge containers, simple-path enumeration and
node removal (the mobility mutation)."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

NodeId = int


class GraphError(ValueError):
    """Raised when an attack graph or a mutation of it is invalid."""


class NodeKind(str, enum.Enum):
    ENTRY = "entry"
    INTERMEDIATE = "intermediate"
    TARGET = "target"


class NodeType(str, enum.Enum):
    OR = "OR"
    AND = "AND"


@dataclass(frozen=True)
class Node:
    id: NodeId
    value: float
    kind: NodeKind = NodeKind.INTERMEDIATE
    node_type: NodeType = NodeType.OR


class Edge(NamedTuple):
    src: NodeId
    dst: NodeId


@dataclass(frozen=True, order=True)
class AttackPath:
    """A simple entry-to-target node sequence."""

    nodes: tuple[NodeId, ...]

    @property
    def edges(self) -> tuple[Edge, ...]:
        return tuple(Edge(u, v) for u, v in zip(self.nodes, self.nodes[1:]))

    @property
    def entry(self) -> NodeId:
        return self.nodes[0]

    @property
    def target(self) -> NodeId:
        return self.nodes[-1]

    def __iter__(self) -> Iterator[NodeId]:
        return iter(self.nodes)

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, u: object) -> bool:
        return u in self.nodes


@dataclass(frozen=True)
class AttackGraph:
    """Directed attack graph with node values and entry/target designations.

    Instances are immutable; use :func:`build_graph` to construct a validated
    one and :func:`remove_node` to derive the graph after a node leaves.
    """

    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    entry: frozenset[NodeId]
    targets: frozenset[NodeId]
    _by_id: dict = field(init=False, repr=False, compare=False, hash=False)
    _succ: dict = field(init=False, repr=False, compare=False, hash=False)
    _degree: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        by_id = {n.id: n for n in self.nodes}
        succ: dict[NodeId, list[NodeId]] = {n.id: [] for n in self.nodes}
        degree = dict.fromkeys(by_id, 0)
        for e in self.edges:
            succ[e.src].append(e.dst)
            degree[e.src] += 1
            degree[e.dst] += 1
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "_succ", {u: tuple(sorted(vs)) for u, vs in succ.items()})
        object.__setattr__(self, "_degree", degree)

    # -- lookups -------------------------------------------------------------
    def __contains__(self, u: object) -> bool:
        return u in self._by_id

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def node_ids(self) -> tuple[NodeId, ...]:
        return tuple(n.id for n in self.nodes)

    @property
    def intermediates(self) -> tuple[NodeId, ...]:
        return tuple(n.id for n in self.nodes if n.kind is NodeKind.INTERMEDIATE)

    def node(self, u: NodeId) -> Node:
        try:
            return self._by_id[u]
        except KeyError:
            raise GraphError(f"unknown node {u}") from None

    def value(self, u: NodeId) -> float:
        return self.node(u).value

    def successors(self, u: NodeId) -> tuple[NodeId, ...]:
        return self._succ[u]

    def has_edge(self, u: NodeId, v: NodeId) -> bool:
        return v in self._succ.get(u, ())

    def degree(self, u: NodeId) -> int:
        """Total (in + out) degree."""
        if u not in self._degree:
            raise GraphError(f"unknown node {u}")
        return self._degree[u]

    @property
    def max_value(self) -> float:
        return max((n.value for n in self.nodes), default=0.0)

    @property
    def max_degree(self) -> int:
        return max(self._degree.values(), default=0)


def build_graph(
    nodes: Mapping[NodeId, float] | Iterable[Node],
    edges: Iterable[tuple[NodeId, NodeId]],
    entry: Iterable[NodeId],
    targets: Iterable[NodeId],
) -> AttackGraph:
    """Validate the inputs and return an :class:`AttackGraph`.

    ``nodes`` is either a mapping of id to value (kinds are derived from
    ``entry``/``targets``) or an iterable of :class:`Node` whose kinds must
    agree with those sets.
    """
    entry = frozenset(int(u) for u in entry)
    targets = frozenset(int(u) for u in targets)
    if not entry:
        raise GraphError("entry set is empty")
    if not targets:
        raise GraphError("target set is empty")
    if entry & targets:
        raise GraphError(f"entry and target sets overlap: {sorted(entry & targets)}")

    def kind_of(u: NodeId) -> NodeKind:
        if u in entry:
            return NodeKind.ENTRY
        if u in targets:
            return NodeKind.TARGET
        return NodeKind.INTERMEDIATE

    if isinstance(nodes, Mapping):
        items = [Node(int(u), float(v), kind_of(int(u))) for u, v in nodes.items()]
    else:
        items = list(nodes)
    seen: dict[NodeId, Node] = {}
    for n in items:
        if n.id in seen:
            raise GraphError(f"duplicate node {n.id}")
        if n.id < 0:
            raise GraphError(f"node id must be non-negative, got {n.id}")
        if n.kind is not kind_of(n.id):
            raise GraphError(f"node {n.id} declared {n.kind.value} but listed as {kind_of(n.id).value}")
        if n.node_type is not NodeType.OR:
            raise GraphError(f"node {n.id}: node type {n.node_type.value} is unsupported (OR only)")
        if not math.isfinite(n.value) or n.value < 0:
            raise GraphError(f"node {n.id}: value must be finite and non-negative")
        if n.kind is NodeKind.ENTRY and n.value != 0:
            raise GraphError(f"entry node {n.id} must carry value 0")
        seen[n.id] = n
    for u in entry | targets:
        if u not in seen:
            raise GraphError(f"entry/target node {u} is not in the node set")

    edge_set: set[Edge] = set()
    for src, dst in edges:
        e = Edge(int(src), int(dst))
        if e.src not in seen or e.dst not in seen:
            raise GraphError(f"edge {e.src}->{e.dst} has a dangling endpoint")
        if e.src == e.dst:
            raise GraphError(f"self-loop on node {e.src}")
        if e in edge_set:
            raise GraphError(f"duplicate edge {e.src}->{e.dst}")
        edge_set.add(e)

    return AttackGraph(
        nodes=tuple(sorted(seen.values(), key=lambda n: n.id)),
        edges=tuple(sorted(edge_set)),
        entry=entry,
        targets=targets,
    )


def enumerate_attack_paths(
    g: AttackGraph, entries: Iterable[NodeId] | None = None
) -> list[AttackPath]:
    """All simple entry->target paths in lexicographic order.

    A path ends at the first target it reaches. ``entries`` restricts the
    start nodes to a subset of ``g.entry``.
    """
    starts = sorted(g.entry if entries is None else set(entries) & g.entry)
    targets = g.targets
    out: list[AttackPath] = []
    for s in starts:
        path = [s]
        on_path = {s}
        stack = [iter(g.successors(s))]
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                stack.pop()
                on_path.discard(path.pop())
                continue
            if nxt in on_path:
                continue
            if nxt in targets:
                out.append(AttackPath(tuple(path) + (nxt,)))
                continue
            path.append(nxt)
            on_path.add(nxt)
            stack.append(iter(g.successors(nxt)))
    out.sort()
    return out


def is_attack_path(g: AttackGraph, nodes: Sequence[NodeId]) -> bool:
    if len(nodes) < 2 or len(set(nodes)) != len(nodes):
        return False
    if nodes[0] not in g.entry or nodes[-1] not in g.targets:
        return False
    if any(u in g.targets for u in nodes[:-1]):
        return False
    return all(u in g and g.has_edge(u, v) for u, v in zip(nodes, nodes[1:]))


def remove_node(g: AttackGraph, u: NodeId) -> AttackGraph:
    """Return ``g`` without intermediate node ``u`` and all its incident edges."""
    if u not in g:
        raise GraphError(f"unknown node {u}")
    if u in g.entry or u in g.targets:
        raise GraphError(f"node {u} is an entry/target node and cannot be removed")
    return AttackGraph(
        nodes=tuple(n for n in g.nodes if n.id != u),
        edges=tuple(e for e in g.edges if u not in e),
        entry=g.entry,
        targets=g.targets,
    )


def remove_nodes(g: AttackGraph, us: Iterable[NodeId]) -> AttackGraph:
    for u in us:
        g = remove_node(g, u)
    return g
