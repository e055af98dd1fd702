"""Directed graph structure and the structural queries used by the EMP theorems."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

Edge = tuple[int, int]


class GraphError(ValueError):
    """Raised when a graph violates a structural invariant."""


@dataclass(frozen=True)
class NodeSets:
    """The four distinguished node sets of a digraph.

    Sources have no in-neighbors, sinks have no out-neighbors. A dource is a
    non-source node with an out-neighbor that receives edges from all of the
    node's in-neighbors; a dink is a non-sink node with an in-neighbor that
    sends edges to all of the node's out-neighbors.
    """

    sources: frozenset[int]
    sinks: frozenset[int]
    dources: frozenset[int]
    dinks: frozenset[int]


@dataclass(frozen=True)
class InducedSubgraph:
    """A relabeled induced subgraph together with the label maps to its parent."""

    graph: "Digraph"
    to_parent: dict[int, int] = field(compare=False)
    from_parent: dict[int, int] = field(compare=False)

    def parent_edges(self) -> frozenset[Edge]:
        """Edges of the subgraph expressed in parent-graph labels."""
        tp = self.to_parent
        return frozenset((tp[a], tp[b]) for a, b in self.graph.edges)


@dataclass(frozen=True)
class ReturnPathReport:
    """Witness return paths for a node subset, possibly truncated at a cap."""

    paths: tuple[tuple[int, ...], ...]
    truncated: bool

    @property
    def empty(self) -> bool:
        return not self.paths


class Digraph:
    """An immutable simple digraph on nodes 1..n with no self-loops.

    Nodes are 1-based integers to match the usual labeling of network nodes.
    Construction validates the node range, rejects self-loops, and requires
    weak connectivity; use :meth:`unchecked` when extracting subgraphs that
    may be disconnected. All queries are pure, so instances are safe to share
    across threads.
    """

    __slots__ = ("n", "edges", "_out", "_in")

    def __init__(self, n: int, edges, *, _check_connected: bool = True):
        if n < 1:
            raise GraphError(f"node count must be positive, got {n}")
        edge_list = list(edges)
        edge_set = frozenset((int(a), int(b)) for a, b in edge_list)
        if len(edge_set) != len(edge_list):
            raise GraphError("duplicate edges are not allowed")
        for a, b in edge_set:
            if a == b:
                raise GraphError(f"self-loop {a}->{b} is not allowed")
            if not (1 <= a <= n and 1 <= b <= n):
                raise GraphError(f"edge {a}->{b} has an endpoint outside 1..{n}")
        out: dict[int, set[int]] = {k: set() for k in range(1, n + 1)}
        inn: dict[int, set[int]] = {k: set() for k in range(1, n + 1)}
        for a, b in edge_set:
            out[a].add(b)
            inn[b].add(a)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", edge_set)
        object.__setattr__(self, "_out", {k: frozenset(v) for k, v in out.items()})
        object.__setattr__(self, "_in", {k: frozenset(v) for k, v in inn.items()})
        if _check_connected and not self.is_weakly_connected():
            raise GraphError("graph is not weakly connected")

    def __setattr__(self, name, value):
        raise AttributeError("Digraph is immutable")

    @classmethod
    def unchecked(cls, n: int, edges) -> "Digraph":
        """Build a graph without the weak-connectivity check (for sub-extraction)."""
        return cls(n, edges, _check_connected=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Digraph):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"Digraph(n={self.n}, edges={sorted(self.edges)})"

    @property
    def nodes(self) -> range:
        return range(1, self.n + 1)

    def out_neighbors(self, k: int) -> frozenset[int]:
        return self._out[k]

    def in_neighbors(self, k: int) -> frozenset[int]:
        return self._in[k]

    def is_weakly_connected(self) -> bool:
        """True if the undirected version of the edge set connects all nodes."""
        if self.n == 1:
            return True
        seen = {1}
        stack = [1]
        while stack:
            u = stack.pop()
            for v in self._out[u] | self._in[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == self.n

    # -- distinguished node sets ------------------------------------------

    def sources(self) -> frozenset[int]:
        """Nodes with no in-neighbors."""
        return frozenset(k for k in self.nodes if not self._in[k])

    def sinks(self) -> frozenset[int]:
        """Nodes with no out-neighbors."""
        return frozenset(k for k in self.nodes if not self._out[k])

    def dources(self) -> frozenset[int]:
        """Non-source nodes with an out-neighbor fed by all their in-neighbors."""
        found = set()
        for j in self.nodes:
            ins = self._in[j]
            if not ins:
                continue  # sources are reported separately
            for i in self._out[j]:
                if all((k, i) in self.edges for k in ins):
                    found.add(j)
                    break
        return frozenset(found)

    def dinks(self) -> frozenset[int]:
        """Non-sink nodes with an in-neighbor feeding all their out-neighbors."""
        found = set()
        for j in self.nodes:
            outs = self._out[j]
            if not outs:
                continue  # sinks are reported separately
            for k in self._in[j]:
                if all((k, i) in self.edges for i in outs):
                    found.add(j)
                    break
        return frozenset(found)

    def node_sets(self) -> NodeSets:
        return NodeSets(self.sources(), self.sinks(), self.dources(), self.dinks())

    # -- reachability ------------------------------------------------------

    def exists_path(self, i: int, j: int) -> bool:
        """True iff a directed path of length >= 1 leads from i to j.

        For i == j this asks whether i lies on a cycle.
        """
        self._check_node(i)
        self._check_node(j)
        seen: set[int] = set()
        stack = list(self._out[i])
        while stack:
            u = stack.pop()
            if u == j:
                return True
            if u in seen:
                continue
            seen.add(u)
            stack.extend(self._out[u])
        return False

    def _check_node(self, k: int) -> None:
        if not (1 <= k <= self.n):
            raise GraphError(f"node {k} is outside 1..{self.n}")

    def reachable_within(self, allowed, seeds, forward: bool = True) -> set[int]:
        """Nodes of `allowed` reachable from `seeds` (which are included) along
        edges staying inside `allowed`; walk in-edges when forward is False."""
        allowed_set = frozenset(allowed)
        nbrs = self._out if forward else self._in
        seen = set(s for s in seeds if s in allowed_set)
        stack = list(seen)
        while stack:
            u = stack.pop()
            for v in nbrs[u]:
                if v in allowed_set and v not in seen:
                    seen.add(v)
                    stack.append(v)
        return seen

    # -- subgraphs ---------------------------------------------------------

    def induced_subgraph(self, nodes) -> InducedSubgraph:
        """Extract the subgraph on `nodes` with all edges linking them.

        The result is relabeled to 1..k (ascending parent order) and carries
        the maps between child and parent labels. Connectivity is not
        enforced on the result.
        """
        node_set = frozenset(nodes)
        if not node_set:
            raise GraphError("induced subgraph needs a nonempty node set")
        for k in node_set:
            self._check_node(k)
        parents = sorted(node_set)
        from_parent = {p: c + 1 for c, p in enumerate(parents)}
        to_parent = {c: p for p, c in from_parent.items()}
        sub_edges = [
            (from_parent[a], from_parent[b])
            for a, b in self.edges
            if a in node_set and b in node_set
        ]
        return InducedSubgraph(
            Digraph.unchecked(len(parents), sub_edges), to_parent, from_parent
        )

    # -- return paths ------------------------------------------------------

    def return_paths(self, va, cap: int = 1000) -> ReturnPathReport:
        """Find directed paths that leave `va`, traverse its complement, and re-enter.

        Emptiness is decided exactly by reachability; the enumerated witness
        list is capped at `cap` simple paths with a truncation flag. Each
        witness reads a -> b1 -> ... -> bk -> a' with the endpoints in `va`
        and all interior nodes outside it.
        """
        va_set = frozenset(va)
        if not va_set or va_set == frozenset(self.nodes):
            raise GraphError("va must be a proper nonempty subset of the nodes")
        for k in va_set:
            self._check_node(k)
        vb = frozenset(self.nodes) - va_set
        entry_edges = sorted((a, b) for a, b in self.edges if a in va_set and b in vb)
        exit_tails = {u for u, w in self.edges if u in vb and w in va_set}
        heads = {b for _, b in entry_edges}
        reachable = self.reachable_within(vb, heads)
        if not (reachable & exit_tails):
            return ReturnPathReport((), False)
        # can_exit prunes the DFS to nodes that still lead back into va
        can_exit = self.reachable_within(vb, exit_tails, forward=False)
        paths: list[tuple[int, ...]] = []
        truncated = False

        def extend(prefix: list[int], on_path: set[int]) -> bool:
            u = prefix[-1]
            for w in sorted(self._out[u]):
                if len(paths) >= cap:
                    return False
                if w in va_set:
                    paths.append(tuple(prefix + [w]))
                elif w not in on_path and w in can_exit:
                    on_path.add(w)
                    if not extend(prefix + [w], on_path):
                        return False
                    on_path.remove(w)
            return True

        for a, b in entry_edges:
            if b not in can_exit:
                continue
            if not extend([a, b], {b}):
                truncated = True
                break
        return ReturnPathReport(tuple(paths), truncated)


# -- file formats -----------------------------------------------------------

_GRAPH_KEYS = {"n", "edges"}
_GRAPH_OPTIONAL_KEYS = {"known_edges"}


def _parse_edge_list(raw, what: str) -> list[Edge]:
    if not isinstance(raw, list):
        raise GraphError(f"'{what}' must be a list of [from, to] pairs")
    edges = []
    for item in raw:
        if (
            not isinstance(item, list)
            or len(item) != 2
            or not all(isinstance(x, int) for x in item)
        ):
            raise GraphError(f"'{what}' entries must be [from, to] integer pairs")
        edges.append((item[0], item[1]))
    return edges


def graph_from_json(text: str) -> tuple[Digraph, frozenset[Edge]]:
    """Parse the graph JSON schema; returns the graph and its known edges.

    Schema: {"n": <int>, "edges": [[from, to], ...], "known_edges": [...]}.
    Unknown keys are rejected.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise GraphError("graph JSON must be an object")
    unknown = set(obj) - _GRAPH_KEYS - _GRAPH_OPTIONAL_KEYS
    if unknown:
        raise GraphError(f"unknown key {sorted(unknown)[0]!r} in graph JSON")
    missing = _GRAPH_KEYS - set(obj)
    if missing:
        raise GraphError(f"missing key {sorted(missing)[0]!r} in graph JSON")
    if not isinstance(obj["n"], int):
        raise GraphError("'n' must be an integer")
    g = Digraph(obj["n"], _parse_edge_list(obj["edges"], "edges"))
    known = frozenset(_parse_edge_list(obj.get("known_edges", []), "known_edges"))
    bad = known - g.edges
    if bad:
        a, b = sorted(bad)[0]
        raise GraphError(f"known edge {a}->{b} is not an edge of the graph")
    return g, known


def graph_to_json(g: Digraph, known_edges=()) -> str:
    obj = {"n": g.n, "edges": [list(e) for e in sorted(g.edges)]}
    if known_edges:
        obj["known_edges"] = [list(e) for e in sorted(known_edges)]
    return json.dumps(obj)


_DOT_EDGE = re.compile(r"^(\d+)\s*->\s*(\d+)$")
_DOT_HEADER = re.compile(r"^\s*digraph\b[^{]*\{")


def graph_from_dot(text: str) -> Digraph:
    """Parse a minimal DOT digraph: `a -> b;` statements with integer names."""
    body = _DOT_HEADER.sub("", text, count=1).replace("}", " ").replace("\n", " ")
    edges = []
    for statement in body.split(";"):
        statement = statement.strip()
        if not statement:
            continue
        m = _DOT_EDGE.match(statement)
        if not m:
            raise GraphError(f"DOT statement {statement!r}: expected 'a -> b;'")
        a, b = int(m.group(1)), int(m.group(2))
        if a < 1 or b < 1:
            raise GraphError(f"DOT statement {statement!r}: node names must be positive")
        edges.append((a, b))
    if not edges:
        raise GraphError("DOT input contains no edges")
    n = max(max(a, b) for a, b in edges)
    return Digraph(n, edges)
