"""Classify digraphs as trees, loops, or parallel-paths networks."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Union

from .digraph import Digraph


class NotPpnError(ValueError):
    """Raised when a graph is not a parallel-paths network."""


class TopologyKind(str, enum.Enum):
    TREE = "Tree"
    LOOP = "Loop"
    PPN = "Ppn"
    GENERAL = "General"


@dataclass(frozen=True)
class PpnDecomposition:
    """A parallel-paths network split into its source, sink, and paths.

    Each path is the full node sequence [source, internals..., sink]; within
    a path the sequence order is the traversal order, which is what the
    position comparisons of the PPN theorem are evaluated against.
    """

    source: int
    sink: int
    paths: tuple[tuple[int, ...], ...]

    @property
    def n_paths(self) -> int:
        return len(self.paths)

    def internals(self, path: tuple[int, ...]) -> tuple[int, ...]:
        return path[1:-1]

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "sink": self.sink,
            "paths": [list(p) for p in self.paths],
        }


@dataclass(frozen=True)
class TopologyClass:
    """Classification verdict; `detail` holds the loop cycle or the PPN split."""

    kind: TopologyKind
    detail: Optional[Union[tuple[int, ...], PpnDecomposition]] = None

    def to_dict(self) -> dict:
        out: dict = {"class": self.kind.value}
        if self.kind is TopologyKind.LOOP:
            out["detail"] = {"order": len(self.detail), "cycle": list(self.detail)}
        elif self.kind is TopologyKind.PPN:
            out["detail"] = self.detail.to_dict()
        return out


def is_directed_tree(g: Digraph) -> bool:
    """True if the undirected version of g is connected and acyclic."""
    undirected = {frozenset(e) for e in g.edges}
    # an antiparallel pair is an undirected 2-cycle, so edge counts must agree
    return (
        len(undirected) == len(g.edges)
        and len(undirected) == g.n - 1
        and g.is_weakly_connected()
    )


def loop_cycle(g: Digraph) -> Optional[tuple[int, ...]]:
    """The cycle order if g is a single directed cycle on all nodes, else None."""
    if any(
        len(g.out_neighbors(k)) != 1 or len(g.in_neighbors(k)) != 1 for k in g.nodes
    ):
        return None
    start = 1
    cycle = [start]
    (cur,) = g.out_neighbors(start)
    while cur != start:
        cycle.append(cur)
        (cur,) = g.out_neighbors(cur)
    if len(cycle) != g.n:
        return None
    return tuple(cycle)


def ppn_decompose(g: Digraph) -> PpnDecomposition:
    """Split g into source, sink, and internally disjoint paths, or fail.

    Raises:
        NotPpnError: when any defining clause is violated (not exactly one
            source or sink, an internal node shared between paths or carrying
            extra edges, or fewer than two paths).
    """
    sources = g.sources()
    if len(sources) != 1:
        raise NotPpnError(f"expected exactly one source, found {sorted(sources)}")
    sinks = g.sinks()
    if len(sinks) != 1:
        raise NotPpnError(f"expected exactly one sink, found {sorted(sinks)}")
    (source,) = sources
    (sink,) = sinks
    for k in g.nodes:
        if k in (source, sink):
            continue
        if len(g.in_neighbors(k)) != 1 or len(g.out_neighbors(k)) != 1:
            raise NotPpnError(f"internal node {k} is not exclusive to one path")
    paths = []
    seen: set[int] = set()
    for first in sorted(g.out_neighbors(source)):
        path = [source, first]
        cur = first
        while cur != sink:
            if cur in seen:
                raise NotPpnError(f"internal node {cur} is shared between paths")
            seen.add(cur)
            (cur,) = g.out_neighbors(cur)
            path.append(cur)
        paths.append(tuple(path))
    if len(paths) < 2:
        raise NotPpnError(f"only {len(paths)} path(s) from source to sink")
    covered = {source, sink} | seen
    if len(covered) != g.n:
        raise NotPpnError("some nodes lie on no source-to-sink path")
    return PpnDecomposition(source, sink, tuple(paths))


def classify(g: Digraph) -> TopologyClass:
    """Classify g as Tree, Loop, Ppn, or General (checked in that order)."""
    if is_directed_tree(g):
        return TopologyClass(TopologyKind.TREE)
    cycle = loop_cycle(g)
    if cycle is not None:
        return TopologyClass(TopologyKind.LOOP, cycle)
    try:
        decomp = ppn_decompose(g)
    except NotPpnError:
        return TopologyClass(TopologyKind.GENERAL)
    return TopologyClass(TopologyKind.PPN, decomp)
