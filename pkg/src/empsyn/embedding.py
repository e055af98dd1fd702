"""Sufficient conditions for an isolated-valid EMP to survive embedding."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .digraph import Digraph, Edge
from .emp import Emp, check_emp_nodes, combine
from .synthesis import Verdict, validate_emp


class SubsetError(ValueError):
    """The node subset is not a proper nonempty subset of the graph."""


class DisconnectedSubgraphError(ValueError):
    """The induced subgraph is not weakly connected."""


class EmbeddingConclusion(str, enum.Enum):
    VALID_BY_COND1 = "ValidByCond1"
    VALID_BY_COND2 = "ValidByCond2"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class EmbeddingVerdict:
    """Outcome of the embedding conditions for one subset and pattern.

    Inconclusive never asserts invalidity: the conditions are sufficient,
    not necessary.
    """

    condition1: bool
    condition1_witness: Optional[tuple[int, ...]]
    condition2: bool
    missing_edges: frozenset[Edge]
    conclusion: EmbeddingConclusion
    notes: tuple[str, ...] = ()

    @property
    def conclusive(self) -> bool:
        return self.conclusion is not EmbeddingConclusion.INCONCLUSIVE

    def to_dict(self) -> dict:
        return {
            "condition1": self.condition1,
            "condition1_witness": list(self.condition1_witness)
            if self.condition1_witness
            else None,
            "condition2": self.condition2,
            "missing_edges": [list(e) for e in sorted(self.missing_edges)],
            "conclusion": self.conclusion.value,
            "notes": list(self.notes),
        }


def _proper_subset(g: Digraph, va) -> frozenset[int]:
    va_set = frozenset(va)
    if not va_set or not va_set < frozenset(g.nodes):
        raise SubsetError("va must be a proper nonempty subset of the nodes")
    for k in va_set:
        if not (1 <= k <= g.n):
            raise SubsetError(f"node {k} is outside 1..{g.n}")
    return va_set


def return_path_support(g: Digraph, va) -> frozenset[Edge]:
    """Edges that feed the correction term coupling the subset to the rest.

    These are the entry edges into outside nodes that lead back, the exit
    edges out of outside nodes that can be fed, and the outside edges lying
    on some walk from an entry to an exit. Condition 2 asks exactly that all
    of them be known; the set is empty iff condition 1 holds.
    """
    va_set = _proper_subset(g, va)
    vb = frozenset(g.nodes) - va_set
    heads = {b for a, b in g.edges if a in va_set and b in vb}
    tails = {u for u, w in g.edges if u in vb and w in va_set}
    fed = g.reachable_within(vb, heads)
    feeding = g.reachable_within(vb, tails, forward=False)
    support = set()
    for x, y in g.edges:
        if x in va_set and y in vb:
            if y in feeding:
                support.add((x, y))
        elif x in vb and y in va_set:
            if x in fed:
                support.add((x, y))
        elif x in vb and y in vb and x in fed and y in feeding:
            support.add((x, y))
    return frozenset(support)


def check_embedded(
    g: Digraph,
    va,
    emp_a: Emp,
    known_edges=frozenset(),
    isolated_verdict: Optional[Verdict] = None,
) -> EmbeddingVerdict:
    """Decide whether an isolated-valid EMP stays valid for the embedded subset.

    Condition 1 holds when no path leaves `va` and returns to it; condition 2
    when every edge of the return-path support is known. The caller supplies
    the isolated verdict; when it is invalid (or absent) the result is
    Inconclusive without asserting either condition.
    """
    va_set = _proper_subset(g, va)
    check_emp_nodes(g, emp_a)
    sub = g.induced_subgraph(va_set)
    if not sub.graph.is_weakly_connected():
        raise DisconnectedSubgraphError("the induced subgraph is not weakly connected")
    if isolated_verdict is None or not isolated_verdict.valid:
        return EmbeddingVerdict(
            False,
            None,
            False,
            frozenset(),
            EmbeddingConclusion.INCONCLUSIVE,
            ("isolated validity of the EMP was not established",),
        )
    report = g.return_paths(va_set, cap=1)
    support = return_path_support(g, va_set)
    missing = support - frozenset(tuple(e) for e in known_edges)
    condition1 = report.empty
    condition2 = not missing
    if condition1:
        conclusion = EmbeddingConclusion.VALID_BY_COND1
    elif condition2:
        conclusion = EmbeddingConclusion.VALID_BY_COND2
    else:
        conclusion = EmbeddingConclusion.INCONCLUSIVE
    return EmbeddingVerdict(
        condition1,
        None if condition1 else report.paths[0],
        condition2,
        missing,
        conclusion,
    )


@dataclass(frozen=True)
class StageReport:
    """One stage of a staged identification plan."""

    index: int
    nodes: tuple[int, ...]
    emp: Emp
    isolated: Verdict
    embedded: EmbeddingVerdict
    identified_after: frozenset[Edge] = field(compare=False)

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "nodes": list(self.nodes),
            "emp": self.emp.to_dict(),
            "isolated": self.isolated.to_dict(),
            "embedded": self.embedded.to_dict(),
            "identified_after": [list(e) for e in sorted(self.identified_after)],
        }


@dataclass(frozen=True)
class PlanReport:
    """Result of running the stages in order, with the first blocker if any."""

    success: bool
    blocking_stage: Optional[int]
    stages: tuple[StageReport, ...]
    combined: Emp
    identified: frozenset[Edge]

    def to_dict(self) -> dict:
        return {
            "success": self.success,
            "blocking_stage": self.blocking_stage,
            "stages": [s.to_dict() for s in self.stages],
            "combined_emp": self.combined.to_dict(),
            "cardinality": self.combined.cardinality(),
            "identified": [list(e) for e in sorted(self.identified)],
        }


def staged_plan(
    g: Digraph,
    stages: Sequence[tuple[Sequence[int], Emp]],
    *,
    trials: int = 3,
    tol: float = 1e-9,
    seeds=None,
) -> PlanReport:
    """Run per-subnetwork EMPs in order, accumulating identified edges.

    Stage k treats every edge identified by stages 1..k-1 as known. A stage
    whose isolated check and embedding check both succeed identifies all
    edges of its induced subgraph; an Inconclusive stage identifies nothing
    and fails the plan (later stages are still evaluated for diagnostics).
    The combined EMP is the union over all stages.
    """
    identified: frozenset[Edge] = frozenset()
    reports: list[StageReport] = []
    blocking: Optional[int] = None
    all_nodes = frozenset(g.nodes)
    for index, (nodes, emp) in enumerate(stages):
        va = frozenset(nodes)
        check_emp_nodes(g, emp)
        sub = g.induced_subgraph(va)
        emp_child = emp.restrict(va).relabel(sub.from_parent)
        isolated = validate_emp(
            sub.graph, emp_child, trials=trials, tol=tol, seeds=seeds
        )
        if va == all_nodes:
            # nothing outside the subset: the isolated check is the whole story
            if isolated.valid:
                embedded = EmbeddingVerdict(
                    True, None, True, frozenset(), EmbeddingConclusion.VALID_BY_COND1
                )
            else:
                embedded = EmbeddingVerdict(
                    False,
                    None,
                    False,
                    frozenset(),
                    EmbeddingConclusion.INCONCLUSIVE,
                    ("isolated validity of the EMP was not established",),
                )
        else:
            embedded = check_embedded(g, va, emp, identified, isolated)
        if embedded.conclusive:
            identified |= sub.parent_edges()
        elif blocking is None:
            blocking = index
        reports.append(
            StageReport(index, tuple(sorted(va)), emp, isolated, embedded, identified)
        )
    return PlanReport(
        blocking is None,
        blocking,
        tuple(reports),
        combine(emp for _, emp in stages),
        identified,
    )
