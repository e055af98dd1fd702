"""Validity predicates and minimal-EMP constructors for trees, loops, and PPNs."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .digraph import Digraph
from .emp import Emp, check_emp_nodes, check_necessary
from .topology import (
    PpnDecomposition,
    TopologyKind,
    classify,
    loop_cycle,
    ppn_decompose,
)


class NotATreeError(ValueError):
    pass


class NotALoopError(ValueError):
    pass


class LoopTooSmallError(ValueError):
    pass


class VerdictRule(str, enum.Enum):
    TREE = "Thm1-Tree"
    LOOP = "Thm2-Loop"
    PPN = "Thm3-Ppn"
    NECESSARY = "Prop1-Necessary"
    ORACLE = "Oracle"


@dataclass(frozen=True)
class Verdict:
    """Validity decision together with the rule applied and its clauses.

    When valid, `reasons` lists every satisfied clause of the applied rule;
    when invalid, it lists the violated clauses and `witnesses` carries the
    offending structures.
    """

    valid: bool
    rule: VerdictRule
    reasons: tuple[str, ...]
    witnesses: Optional[dict] = field(default=None, compare=False)

    def to_dict(self) -> dict:
        out = {"valid": self.valid, "rule": self.rule.value, "reasons": list(self.reasons)}
        if self.witnesses is not None:
            out["witnesses"] = self.witnesses
        return out


def _cover_clause(g: Digraph, emp: Emp):
    uncovered = sorted(set(g.nodes) - emp.excited - emp.measured)
    if uncovered:
        return False, f"nodes {uncovered} are neither excited nor measured", uncovered
    return True, "every node is excited or measured", None


# -- trees -------------------------------------------------------------------


def tree_valid(g: Digraph, emp: Emp) -> Verdict:
    """Decide validity on a directed tree: sources excited, sinks measured, all covered."""
    if classify(g).kind is not TopologyKind.TREE:
        raise NotATreeError("graph is not a directed tree")
    check_emp_nodes(g, emp)
    reasons: list[str] = []
    witnesses: dict = {}
    unexcited = sorted(g.sources() - emp.excited)
    if unexcited:
        reasons.append(f"sources {unexcited} are not excited")
        witnesses["unexcited_sources"] = unexcited
    else:
        reasons.append("all sources are excited")
    unmeasured = sorted(g.sinks() - emp.measured)
    if unmeasured:
        reasons.append(f"sinks {unmeasured} are not measured")
        witnesses["unmeasured_sinks"] = unmeasured
    else:
        reasons.append("all sinks are measured")
    _, clause, uncovered = _cover_clause(g, emp)
    reasons.append(clause)
    if uncovered:
        witnesses["uncovered"] = uncovered
    valid = not witnesses
    return Verdict(valid, VerdictRule.TREE, tuple(reasons), witnesses or None)


def tree_synthesize(g: Digraph) -> Emp:
    """Build the minimal EMP for a directed tree: excite sources, measure the rest."""
    if classify(g).kind is not TopologyKind.TREE:
        raise NotATreeError("graph is not a directed tree")
    sources = g.sources()
    sinks = g.sinks()
    rest = frozenset(g.nodes) - sources - sinks
    return Emp(sources, sinks | rest)


def tree_valid_bulk(g: Digraph, excited: np.ndarray, measured: np.ndarray) -> np.ndarray:
    """Vectorized tree validity over mask arrays of shape (L, n); column k is node k+1."""
    if classify(g).kind is not TopologyKind.TREE:
        raise NotATreeError("graph is not a directed tree")
    src = [k - 1 for k in sorted(g.sources())]
    snk = [k - 1 for k in sorted(g.sinks())]
    return (
        excited[:, src].all(axis=1)
        & measured[:, snk].all(axis=1)
        & (excited | measured).all(axis=1)
    )


# -- loops -------------------------------------------------------------------


def _require_loop(g: Digraph) -> tuple[int, ...]:
    cycle = loop_cycle(g)
    if cycle is None:
        raise NotALoopError("graph is not a single directed cycle")
    if g.n < 3:
        raise LoopTooSmallError("loop results require at least three nodes")
    return cycle


def _excited_arcs(cycle: tuple[int, ...], excited: frozenset[int]) -> int:
    """Number of maximal contiguous arcs the excited set forms along the cycle."""
    marks = [k in excited for k in cycle]
    return sum(
        1 for idx, m in enumerate(marks) if m and not marks[idx - 1]
    )


def loop_valid(g: Digraph, emp: Emp) -> Verdict:
    """Decide validity on a loop: full cover plus overlap or non-consecutive excitation.

    "Consecutive" means the excited nodes form one contiguous arc in cyclic
    order; singletons and the full node set count as consecutive.
    """
    cycle = _require_loop(g)
    check_emp_nodes(g, emp)
    reasons: list[str] = []
    witnesses: dict = {}
    ok, clause, uncovered = _cover_clause(g, emp)
    reasons.append(clause)
    if uncovered:
        witnesses["uncovered"] = uncovered
    overlap = emp.excited & emp.measured
    arcs = _excited_arcs(cycle, emp.excited)
    if overlap:
        reasons.append(f"excited and measured sets intersect at {sorted(overlap)}")
    elif arcs >= 2:
        reasons.append(f"excited nodes form {arcs} arcs of the cycle (not consecutive)")
    else:
        reasons.append(
            "excited and measured sets are disjoint and the excited nodes are "
            "consecutive along the loop"
        )
        witnesses["excited_arc"] = _contiguous_run(cycle, emp.excited)
    valid = ok and (bool(overlap) or arcs >= 2)
    return Verdict(valid, VerdictRule.LOOP, tuple(reasons), witnesses or None)


def _contiguous_run(cycle: tuple[int, ...], excited: frozenset[int]) -> list[int]:
    if not excited:
        return []
    if excited == set(cycle):
        return list(cycle)
    n = len(cycle)
    start = next(
        i for i in range(n) if cycle[i] in excited and cycle[i - 1] not in excited
    )
    run = []
    i = start
    while cycle[i] in excited:
        run.append(cycle[i])
        i = (i + 1) % n
    return run


def loop_synthesize(g: Digraph) -> Emp:
    """Build a minimal EMP for a loop.

    With four or more nodes, exciting two non-adjacent nodes and measuring the
    rest reaches cardinality n; a triangle needs an overlap, giving
    cardinality four.
    """
    cycle = _require_loop(g)
    if g.n == 3:
        return Emp.of((cycle[0], cycle[1]), (cycle[1], cycle[2]))
    excited = frozenset((cycle[0], cycle[2]))
    return Emp(excited, frozenset(g.nodes) - excited)


def loop_valid_bulk(g: Digraph, excited: np.ndarray, measured: np.ndarray) -> np.ndarray:
    """Vectorized loop validity over mask arrays of shape (L, n)."""
    cycle = _require_loop(g)
    cols = [k - 1 for k in cycle]
    exc_cyc = excited[:, cols]
    arcs = (exc_cyc & ~np.roll(exc_cyc, 1, axis=1)).sum(axis=1)
    cover = (excited | measured).all(axis=1)
    overlap = (excited & measured).any(axis=1)
    return cover & (overlap | (arcs >= 2))


# -- parallel paths networks ---------------------------------------------------


def _path_satisfied(path: tuple[int, ...], emp: Emp) -> bool:
    """An excited internal node weakly precedes a measured internal node."""
    internals = path[1:-1]
    first_excited = None
    for pos, node in enumerate(internals):
        if first_excited is None and node in emp.excited:
            first_excited = pos
        if node in emp.measured and first_excited is not None and first_excited <= pos:
            return True
    return False


def ppn_valid(
    g: Digraph, emp: Emp, decomp: Optional[PpnDecomposition] = None
) -> Verdict:
    """Decide validity on a PPN: cover, endpoints, and n_p - 1 satisfied paths.

    A path is satisfied when some excited internal node weakly precedes (in
    path order) a measured internal node; a node in both sets satisfies the
    condition on its own.
    """
    if decomp is None:
        decomp = ppn_decompose(g)
    check_emp_nodes(g, emp)
    reasons: list[str] = []
    witnesses: dict = {}
    if decomp.source in emp.excited:
        reasons.append("the source is excited")
    else:
        reasons.append(f"source {decomp.source} is not excited")
        witnesses["unexcited_source"] = decomp.source
    if decomp.sink in emp.measured:
        reasons.append("the sink is measured")
    else:
        reasons.append(f"sink {decomp.sink} is not measured")
        witnesses["unmeasured_sink"] = decomp.sink
    _, clause, uncovered = _cover_clause(g, emp)
    reasons.append(clause)
    if uncovered:
        witnesses["uncovered"] = uncovered
    unsatisfied = [p for p in decomp.paths if not _path_satisfied(p, emp)]
    needed = decomp.n_paths - 1
    satisfied = decomp.n_paths - len(unsatisfied)
    if satisfied >= needed:
        reasons.append(
            f"{satisfied} of {decomp.n_paths} paths have an excitation weakly "
            f"preceding a measurement (need {needed})"
        )
    else:
        reasons.append(
            f"only {satisfied} of {decomp.n_paths} paths have an excitation "
            f"weakly preceding a measurement (need {needed})"
        )
        witnesses["unsatisfied_paths"] = [list(p) for p in unsatisfied]
    valid = not witnesses
    return Verdict(valid, VerdictRule.PPN, tuple(reasons), witnesses or None)


def ppn_synthesize(g: Digraph, decomp: Optional[PpnDecomposition] = None) -> Emp:
    """Build a minimal EMP for a PPN.

    One path is exempted from the excitation-precedes-measurement condition
    (the cheapest one: prefer the direct edge, then a single-internal-node
    path) and fully measured. On every other path the first internal node is
    excited and the rest are measured; a lone internal node goes into both
    sets.
    """
    if decomp is None:
        decomp = ppn_decompose(g)
    shortest = min(len(p) for p in decomp.paths)
    exempt_idx = max(
        idx for idx, p in enumerate(decomp.paths) if len(p) == shortest
    )
    excited = {decomp.source}
    measured = {decomp.sink}
    for idx, path in enumerate(decomp.paths):
        internals = path[1:-1]
        if idx == exempt_idx:
            measured.update(internals)
        elif len(internals) == 1:
            excited.add(internals[0])
            measured.add(internals[0])
        else:
            excited.add(internals[0])
            measured.update(internals[1:])
    return Emp(frozenset(excited), frozenset(measured))


def ppn_valid_bulk(
    g: Digraph,
    excited: np.ndarray,
    measured: np.ndarray,
    decomp: Optional[PpnDecomposition] = None,
) -> np.ndarray:
    """Vectorized PPN validity over mask arrays of shape (L, n)."""
    if decomp is None:
        decomp = ppn_decompose(g)
    satisfied = np.zeros(excited.shape[0], dtype=int)
    for path in decomp.paths:
        cols = [k - 1 for k in path[1:-1]]
        if not cols:
            continue
        e_seen = np.logical_or.accumulate(excited[:, cols], axis=1)
        satisfied += (e_seen & measured[:, cols]).any(axis=1)
    return (
        excited[:, decomp.source - 1]
        & measured[:, decomp.sink - 1]
        & (excited | measured).all(axis=1)
        & (satisfied >= decomp.n_paths - 1)
    )


# -- dispatch ------------------------------------------------------------------


def synthesize(g: Digraph, kind: str = "auto") -> Emp:
    """Synthesize a minimal EMP for a tree, loop, or PPN (auto-classified)."""
    resolved = classify(g).kind if kind == "auto" else TopologyKind(kind.capitalize())
    if resolved is TopologyKind.TREE:
        return tree_synthesize(g)
    if resolved is TopologyKind.LOOP:
        return loop_synthesize(g)
    if resolved is TopologyKind.PPN:
        return ppn_synthesize(g)
    raise ValueError("no synthesis rule applies to this graph")


def validate_emp(
    g: Digraph,
    emp: Emp,
    kind: str = "auto",
    *,
    trials: int = 3,
    tol: float = 1e-9,
    seeds=None,
) -> Verdict:
    """Check an EMP with the matching theorem, falling back to the numeric oracle.

    Trees, loops, and PPNs are decided by their closed-form conditions. For
    any other graph the universal necessary conditions are applied first and,
    if they pass, the Jacobian rank test decides.
    """
    resolved = classify(g).kind if kind == "auto" else TopologyKind(kind.capitalize())
    if resolved is TopologyKind.TREE:
        return tree_valid(g, emp)
    if resolved is TopologyKind.LOOP:
        if kind != "auto" or g.n >= 3:
            return loop_valid(g, emp)
        # two-node loops are outside the loop theorem; fall through to the oracle
    elif resolved is TopologyKind.PPN:
        return ppn_valid(g, emp)
    report = check_necessary(g, emp)
    if not report.passed:
        reasons = tuple(
            f"{rule.value}: {sorted(nodes)}" if nodes else rule.value
            for rule, nodes in report.violations
        )
        return Verdict(False, VerdictRule.NECESSARY, reasons, report.to_dict())
    from . import oracle  # local import to keep module load light

    ok = oracle.generic_identifiable(g, emp, trials=trials, tol=tol, seeds=seeds)
    reason = (
        "Jacobian of the input-output map has full column rank at random generic points"
        if ok
        else "Jacobian of the input-output map is rank deficient at all sampled points"
    )
    return Verdict(ok, VerdictRule.ORACLE, (reason,))
