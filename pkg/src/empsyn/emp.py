"""Excitation and measurement patterns and the universal necessary conditions."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .digraph import Digraph, GraphError


class Rule(str, enum.Enum):
    """Identifiers of the universal necessary conditions."""

    EMPTY_B = "EMPTY_B"
    EMPTY_C = "EMPTY_C"
    SOURCE_NOT_EXCITED = "SOURCE_NOT_EXCITED"
    DOURCE_NOT_EXCITED = "DOURCE_NOT_EXCITED"
    SINK_NOT_MEASURED = "SINK_NOT_MEASURED"
    DINK_NOT_MEASURED = "DINK_NOT_MEASURED"
    NODE_UNCOVERED = "NODE_UNCOVERED"


@dataclass(frozen=True)
class Emp:
    """An excitation and measurement pattern: which nodes get inputs, which get sensors.

    A node may appear in both sets; it then contributes twice to the
    cardinality.
    """

    excited: frozenset[int]
    measured: frozenset[int]

    @staticmethod
    def of(excited: Iterable[int], measured: Iterable[int]) -> "Emp":
        return Emp(frozenset(excited), frozenset(measured))

    def cardinality(self) -> int:
        """|excited| + |measured|."""
        return len(self.excited) + len(self.measured)

    def restrict(self, nodes: Iterable[int]) -> "Emp":
        """Intersect both sets with `nodes`."""
        node_set = frozenset(nodes)
        return Emp(self.excited & node_set, self.measured & node_set)

    def relabel(self, mapping: dict[int, int]) -> "Emp":
        """Apply a node-label mapping to both sets."""
        return Emp(
            frozenset(mapping[k] for k in self.excited),
            frozenset(mapping[k] for k in self.measured),
        )

    def to_dict(self) -> dict:
        return {"excited": sorted(self.excited), "measured": sorted(self.measured)}


def combine(emps: Iterable[Emp]) -> Emp:
    """Union the excited sets and the measured sets of several patterns."""
    excited: frozenset[int] = frozenset()
    measured: frozenset[int] = frozenset()
    for e in emps:
        excited |= e.excited
        measured |= e.measured
    return Emp(excited, measured)


@dataclass(frozen=True)
class NecessityReport:
    """Outcome of the universal necessary conditions, with every violation listed."""

    passed: bool
    violations: tuple[tuple[Rule, frozenset[int]], ...]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "violations": [
                {"rule": rule.value, "nodes": sorted(nodes)}
                for rule, nodes in self.violations
            ],
        }


def check_emp_nodes(g: Digraph, emp: Emp) -> None:
    """Raise if the pattern references nodes outside the graph."""
    bad = (emp.excited | emp.measured) - set(g.nodes)
    if bad:
        raise GraphError(f"EMP references unknown node {sorted(bad)[0]}")


def check_necessary(g: Digraph, emp: Emp) -> NecessityReport:
    """Evaluate the seven universal necessary conditions for identifiability.

    Every violated rule is reported together with the offending nodes, so a
    caller can print actionable repair hints (e.g. "excite source 7").
    """
    check_emp_nodes(g, emp)
    b, c = emp.excited, emp.measured
    sets = g.node_sets()
    violations: list[tuple[Rule, frozenset[int]]] = []
    if not b:
        violations.append((Rule.EMPTY_B, frozenset()))
    if not c:
        violations.append((Rule.EMPTY_C, frozenset()))
    for rule, required, chosen in (
        (Rule.SOURCE_NOT_EXCITED, sets.sources, b),
        (Rule.DOURCE_NOT_EXCITED, sets.dources, b),
        (Rule.SINK_NOT_MEASURED, sets.sinks, c),
        (Rule.DINK_NOT_MEASURED, sets.dinks, c),
    ):
        missing = required - chosen
        if missing:
            violations.append((rule, missing))
    uncovered = frozenset(g.nodes) - b - c
    if uncovered:
        violations.append((Rule.NODE_UNCOVERED, uncovered))
    return NecessityReport(not violations, tuple(violations))


def emp_from_json(text: str) -> Emp:
    """Parse the EMP JSON schema {"excited": [ids], "measured": [ids]}."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise GraphError("EMP JSON must be an object")
    unknown = set(obj) - {"excited", "measured"}
    if unknown:
        raise GraphError(f"unknown key {sorted(unknown)[0]!r} in EMP JSON")
    out = {}
    for key in ("excited", "measured"):
        raw = obj.get(key, None)
        if raw is None:
            raise GraphError(f"missing key {key!r} in EMP JSON")
        if not isinstance(raw, list) or not all(isinstance(x, int) for x in raw):
            raise GraphError(f"'{key}' must be a list of integers")
        out[key] = frozenset(raw)
    return Emp(out["excited"], out["measured"])


def all_labelings(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Enumerate all 4**n EMPs on n nodes as boolean mask arrays.

    Returns (excited, measured), each of shape (4**n, n); row index L assigns
    node k the base-4 digit of L at position k-1, with 0 = neither,
    1 = excited, 2 = measured, 3 = both.
    """
    count = 4**n
    idx = np.arange(count)
    digits = (idx[:, None] // (4 ** np.arange(n))[None, :]) % 4
    return (digits == 1) | (digits == 3), (digits == 2) | (digits == 3)


def masks_to_emp(excited_row: np.ndarray, measured_row: np.ndarray) -> Emp:
    """Convert one row of mask arrays back to an Emp (columns are nodes 1..n)."""
    return Emp(
        frozenset(int(k) + 1 for k in np.flatnonzero(excited_row)),
        frozenset(int(k) + 1 for k in np.flatnonzero(measured_row)),
    )
