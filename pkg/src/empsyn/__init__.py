"""Excitation and measurement pattern design for dynamic network identifiability."""

from .digraph import (
    Digraph,
    GraphError,
    InducedSubgraph,
    NodeSets,
    ReturnPathReport,
    graph_from_dot,
    graph_from_json,
    graph_to_json,
)
from .emp import Emp, NecessityReport, Rule, check_necessary, combine, emp_from_json
from .topology import (
    NotPpnError,
    PpnDecomposition,
    TopologyClass,
    TopologyKind,
    classify,
    ppn_decompose,
)
from .synthesis import (
    LoopTooSmallError,
    NotALoopError,
    NotATreeError,
    Verdict,
    VerdictRule,
    loop_synthesize,
    loop_valid,
    ppn_synthesize,
    ppn_valid,
    synthesize,
    tree_synthesize,
    tree_valid,
    validate_emp,
)
from .embedding import (
    DisconnectedSubgraphError,
    EmbeddingConclusion,
    EmbeddingVerdict,
    PlanReport,
    StageReport,
    SubsetError,
    check_embedded,
    return_path_support,
    staged_plan,
)
from .oracle import (
    IoMap,
    MissingEntryError,
    NonGenericEntryError,
    NumericNetwork,
    embedded_recover,
    generic_identifiable,
    instantiate,
    jacobian,
    ppn_recover,
    subset_identifiable,
    transfer,
)

__version__ = "0.1.0"

__all__ = [
    "Digraph",
    "GraphError",
    "InducedSubgraph",
    "NodeSets",
    "ReturnPathReport",
    "graph_from_dot",
    "graph_from_json",
    "graph_to_json",
    "Emp",
    "NecessityReport",
    "Rule",
    "check_necessary",
    "combine",
    "emp_from_json",
    "NotPpnError",
    "PpnDecomposition",
    "TopologyClass",
    "TopologyKind",
    "classify",
    "ppn_decompose",
    "LoopTooSmallError",
    "NotALoopError",
    "NotATreeError",
    "Verdict",
    "VerdictRule",
    "loop_synthesize",
    "loop_valid",
    "ppn_synthesize",
    "ppn_valid",
    "synthesize",
    "tree_synthesize",
    "tree_valid",
    "validate_emp",
    "DisconnectedSubgraphError",
    "EmbeddingConclusion",
    "EmbeddingVerdict",
    "PlanReport",
    "StageReport",
    "SubsetError",
    "check_embedded",
    "return_path_support",
    "staged_plan",
    "IoMap",
    "MissingEntryError",
    "NonGenericEntryError",
    "NumericNetwork",
    "embedded_recover",
    "generic_identifiable",
    "instantiate",
    "jacobian",
    "ppn_recover",
    "subset_identifiable",
    "transfer",
]
