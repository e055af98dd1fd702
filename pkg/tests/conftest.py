"""Shared fixtures: the two worked networks and small canonical graphs."""

import numpy as np
import pytest

from empsyn import Digraph, Emp

EX1_EDGES = [(1, 2), (2, 3), (3, 4), (4, 1), (4, 5), (5, 3)]
EX2_PPN_EDGES = [(1, 4), (1, 2), (2, 3), (3, 4)]
EX2_LOOP_EDGES = [(3, 4), (4, 5), (5, 6), (6, 3)]
EX2_TREE_EDGES = [(7, 6), (7, 1), (7, 8), (8, 9), (9, 1), (8, 10), (10, 2)]
EX2_EDGES = sorted(set(EX2_PPN_EDGES) | set(EX2_LOOP_EDGES) | set(EX2_TREE_EDGES))


@pytest.fixture
def ex1():
    """The five-node two-loop network."""
    return Digraph(5, EX1_EDGES)


@pytest.fixture
def ex1_no_red():
    """Same network without the right-loop edges; node 5 is left dangling."""
    return Digraph.unchecked(5, [(1, 2), (2, 3), (3, 4), (4, 1)])


@pytest.fixture
def ex2():
    """The ten-node network: a PPN, a loop, and a tree-like part."""
    return Digraph(10, EX2_EDGES)


@pytest.fixture
def ex2_no63():
    """The ten-node network without the loop-closing edge 6 -> 3."""
    return Digraph(10, [e for e in EX2_EDGES if e != (6, 3)])


@pytest.fixture
def loop4():
    return Digraph(4, [(1, 2), (2, 3), (3, 4), (4, 1)])


@pytest.fixture
def ppn_direct():
    """Two-path PPN with a direct edge: 1 -> 4 and 1 -> 2 -> 3 -> 4."""
    return Digraph(4, EX2_PPN_EDGES)


@pytest.fixture
def tri_dag():
    return Digraph(3, [(1, 2), (1, 3), (2, 3)])


@pytest.fixture
def emp1():
    return Emp.of({1, 3}, {2, 4})


@pytest.fixture
def emp2():
    return Emp.of({2, 4}, {1, 3})


def random_connected_digraph(rng: np.random.Generator, n_min=2, n_max=8, p=0.35) -> Digraph:
    """Rejection-sample a weakly connected simple digraph."""
    while True:
        n = int(rng.integers(n_min, n_max + 1))
        edges = [
            (a, b)
            for a in range(1, n + 1)
            for b in range(1, n + 1)
            if a != b and rng.random() < p
        ]
        try:
            return Digraph(n, edges)
        except Exception:
            continue
