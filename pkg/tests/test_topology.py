import numpy as np
import pytest

from empsyn import Digraph, NotPpnError, TopologyKind, classify, ppn_decompose

from conftest import EX2_TREE_EDGES, random_connected_digraph


class TestClassify:
    def test_triangle_dag_is_ppn(self, tri_dag):
        topo = classify(tri_dag)
        assert topo.kind is TopologyKind.PPN
        assert set(topo.detail.paths) == {(1, 2, 3), (1, 3)}

    def test_directed_five_cycle_is_loop(self):
        g = Digraph(5, [(1, 2), (2, 3), (3, 4), (4, 5), (5, 1)])
        topo = classify(g)
        assert topo.kind is TopologyKind.LOOP
        assert topo.detail == (1, 2, 3, 4, 5)

    def test_example2_tree_part_is_general(self):
        # 7->1 next to 7->8->9->1 closes an undirected cycle, so not a tree
        g = Digraph.unchecked(10, EX2_TREE_EDGES)
        sub = g.induced_subgraph({1, 2, 6, 7, 8, 9, 10})
        assert classify(sub.graph).kind is TopologyKind.GENERAL

    def test_path_is_tree(self):
        g = Digraph(3, [(1, 2), (2, 3)])
        assert classify(g).kind is TopologyKind.TREE

    def test_antiparallel_pair_is_not_tree(self):
        g = Digraph(2, [(1, 2), (2, 1)])
        assert classify(g).kind is TopologyKind.LOOP

    def test_example1_is_general(self, ex1):
        assert classify(ex1).kind is TopologyKind.GENERAL

    def test_invariant_under_relabeling(self):
        rng = np.random.default_rng(7)
        for _ in range(40):
            g = random_connected_digraph(rng, n_max=6)
            perm = {k: int(v) for k, v in zip(g.nodes, rng.permutation(g.n) + 1)}
            relabeled = Digraph(g.n, [(perm[a], perm[b]) for a, b in g.edges])
            assert classify(g).kind is classify(relabeled).kind

    def test_loop_kind_implies_unit_degrees(self):
        rng = np.random.default_rng(8)
        seen = 0
        for _ in range(300):
            g = random_connected_digraph(rng, n_min=2, n_max=5, p=0.3)
            if classify(g).kind is TopologyKind.LOOP:
                seen += 1
                for k in g.nodes:
                    assert len(g.out_neighbors(k)) == 1
                    assert len(g.in_neighbors(k)) == 1
        assert seen > 0


class TestPpnDecompose:
    def test_direct_path_ppn(self, ppn_direct):
        decomp = ppn_decompose(ppn_direct)
        assert decomp.source == 1
        assert decomp.sink == 4
        assert set(decomp.paths) == {(1, 4), (1, 2, 3, 4)}

    def test_cycle_has_no_source(self, loop4):
        with pytest.raises(NotPpnError, match="source"):
            ppn_decompose(loop4)

    def test_shared_internal_rejected(self):
        g = Digraph(4, [(1, 2), (1, 3), (2, 4), (3, 4), (2, 3)])
        with pytest.raises(NotPpnError, match="not exclusive"):
            ppn_decompose(g)

    def test_single_path_rejected(self):
        g = Digraph(3, [(1, 2), (2, 3)])
        with pytest.raises(NotPpnError, match="path"):
            ppn_decompose(g)

    def test_reassembly_reproduces_edges(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            counts = [int(rng.integers(0, 4)) for _ in range(int(rng.integers(2, 4)))]
            while sum(1 for c in counts if c == 0) > 1:
                counts[counts.index(0)] = 1
            n = 2 + sum(counts)
            labels = list(rng.permutation(n) + 1)
            nxt = iter(int(x) for x in labels)
            source, sink = next(nxt), next(nxt)
            edges = []
            for count in counts:
                prev = source
                for _ in range(count):
                    node = next(nxt)
                    edges.append((prev, node))
                    prev = node
                edges.append((prev, sink))
            g = Digraph(n, edges)
            decomp = ppn_decompose(g)
            rebuilt = {
                (a, b) for p in decomp.paths for a, b in zip(p, p[1:])
            }
            assert rebuilt == g.edges
            internal_sets = [frozenset(p[1:-1]) for p in decomp.paths]
            assert sum(len(s) for s in internal_sets) == n - 2
