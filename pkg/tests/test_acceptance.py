"""Acceptance suite: the two worked networks plus the property/oracle criteria.

Each criterion prints one PASS/FAIL line (visible with `pytest -s`).
"""

import heapq
import itertools
import time

import numpy as np

from empsyn import (
    Digraph,
    Emp,
    EmbeddingConclusion,
    check_embedded,
    loop_valid,
    ppn_decompose,
    ppn_synthesize,
    ppn_valid,
    staged_plan,
    tree_valid,
    validate_emp,
)
from empsyn import oracle
from empsyn.emp import all_labelings, masks_to_emp
from empsyn.synthesis import loop_valid_bulk, ppn_valid_bulk, tree_valid_bulk

from conftest import random_connected_digraph


def _report(num: int, name: str, ok: bool) -> None:
    print(f"ACCEPTANCE {num} ({name}): {'PASS' if ok else 'FAIL'}")
    assert ok, f"acceptance criterion {num} ({name}) failed"


def cycle(n):
    return Digraph(n, [(k, k % n + 1) for k in range(1, n + 1)])


def labeled_free_trees(n):
    """Undirected edge lists of all labeled free trees on n nodes (Pruefer decode)."""
    if n == 1:
        yield []
        return
    if n == 2:
        yield [(1, 2)]
        return
    for seq in itertools.product(range(1, n + 1), repeat=n - 2):
        degree = [1] * (n + 1)
        for v in seq:
            degree[v] += 1
        leaves = [v for v in range(1, n + 1) if degree[v] == 1]
        heapq.heapify(leaves)
        edges = []
        for v in seq:
            leaf = heapq.heappop(leaves)
            edges.append((leaf, v))
            degree[v] -= 1
            if degree[v] == 1:
                heapq.heappush(leaves, v)
        edges.append((heapq.heappop(leaves), heapq.heappop(leaves)))
        yield edges


def random_ppn(rng):
    """A random PPN with shuffled labels: 2-3 paths, up to 3 internals each."""
    n_paths = int(rng.integers(2, 4))
    while True:
        counts = [int(rng.integers(0, 4)) for _ in range(n_paths)]
        if sum(1 for c in counts if c == 0) <= 1:
            break
    n = 2 + sum(counts)
    labels = [int(x) for x in rng.permutation(n) + 1]
    nxt = iter(labels)
    source, sink = next(nxt), next(nxt)
    edges = []
    for count in counts:
        prev = source
        for _ in range(count):
            node = next(nxt)
            edges.append((prev, node))
            prev = node
        edges.append((prev, sink))
    return Digraph(n, edges)


def _sample_cross_check(g, predicate, excited, measured, flags, oracle_flags, rng, k=60):
    """Verify the vectorized sweep against the scalar APIs on a random sample."""
    pick = rng.choice(len(flags), size=min(k, len(flags)), replace=False)
    for row in pick:
        emp = masks_to_emp(excited[row], measured[row])
        assert predicate(g, emp).valid == bool(flags[row])
        assert oracle.generic_identifiable(g, emp) == bool(oracle_flags[row])


def test_criterion_1_example1_reproduction(ex1):
    start = time.perf_counter()
    loop = cycle(4)
    emp1 = Emp.of({1, 3}, {2, 4})
    emp2 = Emp.of({2, 4}, {1, 3})
    ok = True
    for emp in (emp1, emp2):
        ok &= loop_valid(loop, emp).valid
        report = oracle.rank_report(loop, emp)
        ok &= report["rank"] == 4 and report["n_edges"] == 4
    left_loop = [(1, 2), (2, 3), (3, 4), (4, 1)]
    for emp in (emp1, emp2):
        ok &= not oracle.subset_identifiable(ex1, left_loop, emp)
        covered = Emp(emp.excited, emp.measured | {5})
        ok &= not oracle.subset_identifiable(ex1, left_loop, covered)
    elapsed = time.perf_counter() - start
    ok &= elapsed < 1.0
    _report(1, "Example 1 reproduction", ok)


def test_criterion_2_example2_reproduction(ex2, ex2_no63):
    start = time.perf_counter()
    emp1 = Emp.of({1, 3}, {2, 3, 4})
    sub = ex2.induced_subgraph({1, 2, 3, 4})
    emp1_child = emp1.relabel(sub.from_parent)
    iso = ppn_valid(sub.graph, emp1_child)
    ok = iso.valid

    no_red = check_embedded(ex2_no63, {1, 2, 3, 4}, emp1, frozenset(), iso)
    ok &= no_red.conclusion is EmbeddingConclusion.VALID_BY_COND1

    unknown = check_embedded(ex2, {1, 2, 3, 4}, emp1, frozenset(), iso)
    ok &= not unknown.condition1
    ok &= unknown.condition1_witness == (4, 5, 6, 3)
    known = check_embedded(ex2, {1, 2, 3, 4}, emp1, {(4, 5), (5, 6), (6, 3)}, iso)
    ok &= known.conclusion is EmbeddingConclusion.VALID_BY_COND2

    plan = staged_plan(
        ex2,
        [
            ({3, 4, 5, 6}, Emp.of({3, 5}, {4, 6})),
            ({1, 2, 3, 4}, emp1),
            ({1, 2, 6, 7, 8, 9, 10}, Emp.of({7, 8, 9, 10}, {1, 2, 6})),
        ],
    )
    ok &= plan.success
    emp5 = Emp.of({1, 3, 5, 7, 8, 9, 10}, {1, 2, 3, 4, 6})
    ok &= plan.combined == emp5 and plan.combined.cardinality() == 12
    ok &= oracle.generic_identifiable(ex2, emp5)

    elapsed = time.perf_counter() - start
    ok &= elapsed < 5.0
    _report(2, "Example 2 reproduction", ok)


def test_criterion_3_loop_rule_equivalence():
    start = time.perf_counter()
    rng = np.random.default_rng(103)
    agree = True
    for n in range(3, 7):
        g = cycle(n)
        excited, measured = all_labelings(n)
        predicted = loop_valid_bulk(g, excited, measured)
        observed = oracle.bulk_identifiable(g, excited, measured)
        agree &= bool(np.array_equal(predicted, observed))
        _sample_cross_check(g, loop_valid, excited, measured, predicted, observed, rng)
    elapsed = time.perf_counter() - start
    ok = agree and elapsed < 60.0
    _report(3, "loop rule vs oracle (loops 3..6, exhaustive)", ok)


def test_criterion_4_tree_rule_equivalence():
    rng = np.random.default_rng(104)
    agree = True
    trees = 0
    for n in range(1, 6):
        excited, measured = all_labelings(n)
        for undirected in labeled_free_trees(n):
            for bits in range(2 ** len(undirected)):
                edges = [
                    (a, b) if not (bits >> k) & 1 else (b, a)
                    for k, (a, b) in enumerate(undirected)
                ]
                g = Digraph(n, edges)
                predicted = tree_valid_bulk(g, excited, measured)
                observed = oracle.bulk_identifiable(g, excited, measured)
                agree &= bool(np.array_equal(predicted, observed))
                trees += 1
                if rng.random() < 0.01:
                    _sample_cross_check(
                        g, tree_valid, excited, measured, predicted, observed, rng, k=20
                    )
    ok = agree and trees == 1 + 2 + 12 + 128 + 2000
    _report(4, "tree rule vs oracle (directed trees <= 5 nodes, exhaustive)", ok)


def test_criterion_5_ppn_rule_equivalence():
    rng = np.random.default_rng(105)
    agree = True
    for _ in range(20):
        g = random_ppn(rng)
        decomp = ppn_decompose(g)
        if 4**g.n <= 4**10:
            excited, measured = all_labelings(g.n)
        else:
            digits = rng.integers(0, 4, size=(2000, g.n))
            excited = (digits == 1) | (digits == 3)
            measured = (digits == 2) | (digits == 3)
        predicted = ppn_valid_bulk(g, excited, measured, decomp)
        observed = oracle.bulk_identifiable(g, excited, measured)
        agree &= bool(np.array_equal(predicted, observed))
        _sample_cross_check(
            g,
            lambda gg, emp: ppn_valid(gg, emp, decomp),
            excited,
            measured,
            predicted,
            observed,
            rng,
            k=25,
        )
    _report(5, "ppn rule vs oracle (20 random PPNs)", agree)


def test_criterion_6_recovery_round_trips():
    rng = np.random.default_rng(106)
    worst_ppn = 0.0
    for trial in range(100):
        g = random_ppn(rng)
        decomp = ppn_decompose(g)
        emp = ppn_synthesize(g, decomp)
        if trial % 2:
            # random augmentation keeps the pattern valid and varies the sweeps
            extra_b = {int(x) for x in rng.choice(list(g.nodes), size=2)}
            extra_c = {int(x) for x in rng.choice(list(g.nodes), size=2)}
            emp = Emp(emp.excited | extra_b, emp.measured | extra_c)
        assert ppn_valid(g, emp, decomp).valid
        net, recovered = oracle.ppn_round_trip(g, emp, decomp, seed=int(rng.integers(1 << 30)))
        err = max(abs(recovered[e] - net.gains[e]) for e in net.param_order)
        worst_ppn = max(worst_ppn, err)
    worst_embedded = 0.0
    for trial in range(100):
        g = random_connected_digraph(rng, n_min=3, n_max=8)
        size = int(rng.integers(1, g.n))
        va = {int(x) for x in rng.choice(list(g.nodes), size=size, replace=False)}
        truth, recovered = oracle.embedded_round_trip(g, va, seed=trial)
        worst_embedded = max(worst_embedded, float(np.abs(truth - recovered).max()))
    ok = worst_ppn <= 1e-8 and worst_embedded <= 1e-8
    _report(6, f"recovery round-trips (ppn {worst_ppn:.2e}, embedded {worst_embedded:.2e})", ok)


def test_criterion_7_transfer_block_identity():
    rng = np.random.default_rng(107)
    worst = 0.0
    for trial in range(100):
        g = random_connected_digraph(rng, n_min=2, n_max=8)
        size = int(rng.integers(1, g.n))
        va = {int(x) for x in rng.choice(list(g.nodes), size=size, replace=False)}
        blocks = oracle.partition(oracle.instantiate(g, trial), va)
        lhs = np.linalg.inv(
            np.eye(len(va)) - blocks.g_a - blocks.g_ab @ blocks.t_b @ blocks.g_ba
        )
        worst = max(worst, float(np.abs(lhs - blocks.t_aa).max()))
    _report(7, f"transfer block identity (max dev {worst:.2e})", worst <= 1e-10)


def test_criterion_8_embedding_soundness():
    rng = np.random.default_rng(108)
    confirmed = 0
    attempts = 0
    sound = True
    while confirmed < 200:
        attempts += 1
        assert attempts < 20000, "generator failed to produce conclusive triples"
        g = random_connected_digraph(rng, n_min=3, n_max=8)
        size = int(rng.integers(2, g.n))
        va = frozenset(
            int(x) for x in rng.choice(list(g.nodes), size=size, replace=False)
        )
        sub = g.induced_subgraph(va)
        if not sub.graph.is_weakly_connected():
            continue
        emp_child = _isolated_valid_emp(sub.graph, rng)
        if emp_child is None:
            continue
        iso = validate_emp(sub.graph, emp_child)
        if not iso.valid:
            continue
        emp = emp_child.relabel(sub.to_parent)
        support = _maybe_support(g, va, rng)
        known = support if support is not None else frozenset()
        verdict = check_embedded(g, va, emp, known, iso)
        if not verdict.conclusive:
            continue
        confirmed += 1
        sound &= oracle.subset_identifiable(g, sub.parent_edges(), emp, known)
    _report(8, f"embedding soundness (200 conclusive triples, {attempts} drawn)", sound)


def _isolated_valid_emp(g, rng):
    """An EMP valid for g in isolation: synthesized when a theorem applies."""
    try:
        from empsyn import synthesize

        emp = synthesize(g)
        if validate_emp(g, emp).valid:
            return emp
    except ValueError:
        pass
    full = Emp.of(set(g.nodes), set(g.nodes))
    if validate_emp(g, full).valid:
        return full
    return None


def _maybe_support(g, va, rng):
    from empsyn import return_path_support

    return return_path_support(g, va) if rng.random() < 0.5 else None


def test_criterion_9_jacobian_correctness():
    rng = np.random.default_rng(109)
    worst = 0.0
    for trial in range(50):
        g = random_connected_digraph(rng, n_min=5, n_max=5)
        nodes = list(g.nodes)
        emp = Emp.of(
            {int(x) for x in rng.choice(nodes, size=int(rng.integers(1, 5)), replace=False)},
            {int(x) for x in rng.choice(nodes, size=int(rng.integers(1, 5)), replace=False)},
        )
        net = oracle.instantiate(g, trial)
        analytic = oracle.jacobian(net, emp)
        step = 1e-6
        fd = np.empty_like(analytic)
        for col, edge in enumerate(net.param_order):
            plus = dict(net.gains)
            minus = dict(net.gains)
            plus[edge] += step
            minus[edge] -= step
            m_plus = oracle.transfer(oracle.NumericNetwork(g, plus, net.param_order), emp).m
            m_minus = oracle.transfer(oracle.NumericNetwork(g, minus, net.param_order), emp).m
            fd[:, col] = ((m_plus - m_minus) / (2 * step)).ravel()
        scale = max(float(np.abs(analytic).max()), 1e-12)
        worst = max(worst, float(np.abs(analytic - fd).max()) / scale)
    _report(9, f"jacobian vs central differences (max rel err {worst:.2e})", worst <= 1e-6)
