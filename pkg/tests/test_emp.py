import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from empsyn import Digraph, Emp, GraphError, Rule, check_necessary, combine
from empsyn.emp import emp_from_json


node_sets = st.frozensets(st.integers(min_value=1, max_value=12), max_size=8)
emps = st.builds(Emp, node_sets, node_sets)


class TestCardinality:
    def test_example2_emp5(self):
        assert Emp.of({1, 3, 5, 7, 8, 9, 10}, {1, 2, 3, 4, 6}).cardinality() == 12

    def test_empty(self):
        assert Emp.of((), ()).cardinality() == 0

    def test_example2_emp1(self):
        assert Emp.of({1, 3}, {2, 3, 4}).cardinality() == 5


class TestCombine:
    def test_example2_emp3(self):
        emp3 = combine([Emp.of({1, 3}, {2, 3, 4}), Emp.of({3, 5}, {4, 6})])
        assert emp3 == Emp.of({1, 3, 5}, {2, 3, 4, 6})

    def test_single_is_identity(self):
        emp = Emp.of({1}, {2})
        assert combine([emp]) == emp

    def test_example2_emp5(self):
        emp3 = Emp.of({1, 3, 5}, {2, 3, 4, 6})
        emp4 = Emp.of({7, 8, 9, 10}, {1, 2, 6})
        assert combine([emp3, emp4]) == Emp.of({1, 3, 5, 7, 8, 9, 10}, {1, 2, 3, 4, 6})

    @given(emps, emps)
    def test_cardinality_subadditive(self, a, b):
        joined = combine([a, b])
        assert joined.cardinality() <= a.cardinality() + b.cardinality()
        disjoint = not (a.excited & b.excited) and not (a.measured & b.measured)
        assert (joined.cardinality() == a.cardinality() + b.cardinality()) == disjoint


class TestCheckNecessary:
    def test_example1_uncovered_node(self, ex1):
        report = check_necessary(ex1, Emp.of({1, 3}, {2, 4}))
        assert not report.passed
        assert report.violations == ((Rule.NODE_UNCOVERED, frozenset({5})),)

    def test_single_edge_passes(self):
        g = Digraph(2, [(1, 2)])
        assert check_necessary(g, Emp.of({1}, {2})).passed

    def test_empty_measured(self, loop4):
        report = check_necessary(loop4, Emp.of({1, 2, 3, 4}, ()))
        assert [rule for rule, _ in report.violations] == [Rule.EMPTY_C]

    def test_all_rules_fire(self, tri_dag):
        report = check_necessary(tri_dag, Emp.of((), ()))
        rules = [rule for rule, _ in report.violations]
        assert rules == [
            Rule.EMPTY_B,
            Rule.EMPTY_C,
            Rule.SOURCE_NOT_EXCITED,
            Rule.DOURCE_NOT_EXCITED,
            Rule.SINK_NOT_MEASURED,
            Rule.DINK_NOT_MEASURED,
            Rule.NODE_UNCOVERED,
        ]

    def test_unknown_node_rejected(self, loop4):
        with pytest.raises(GraphError, match="unknown node"):
            check_necessary(loop4, Emp.of({9}, {1, 2, 3, 4}))

    @given(
        st.frozensets(st.integers(1, 4), max_size=4),
        st.frozensets(st.integers(1, 4), max_size=4),
        st.frozensets(st.integers(1, 4), min_size=1, max_size=2),
    )
    @settings(max_examples=80)
    def test_monotone(self, excited, measured, extra):
        g = Digraph(4, [(1, 2), (2, 3), (3, 4), (4, 1)])
        before = check_necessary(g, Emp(excited, measured))
        grown = check_necessary(g, Emp(excited | extra, measured | extra))
        seen_before = {
            (rule, node) for rule, nodes in before.violations for node in nodes
        } | {(rule, None) for rule, nodes in before.violations if not nodes}
        seen_after = {
            (rule, node) for rule, nodes in grown.violations for node in nodes
        } | {(rule, None) for rule, nodes in grown.violations if not nodes}
        assert seen_after <= seen_before


class TestJson:
    def test_round_trip(self):
        emp = emp_from_json('{"excited": [1, 3], "measured": [2]}')
        assert emp == Emp.of({1, 3}, {2})

    def test_unknown_key(self):
        with pytest.raises(GraphError, match="unknown key"):
            emp_from_json('{"excited": [], "measured": [], "extra": 1}')

    def test_missing_key(self):
        with pytest.raises(GraphError, match="missing key"):
            emp_from_json('{"excited": [1]}')
