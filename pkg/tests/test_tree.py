import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellext.errors import MarginalMismatch, NotATree
from bellext.probability import Distribution, VariableSet, marginalize, max_abs_diff, moment
from bellext.representability import bell_wigner_interval, pair_distribution
from bellext.sampling import random_tree_graph
from bellext.tree import CompatibilityGraph, Edge, edge_marginal_error, extend_tree, glue, is_tree

SQRT2 = math.sqrt(2)


def pair(a, b, pa, pb, pab):
    return pair_distribution((a, b), pa, pb, pab)


def path_graph():
    return CompatibilityGraph(
        (("A1",), ("B1",), ("A2",)),
        (Edge(0, 1, pair("A1", "B1", 0.5, 0.5, 0.3)), Edge(1, 2, pair("B1", "A2", 0.5, 0.5, 0.2))),
    )


class TestIsTree:
    def test_path(self):
        assert is_tree(path_graph())

    def test_four_cycle(self):
        d = Distribution.uniform
        nodes = (("A1",), ("B1",), ("A2",), ("B2",))
        edges = []
        for a, b in [(0, 1), (1, 2), (2, 3), (3, 0)]:
            edges.append(Edge(a, b, d(VariableSet(nodes[a] + nodes[b]))))
        g = CompatibilityGraph(nodes, tuple(edges))
        assert not is_tree(g)

    def test_single_node(self):
        assert is_tree(CompatibilityGraph((("A",),)))

    def test_disconnected_forest_is_not_a_tree(self):
        u = Distribution.uniform
        g = CompatibilityGraph(
            (("A",), ("B",), ("C",), ("D",)),
            (Edge(0, 1, u(VariableSet(("A", "B")))), Edge(2, 3, u(VariableSet(("C", "D"))))),
        )
        assert not is_tree(g)

    def test_overlapping_blocks_rejected(self):
        with pytest.raises(ValueError):
            CompatibilityGraph((("A", "B"), ("B", "C")))


class TestGlue:
    def test_disjoint_is_product(self):
        a = Distribution(VariableSet(("A",)), [0.3, 0.7])
        b = Distribution(VariableSet(("B",)), [0.6, 0.4])
        r = glue(a, b)
        np.testing.assert_array_equal(r.weights, np.outer(a.weights, b.weights).reshape(-1))

    def test_uniform_disjoint(self):
        r = glue(Distribution.uniform(VariableSet(("A",))), Distribution.uniform(VariableSet(("B",))))
        np.testing.assert_allclose(r.weights, [0.25] * 4)

    def test_singlet_over_b1(self, singlet):
        p = singlet.context_distribution(("A1", "B1"))
        q = singlet.context_distribution(("A2", "B1"))
        r = glue(p, q)
        # oracle: sum_b P(b) P(A1=1|b) P(A2=1|b), evaluated from the two tables
        expected = 0.0
        for b in (0, 1):
            pb = p.prob({"A1": 0, "B1": b}) + p.prob({"A1": 1, "B1": b})
            expected += p.prob({"A1": 1, "B1": b}) * q.prob({"A2": 1, "B1": b}) / pb
        assert expected == pytest.approx(3 / 8, abs=1e-12)
        assert moment(r, "A1,A2") == pytest.approx(expected, abs=1e-12)
        iv = bell_wigner_interval(_three(r), "A1", "A2", "B1")
        assert iv.contains(moment(r, "A1,A2"))
        assert iv.lo == pytest.approx(SQRT2 / 4, abs=1e-12)

    def test_mismatch(self):
        p = pair("A", "B", 0.5, 0.5, 0.25)
        q = pair("C", "B", 0.5, 0.6, 0.3)
        with pytest.raises(MarginalMismatch) as info:
            glue(p, q)
        assert info.value.discrepancy == pytest.approx(0.1)
        assert set(info.value.atom) == {"B"}

    def test_null_overlap_event(self):
        p = Distribution(VariableSet(("A", "B")), [0.5, 0.0, 0.5, 0.0])  # B never 1
        q = Distribution(VariableSet(("B", "C")), [0.2, 0.8, 0.0, 0.0])
        r = glue(p, q)
        assert max_abs_diff(p, marginalize(r, ["A", "B"])) <= 1e-15
        assert max_abs_diff(q, marginalize(r, ["B", "C"])) <= 1e-15

    def test_conditional_independence(self, rng):
        from bellext.sampling import random_distribution

        h = random_distribution(rng, VariableSet(("X", "S", "Y")), sparse=0.0)
        r = glue(marginalize(h, ["X", "S"]), marginalize(h, ["S", "Y"]))
        for s in (0, 1):
            ps = sum(r.prob({"X": x, "S": s, "Y": y}) for x in (0, 1) for y in (0, 1))
            for x in (0, 1):
                for y in (0, 1):
                    px = sum(r.prob({"X": x, "S": s, "Y": yy}) for yy in (0, 1))
                    py = sum(r.prob({"X": xx, "S": s, "Y": y}) for xx in (0, 1))
                    assert r.prob({"X": x, "S": s, "Y": y}) * ps == pytest.approx(px * py, abs=1e-14)


def _three(d):
    from bellext.probability import MomentConstraints

    keys = [("A1",), ("A2",), ("B1",), ("A1", "B1"), ("A2", "B1")]
    return MomentConstraints(VariableSet(("A1", "A2", "B1")), {frozenset(k): moment(d, k) for k in keys})


class TestExtendTree:
    def test_star_singlet(self, singlet):
        g = CompatibilityGraph(
            (("B1",), ("A1",), ("A2",)),
            (
                Edge(0, 1, singlet.context_distribution(("A1", "B1"))),
                Edge(0, 2, singlet.context_distribution(("A2", "B1"))),
            ),
        )
        res = extend_tree(g)
        assert set(res.joint.names) == {"A1", "A2", "B1"}
        for v in ("A1", "A2", "B1"):
            assert moment(res.joint, [v]) == pytest.approx(0.5, abs=1e-12)
        for a in ("A1", "A2"):
            assert moment(res.joint, [a, "B1"]) == pytest.approx(0.25 + SQRT2 / 8, abs=1e-12)

    def test_block_tree(self, singlet):
        # {A1, A2} block linked to B1 and B2 with an assumed <A1 A2>
        from bellext.representability import lp_feasible
        from bellext.probability import MomentConstraints

        block = pair("A1", "A2", 0.5, 0.5, 0.25)
        edges = []
        for k, b in ((1, "B1"), (2, "B2")):
            data = {"A1": 0.5, "A2": 0.5, b: 0.5, f"A1,{b}": 0.3, f"A2,{b}": 0.25, "A1,A2": 0.25}
            d = lp_feasible(MomentConstraints(VariableSet(("A1", "A2", b)), data))
            edges.append(Edge(0, k, d))
        g = CompatibilityGraph((("A1", "A2"), ("B1",), ("B2",)), tuple(edges))
        res = extend_tree(g)
        assert sorted(res.joint.names) == ["A1", "A2", "B1", "B2"]
        assert edge_marginal_error(res, g) <= 1e-9
        assert max_abs_diff(block, marginalize(res.joint, ["A1", "A2"])) <= 1e-9

    def test_single_edge_passthrough(self):
        d = pair("A", "B", 0.4, 0.7, 0.3)
        g = CompatibilityGraph((("A",), ("B",)), (Edge(0, 1, d),))
        assert extend_tree(g).joint is d

    def test_single_node_uniform(self):
        res = extend_tree(CompatibilityGraph((("A", "B"),)))
        np.testing.assert_allclose(res.joint.weights, [0.25] * 4)

    def test_not_a_tree(self):
        nodes = (("A",), ("B",), ("C",))
        u = Distribution.uniform
        edges = [Edge(a, b, u(VariableSet(nodes[a] + nodes[b]))) for a, b in [(0, 1), (1, 2), (2, 0)]]
        with pytest.raises(NotATree):
            extend_tree(CompatibilityGraph(nodes, tuple(edges)))

    def test_mismatch_names_edge(self):
        g = CompatibilityGraph(
            (("A",), ("B",), ("C",)),
            (Edge(0, 1, pair("A", "B", 0.5, 0.5, 0.25)), Edge(1, 2, pair("B", "C", 0.7, 0.5, 0.35))),
        )
        with pytest.raises(MarginalMismatch) as info:
            extend_tree(g)
        assert info.value.edge in (0, 1)

    def test_bfs_root_is_lexicographically_least(self):
        res = extend_tree(path_graph())
        assert res.root == 0  # ("A1",) < ("A2",) < ("B1",)
        assert res.joint.names[0] == "A1"

    def test_root_invariance_of_edge_marginals(self, rng):
        for _ in range(50):
            g = random_tree_graph(rng)
            for root in range(len(g.nodes)):
                res = extend_tree(g, root=root)
                assert edge_marginal_error(res, g) <= 1e-9

    def test_json_round_trip(self):
        g = path_graph()
        back = CompatibilityGraph.from_json(json.dumps(g.to_json()))
        assert back.nodes == g.nodes
        assert [(e.a, e.b) for e in back.edges] == [(e.a, e.b) for e in g.edges]
        assert extend_tree(back).joint.weights.tolist() == extend_tree(g).joint.weights.tolist()


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_tree_marginals(seed):
    g = random_tree_graph(np.random.default_rng(seed))
    assert is_tree(g)
    res = extend_tree(g)
    assert sorted(res.joint.names) == sorted(g.variables)
    assert edge_marginal_error(res, g) <= 1e-9
