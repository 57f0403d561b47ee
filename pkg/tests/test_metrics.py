import math
import random

import pytest

from fastinsight import (
    capped_recall_at_k,
    load_qrels,
    marginal_recall_gain,
    miss_tr,
    ndcg_at_k,
    recall_uncapped,
    seed_path_costs,
    topological_recall,
    uncertainty,
)
from fastinsight.errors import GraphFormatError, UnknownNodeError

from conftest import make_graph, random_graph, ranked


LN2 = math.log(2)
LN3 = math.log(3)


def _exhaustive_uncertainty(g, ret_keys, target, mode="cost"):
    """Brute-force u over all simple paths from any retrieved node to target."""
    ret_set = set(ret_keys)
    if target in ret_set:
        return 0.0
    best = None
    w = {k: math.log1p(g.degree(k)) for k in g.node_keys}

    def dfs(node, visited, hops, weight):
        nonlocal best
        if node == target:
            cand = (hops, weight) if mode == "hops" else (weight,)
            if best is None or cand < best:
                best = cand
            return
        for nb in g.neighbors(node):
            if nb not in visited:
                extra = w[nb] if nb != target else 0.0
                dfs(nb, visited | {nb}, hops + 1, weight + extra)

    for seed in ret_set:
        dfs(seed, {seed}, 0, w[seed])
    return math.inf if best is None else best[-1]


class TestSetMetrics:
    def test_capped_recall_examples(self):
        ret = ranked("a", "b", "c", "d")
        assert capped_recall_at_k(ret, {"a", "c"}, 2) == pytest.approx(0.5)
        assert capped_recall_at_k(ret, {"a", "c"}, 4) == pytest.approx(1.0)
        assert capped_recall_at_k(ret, {"a", "x", "y"}, 1) == pytest.approx(1.0)

    def test_recall_uncapped(self):
        assert recall_uncapped(["a", "b"], {"a", "x", "y", "z"}) == pytest.approx(0.25)
        assert recall_uncapped([], {"a"}) == 0.0

    def test_ndcg_hand_value(self):
        # single gold node at rank 3 out of k=3: dcg = 1/log2(4), ideal = 1/log2(2)
        got = ndcg_at_k(ranked("x", "y", "gold"), {"gold"}, 3)
        assert got == pytest.approx(0.5)
        # gold at rank 2 with two gold total: dcg = 1/log2(3) = 0.6309...
        got = ndcg_at_k(ranked("x", "g1"), {"g1", "g2"}, 2)
        assert got == pytest.approx((1 / math.log2(3)) / (1 + 1 / math.log2(3)))

    def test_ndcg_perfect_is_one(self):
        assert ndcg_at_k(ranked("g1", "g2", "x"), {"g1", "g2"}, 3) == pytest.approx(1.0)

    def test_empty_oracle_rejected(self):
        for fn in (lambda: recall_uncapped(["a"], set()),
                   lambda: capped_recall_at_k(["a"], set(), 1),
                   lambda: ndcg_at_k(["a"], set(), 1)):
            with pytest.raises(ValueError):
                fn()

    def test_marginal_recall_gain(self):
        final = ranked(*[f"n{i}" for i in range(9)], "gold")
        seeds = ranked(*[f"n{i}" for i in range(10)])
        assert marginal_recall_gain(final, seeds, {"gold"}, 10, 10) == pytest.approx(1.0)
        assert marginal_recall_gain(seeds, final, {"gold"}, 10, 10) == pytest.approx(-1.0)


class TestUncertainty:
    def test_retrieved_target_is_zero(self, path_graph):
        assert uncertainty(path_graph, ["a", "b"], "b") == 0.0

    def test_path_hand_value(self, path_graph):
        # a - b - c; seeds {a}: path cost = w(a) + w(b) = ln2 + ln3, w(c) excluded
        got = uncertainty(path_graph, ["a"], "c")
        assert got == pytest.approx(LN2 + LN3)

    def test_unreachable_is_inf(self):
        g = make_graph(["a", "b", "z"], [("a", "b")])
        assert uncertainty(g, ["a"], "z") == math.inf

    def test_unknown_target_rejected(self, path_graph):
        with pytest.raises(UnknownNodeError):
            uncertainty(path_graph, ["a"], "missing")

    def test_seed_degree_matters(self):
        # two routes to t: via hub (degree 4) or via leaf chain; cheaper one wins
        g = make_graph(
            ["s", "hub", "t", "x1", "x2", "mid"],
            [("s", "hub"), ("hub", "t"), ("hub", "x1"), ("hub", "x2"),
             ("s", "mid"), ("mid", "t")],
        )
        got = uncertainty(g, ["s"], "t")
        want = math.log1p(g.degree("s")) + math.log1p(g.degree("mid"))
        assert got == pytest.approx(want)

    def test_matches_exhaustive_on_random_graphs(self):
        rng = random.Random(17)
        for _ in range(200):
            g = random_graph(rng, n_max=8)
            if g.n_nodes < 2:
                continue
            keys = list(g.node_keys)
            ret = rng.sample(keys, rng.randint(1, g.n_nodes - 1))
            target = rng.choice([k for k in keys])
            for mode in ("cost", "hops"):
                got = uncertainty(g, ret, target, mode=mode)
                want = _exhaustive_uncertainty(g, ret, target, mode=mode)
                if math.isinf(want):
                    assert math.isinf(got)
                else:
                    assert got == pytest.approx(want, abs=1e-9)

    def test_hops_mode_prefers_fewer_hops(self):
        # two-hop route through a high-degree hub vs a cheaper three-hop chain
        leaves = [f"h{i}" for i in range(8)]
        g = make_graph(
            ["s", "hub", "t", "c1", "c2"] + leaves,
            [("s", "hub"), ("hub", "t"), ("s", "c1"), ("c1", "c2"), ("c2", "t")]
            + [("hub", h) for h in leaves],
        )
        cheap = uncertainty(g, ["s"], "t", mode="cost")
        hoppy = uncertainty(g, ["s"], "t", mode="hops")
        assert cheap == pytest.approx(3 * math.log(3))       # s, c1, c2 all degree 2
        assert hoppy == pytest.approx(math.log(3) + math.log(11))  # s + hub
        assert hoppy > cheap

    def test_seed_path_costs_covers_component(self, path_graph):
        costs = seed_path_costs(path_graph, ["a"])
        assert costs["a"] == pytest.approx(LN2)
        assert costs["b"] == pytest.approx(LN2 + LN3)
        assert costs["c"] == pytest.approx(LN2 + LN3 + LN2)


class TestTopologicalRecall:
    def test_retrieved_gold_scores_one(self, path_graph):
        assert topological_recall(path_graph, ["a"], {"a"}) == pytest.approx(1.0)

    def test_one_hop_partial_credit(self, path_graph):
        # u(c | {a}) = ln2 + ln3 -> 1/(1 + 1.7918) = 0.3582...
        got = topological_recall(path_graph, ["a"], {"c"})
        assert got == pytest.approx(1.0 / (1.0 + LN2 + LN3))

    def test_mixed_average(self, path_graph):
        got = topological_recall(path_graph, ["a"], {"a", "c"})
        assert got == pytest.approx((1.0 + 1.0 / (1.0 + LN2 + LN3)) / 2)

    def test_unreachable_contributes_zero(self):
        g = make_graph(["a", "b", "z"], [("a", "b")])
        assert topological_recall(g, ["a"], {"a", "z"}) == pytest.approx(0.5)
        # reachable missed gold still earns partial credit
        got = topological_recall(g, ["a"], {"b", "z"})
        assert got == pytest.approx(0.5 / (1.0 + LN2))

    def test_empty_ret_is_zero(self, path_graph):
        assert topological_recall(path_graph, [], {"a"}) == 0.0

    def test_decomposition_identity(self):
        rng = random.Random(23)
        for _ in range(300):
            g = random_graph(rng, n_max=9)
            if g.n_nodes < 2:
                continue
            keys = list(g.node_keys)
            ret = rng.sample(keys, rng.randint(0, g.n_nodes))
            oracle = set(rng.sample(keys, rng.randint(1, g.n_nodes)))
            tr = topological_recall(g, ret, oracle)
            rec = recall_uncapped(ret, oracle)
            mtr = 0.0 if not ret else miss_tr(g, ret, oracle)
            if ret:
                assert tr == pytest.approx(rec + mtr, abs=1e-12)

    def test_monotone_in_retrieved_set(self):
        rng = random.Random(29)
        for _ in range(100):
            g = random_graph(rng, n_max=9)
            if g.n_nodes < 3:
                continue
            keys = list(g.node_keys)
            oracle = set(rng.sample(keys, rng.randint(1, g.n_nodes)))
            small = rng.sample(keys, rng.randint(1, g.n_nodes - 1))
            big = small + [k for k in keys if k not in small][:1]
            assert (topological_recall(g, big, oracle)
                    >= topological_recall(g, small, oracle) - 1e-12)

    def test_miss_tr_zero_when_all_retrieved(self, path_graph):
        assert miss_tr(path_graph, ["a", "b", "c"], {"a", "c"}) == 0.0


class TestQrels:
    def test_load_filters_zero_relevance(self, tmp_path):
        p = tmp_path / "qrels.tsv"
        p.write_text("q1\tn1\t1\nq1\tn2\t0\nq2\tn3\t2\n\nq2\tn4\t1\n")
        got = load_qrels(str(p))
        assert got == {"q1": {"n1"}, "q2": {"n3", "n4"}}

    def test_bad_column_count(self, tmp_path):
        p = tmp_path / "qrels.tsv"
        p.write_text("q1\tn1\n")
        with pytest.raises(GraphFormatError):
            load_qrels(str(p))

    def test_bad_relevance_reports_line(self, tmp_path):
        p = tmp_path / "qrels.tsv"
        p.write_text("q1\tn1\t1\nq1\tn2\tsoon\n")
        with pytest.raises(GraphFormatError) as ei:
            load_qrels(str(p))
        assert ei.value.line_no == 2
