"""Retrieval evaluation metrics: capped recall, nDCG, and topological recall.

Topological recall gives partial credit for gold nodes the retriever got
close to: each gold node contributes 1 / (1 + u), where u accumulates
log(1 + degree) along the cheapest node-weighted path from any retrieved
node. Retrieved gold nodes have u = 0; unreachable ones contribute 0.
"""

from __future__ import annotations

import heapq
import math
from typing import Dict, Iterable, List, Literal, Sequence, Set, Tuple, Union

from .errors import GraphFormatError, UnknownNodeError
from .graph import CorpusGraph, View
from .ranked import RankedList

PathMode = Literal["cost", "hops"]

RetLike = Union[RankedList, Iterable[str]]


def _ret_keys(ret: RetLike) -> Tuple[str, ...]:
    if isinstance(ret, RankedList):
        return ret.keys()
    return tuple(ret)


def _node_weight(g: CorpusGraph, key: str, view: View) -> float:
    return math.log1p(g.degree(key, view))


def seed_path_costs(
    g: CorpusGraph,
    ret_keys: Sequence[str],
    view: View = "undirected",
    mode: PathMode = "cost",
) -> Dict[str, float]:
    """Multi-source node-weighted shortest-path costs from the retrieved set.

    The cost of reaching node v is the sum of log(1 + degree) over every node
    on the path including the seed and v itself. With mode="hops", paths are
    compared by hop count first and accumulated weight second (the
    hop-shortest reading); the returned cost is still the weight sum.
    """
    dist: Dict[str, Tuple] = {}
    heap: List[Tuple] = []
    for seed in set(ret_keys):
        w = _node_weight(g, seed, view)
        cost = (0, w) if mode == "hops" else (w,)
        if seed not in dist or cost < dist[seed]:
            dist[seed] = cost
            heapq.heappush(heap, cost + (seed,))

    while heap:
        *cost_t, node = heapq.heappop(heap)
        cost = tuple(cost_t)
        if dist.get(node) != cost:
            continue
        for nb in g.neighbors(node, view):
            w = _node_weight(g, nb, view)
            if mode == "hops":
                cand = (cost[0] + 1, cost[1] + w)
            else:
                cand = (cost[0] + w,)
            if nb not in dist or cand < dist[nb]:
                dist[nb] = cand
                heapq.heappush(heap, cand + (nb,))

    return {k: v[-1] for k, v in dist.items()}


def uncertainty(
    g: CorpusGraph,
    ret_keys: Iterable[str],
    target: str,
    view: View = "undirected",
    mode: PathMode = "cost",
) -> float:
    """Accumulated log-degree along the cheapest retrieved-to-target path.

    The seed's own weight is included; the target's is excluded. Targets in
    the retrieved set cost 0; unreachable targets cost infinity.
    """
    if target not in g:
        raise UnknownNodeError(target)
    ret_set = set(ret_keys)
    if target in ret_set:
        return 0.0
    if not ret_set:
        return math.inf
    costs = _costs_to_predecessors(g, tuple(sorted(ret_set)), view, mode)
    return costs.get(target, math.inf)


def _costs_to_predecessors(
    g: CorpusGraph,
    ret_keys: Tuple[str, ...],
    view: View,
    mode: PathMode,
) -> Dict[str, float]:
    """u-values for all targets: min over target-neighbors of the seed path cost."""
    if mode == "hops":
        dist: Dict[str, Tuple] = {}
        heap: List[Tuple] = []
        for seed in ret_keys:
            w = _node_weight(g, seed, view)
            cost = (0, w)
            if seed not in dist or cost < dist[seed]:
                dist[seed] = cost
                heapq.heappush(heap, cost + (seed,))
        while heap:
            hops, weight, node = heapq.heappop(heap)
            if dist.get(node) != (hops, weight):
                continue
            for nb in g.neighbors(node, view):
                cand = (hops + 1, weight + _node_weight(g, nb, view))
                if nb not in dist or cand < dist[nb]:
                    dist[nb] = cand
                    heapq.heappush(heap, cand + (nb,))
        out: Dict[str, float] = {}
        for key in g.node_keys:
            best = None
            for nb in g.neighbors(key, view):
                if nb in dist:
                    cand = dist[nb]
                    if best is None or cand < best:
                        best = cand
            if best is not None:
                out[key] = best[1]
        return out

    costs = seed_path_costs(g, ret_keys, view=view, mode="cost")
    out = {}
    for key in g.node_keys:
        reachable = [costs[nb] for nb in g.neighbors(key, view) if nb in costs]
        if reachable:
            out[key] = min(reachable)
    return out


def recall_uncapped(ret: RetLike, oracle: Set[str]) -> float:
    """|oracle intersect retrieved| / |oracle| over the full retrieved set."""
    if not oracle:
        raise ValueError("oracle set is empty")
    found = len(oracle & set(_ret_keys(ret)))
    return found / len(oracle)


def capped_recall_at_k(ret: RetLike, oracle: Set[str], k: int) -> float:
    """Recall at k normalized by min(k, |oracle|), so a perfect top-k scores 1."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not oracle:
        raise ValueError("oracle set is empty")
    top = set(_ret_keys(ret)[:k])
    return len(top & oracle) / min(k, len(oracle))


def ndcg_at_k(ret: RetLike, oracle: Set[str], k: int) -> float:
    """Binary-relevance nDCG at k with 1/log2(rank + 1) discounts."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not oracle:
        raise ValueError("oracle set is empty")
    keys = _ret_keys(ret)[:k]
    dcg = sum(1.0 / math.log2(rank + 1) for rank, key in enumerate(keys, start=1) if key in oracle)
    ideal = sum(1.0 / math.log2(rank + 1) for rank in range(1, min(k, len(oracle)) + 1))
    return dcg / ideal


def topological_recall(
    g: CorpusGraph,
    ret: RetLike,
    oracle: Set[str],
    view: View = "undirected",
    mode: PathMode = "cost",
) -> float:
    """Mean over gold nodes of 1 / (1 + u); unreachable nodes contribute 0."""
    if not oracle:
        raise ValueError("oracle set is empty")
    ret_keys = tuple(sorted(set(_ret_keys(ret))))
    for key in oracle:
        if key not in g:
            raise UnknownNodeError(key)
    if not ret_keys:
        return 0.0
    costs = _costs_to_predecessors(g, ret_keys, view, mode)
    ret_set = set(ret_keys)
    total = 0.0
    for key in oracle:
        if key in ret_set:
            total += 1.0
        else:
            u = costs.get(key, math.inf)
            if math.isfinite(u):
                total += 1.0 / (1.0 + u)
    return total / len(oracle)


def miss_tr(
    g: CorpusGraph,
    ret: RetLike,
    oracle: Set[str],
    view: View = "undirected",
    mode: PathMode = "cost",
) -> float:
    """Partial-credit component for gold nodes not retrieved.

    Equals (|oracle \\ ret| / |oracle|) * TR(ret, oracle \\ ret); zero when
    every gold node was retrieved. Always tr == recall_uncapped + miss_tr.
    """
    if not oracle:
        raise ValueError("oracle set is empty")
    missed = oracle - set(_ret_keys(ret))
    if not missed:
        return 0.0
    frac = len(missed) / len(oracle)
    return frac * topological_recall(g, ret, missed, view=view, mode=mode)


def marginal_recall_gain(
    final: RetLike,
    initial_vs: RetLike,
    oracle: Set[str],
    k_total: int,
    k_vs: int,
) -> float:
    """Capped recall of the final list at k_total minus the seed list at k_vs."""
    return capped_recall_at_k(final, oracle, k_total) - capped_recall_at_k(initial_vs, oracle, k_vs)


def load_qrels(path: str) -> Dict[str, Set[str]]:
    """Read tab-separated (query-id, node-key, relevance) rows; relevance > 0 is gold."""
    qrels: Dict[str, Set[str]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n\r")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise GraphFormatError("qrels file", line_no, f"expected 3 columns, got {len(parts)}")
            qid, key, rel = parts
            try:
                relevance = float(rel)
            except ValueError as exc:
                raise GraphFormatError("qrels file", line_no, f"bad relevance {rel!r}") from exc
            if relevance > 0:
                qrels.setdefault(qid, set()).add(key)
    return qrels
