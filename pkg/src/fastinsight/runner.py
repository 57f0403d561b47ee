"""Evaluation runner: retrieve over a query set, score, time, and persist.

Outputs per run directory:
  report.json     aggregates plus a config echo
  per_query.csv   deterministic per-query metric rows (sorted by query id)
  timings.csv     per-query wall-clock timings (not deterministic by nature)
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Tuple

from . import metrics as m
from .embedding import HashEmbedder, RemoteEmbedder, build_index, vector_search
from .engine import FastInsightConfig, baseline_re2, fastinsight_retrieve
from .errors import FastInsightError, GraphFormatError
from .graph import load_graph, personalized_pagerank
from .rerank import HashReranker

METHODS = ("vs", "re2", "fastinsight", "ppr")
STAGES = ("embed", "vs", "granker", "stex", "metrics")
WARMUP_QUERIES = 3

METRIC_COLUMNS = (
    "r10", "ndcg10", "recall_uncapped", "tr", "miss_tr",
    "r10_vs", "recall_at_budget", "delta_r",
)


class RunError(FastInsightError):
    """A per-query failure that aborted the run; names the query id."""

    def __init__(self, query_id: str, cause: Exception):
        super().__init__(f"query {query_id!r} failed: {cause}")
        self.query_id = query_id


@dataclass
class RunConfig:
    nodes: str
    edges: str
    queries: str
    qrels: str
    method: str = "fastinsight"
    batch: int = 10
    alpha: float = 0.2
    beta: float = 1.0
    budget: int = 100
    k: int = 10
    encoder: str = "hash"
    remote_url: Optional[str] = None
    embed_dim: int = 256
    out_dir: str = "out"
    jobs: int = 1
    seed: int = 0

    def validate(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.encoder not in ("hash", "remote"):
            raise ValueError(f"unknown encoder {self.encoder!r}")
        if self.encoder == "remote" and not self.remote_url:
            raise ValueError("--remote-url is required with the remote encoder")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        # FastInsightConfig re-validates batch/alpha/beta/budget relationships.
        FastInsightConfig(batch=self.batch, alpha=self.alpha, beta=self.beta,
                          budget=self.budget, k_report=self.k)
        for path in (self.nodes, self.edges, self.queries, self.qrels):
            if not os.path.exists(path):
                raise FileNotFoundError(path)


def load_queries(path: str) -> List[Tuple[str, str]]:
    """JSON-lines {"id": ..., "text": ...}, returned sorted by id."""
    out: List[Tuple[str, str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                out.append((str(obj["id"]), str(obj["text"])))
            except (json.JSONDecodeError, KeyError) as exc:
                raise GraphFormatError("queries file", line_no, str(exc)) from exc
    return sorted(out)


def _percentile(values: List[float], q: float) -> float:
    if not values:
        return math.nan
    ordered = sorted(values)
    pos = (len(ordered) - 1) * q
    lo, hi = int(math.floor(pos)), int(math.ceil(pos))
    if lo == hi:
        return ordered[lo]
    return ordered[lo] + (ordered[hi] - ordered[lo]) * (pos - lo)


def run_eval(cfg: RunConfig) -> Dict:
    """Run the configured method over every query; returns the report dict."""
    cfg.validate()
    os.makedirs(cfg.out_dir, exist_ok=True)

    g = load_graph(cfg.nodes, cfg.edges)
    qrels = m.load_qrels(cfg.qrels)
    queries = load_queries(cfg.queries)

    if cfg.encoder == "hash":
        emb = HashEmbedder(cfg.embed_dim)
    else:
        emb = RemoteEmbedder(cfg.remote_url, cfg.embed_dim)
    index = build_index(g, emb)
    rr = HashReranker(cfg.embed_dim)
    ficfg = FastInsightConfig(batch=cfg.batch, alpha=cfg.alpha, beta=cfg.beta,
                              budget=cfg.budget, k_report=cfg.k)

    def worker(qid: str, text: str) -> Dict:
        gold = qrels.get(qid)
        if not gold:
            raise ValueError(f"no gold nodes in qrels for query {qid!r}")
        stage = {s: 0.0 for s in STAGES}
        t_start = time.perf_counter()

        if cfg.method == "fastinsight":
            ret, trace = fastinsight_retrieve(text, g, index, emb, rr, ficfg)
            for s, secs in trace.stage_seconds.items():
                stage[s] += secs
        else:
            t0 = time.perf_counter()
            v_q = emb.encode_query(text)
            stage["embed"] += time.perf_counter() - t0
            if cfg.method == "vs":
                t0 = time.perf_counter()
                ret = vector_search(v_q, index, cfg.budget)
                stage["vs"] += time.perf_counter() - t0
            elif cfg.method == "re2":
                t0 = time.perf_counter()
                pool = vector_search(v_q, index, cfg.budget)
                stage["vs"] += time.perf_counter() - t0
                t0 = time.perf_counter()
                ret = baseline_re2(text, index, emb, rr, g, pool=cfg.budget, k=cfg.k)
                stage["granker"] += time.perf_counter() - t0
            else:  # ppr
                t0 = time.perf_counter()
                seeds = vector_search(v_q, index, cfg.batch)
                stage["vs"] += time.perf_counter() - t0
                t0 = time.perf_counter()
                expanded = personalized_pagerank(g, seeds, k=max(cfg.budget - len(seeds), 1))
                ret = seeds.extend(expanded.items())
                stage["stex"] += time.perf_counter() - t0

        t0 = time.perf_counter()
        v_q = emb.encode_query(text)
        seeds10 = vector_search(v_q, index, min(10, len(index)))
        row = {
            "query_id": qid,
            "r10": m.capped_recall_at_k(ret, gold, cfg.k),
            "ndcg10": m.ndcg_at_k(ret, gold, cfg.k),
            "recall_uncapped": m.recall_uncapped(ret, gold),
            "tr": m.topological_recall(g, ret, gold),
            "miss_tr": m.miss_tr(g, ret, gold),
            "r10_vs": m.capped_recall_at_k(seeds10, gold, 10),
            "recall_at_budget": m.capped_recall_at_k(ret, gold, cfg.budget),
        }
        row["delta_r"] = row["recall_at_budget"] - row["r10_vs"]
        stage["metrics"] += time.perf_counter() - t0

        qpt = time.perf_counter() - t_start
        row["_qpt_ms"] = qpt * 1000.0
        for s in STAGES:
            row[f"_{s}_ms"] = stage[s] * 1000.0
        return row

    def safe_worker(qid: str, text: str) -> Dict:
        try:
            return worker(qid, text)
        except Exception as exc:  # noqa: BLE001 - rewrap with the query id
            raise RunError(qid, exc) from exc

    rows: List[Dict] = []
    error: Optional[RunError] = None
    try:
        if cfg.jobs == 1:
            for qid, text in queries:
                rows.append(safe_worker(qid, text))
        else:
            with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
                futures = [pool.submit(safe_worker, qid, text) for qid, text in queries]
                for fut in futures:
                    rows.append(fut.result())
    except RunError as exc:
        # Flush whatever completed, then abort with the failing query id.
        error = exc

    rows.sort(key=lambda r: r["query_id"])
    _write_per_query(os.path.join(cfg.out_dir, "per_query.csv"), rows)
    _write_timings(os.path.join(cfg.out_dir, "timings.csv"), rows)
    report = _build_report(cfg, rows, partial=error is not None)
    with open(os.path.join(cfg.out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if error is not None:
        raise error
    return report


def _write_per_query(path: str, rows: List[Dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("query_id",) + METRIC_COLUMNS)
        for row in rows:
            writer.writerow([row["query_id"]] + [f"{row[c]:.9f}" for c in METRIC_COLUMNS])


def _write_timings(path: str, rows: List[Dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["query_id", "qpt_ms"] + [f"{s}_ms" for s in STAGES])
        for row in rows:
            writer.writerow([row["query_id"], f"{row['_qpt_ms']:.3f}"]
                            + [f"{row[f'_{s}_ms']:.3f}" for s in STAGES])


def _build_report(cfg: RunConfig, rows: List[Dict], partial: bool) -> Dict:
    timed = rows[WARMUP_QUERIES:] if len(rows) > WARMUP_QUERIES else rows
    qpts = [r["_qpt_ms"] for r in timed]
    report = {
        "config": asdict(cfg),
        "n_queries": len(rows),
        "partial": partial,
        "metrics": {
            c: (sum(r[c] for r in rows) / len(rows) if rows else math.nan)
            for c in METRIC_COLUMNS
        },
        "timing": {
            "warmup_excluded": len(rows) - len(timed),
            "qpt_ms_mean": sum(qpts) / len(qpts) if qpts else math.nan,
            "qpt_ms_p95": _percentile(qpts, 0.95),
            "stage_ms_mean": {
                s: (sum(r[f"_{s}_ms"] for r in timed) / len(timed) if timed else math.nan)
                for s in STAGES
            },
        },
    }
    return report


def run_sweep(cfg: RunConfig, budgets: Optional[List[int]] = None) -> Dict:
    """Run one evaluation per budget; per-budget outputs land in subdirectories."""
    budgets = budgets or list(range(10, 101, 10))
    points = []
    base_out = cfg.out_dir
    for b in budgets:
        sub = RunConfig(**{**asdict(cfg), "budget": b, "batch": min(cfg.batch, b),
                           "out_dir": os.path.join(base_out, f"b{b:03d}")})
        report = run_eval(sub)
        points.append({
            "budget": b,
            "qpt_ms_mean": report["timing"]["qpt_ms_mean"],
            "tr_mean": report["metrics"]["tr"],
            "r10_mean": report["metrics"]["r10"],
        })
    summary = {"config": asdict(cfg), "points": points}
    os.makedirs(base_out, exist_ok=True)
    with open(os.path.join(base_out, "sweep.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary
