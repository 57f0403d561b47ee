"""Two-stage rerankers and graph-smoothed latent fusion.

A reranker is split into latent extraction and head scoring so that latent
vectors can be smoothed over the retrieved subgraph between the two stages:
H' = (1 - alpha) * H + alpha * (P @ H), with P the degree-reciprocal,
row-normalized propagation matrix of the induced subgraph.
"""

from __future__ import annotations

import abc
import json
import threading
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence

import numpy as np
import requests

from .embedding import hash_embed
from .errors import RerankerError
from .graph import CorpusGraph, View
from .ranked import RankedList

# A latent batch is a |ret| x d_h float matrix, rows aligned with the ranked
# list the latents were extracted for.
LatentBatch = np.ndarray


class Reranker(abc.ABC):
    """Query-conditioned scorer split into latent extraction and head scoring.

    Both stages must be deterministic per input; the composition
    ``head_scores(extract_latents(...))`` is the plain reranker score.
    """

    latent_dim: int

    @abc.abstractmethod
    def extract_latents(self, query: str, contents: Sequence[str]) -> LatentBatch:
        """Return a len(contents) x latent_dim matrix of latent vectors."""

    @abc.abstractmethod
    def head_scores(self, latents: LatentBatch) -> np.ndarray:
        """Map a latent batch to one real score per row."""


class HashReranker(Reranker):
    """Deterministic offline reranker for tests and desk-scale runs.

    Latent = elementwise product of the hash embeddings of query and content;
    the head is a fixed seeded linear layer close to summation, so the score
    approximates the embedding dot product while still exercising a
    non-trivial head.
    """

    def __init__(self, dimension: int = 256, seed: int = 7):
        self.latent_dim = dimension
        rng = np.random.default_rng(seed)
        self.head_weights = 1.0 + 0.01 * rng.standard_normal(dimension)
        self.head_bias = 0.0
        self._content_cache: Dict[str, np.ndarray] = {}
        self._query_cache: Dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    def _content_vec(self, text: str) -> np.ndarray:
        with self._lock:
            v = self._content_cache.get(text)
        if v is None:
            v = hash_embed(text, self.latent_dim)
            with self._lock:
                self._content_cache[text] = v
        return v

    def extract_latents(self, query: str, contents: Sequence[str]) -> LatentBatch:
        with self._lock:
            q = self._query_cache.get(query)
        if q is None:
            q = hash_embed(query, self.latent_dim)
            with self._lock:
                self._query_cache[query] = q
        out = np.empty((len(contents), self.latent_dim))
        for i, text in enumerate(contents):
            out[i] = q * self._content_vec(text)
        return out

    def head_scores(self, latents: LatentBatch) -> np.ndarray:
        return latents @ self.head_weights + self.head_bias


class AffineHead:
    """One or two affine layers (ReLU between) loaded from a JSON weights file.

    Single layer: {"weights": [[...], ...], "bias": [...]}.
    Two layers:   {"layers": [{"weights": ..., "bias": ...}, {...}]}.
    The final layer must produce a single output per row.
    """

    def __init__(self, layers: List[tuple]):
        self.layers = [(np.asarray(w, dtype=np.float64), np.asarray(b, dtype=np.float64)) for w, b in layers]

    @classmethod
    def from_file(cls, path: str) -> "AffineHead":
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        raw = payload["layers"] if "layers" in payload else [payload]
        return cls([(layer["weights"], layer["bias"]) for layer in raw])

    def __call__(self, latents: LatentBatch) -> np.ndarray:
        x = latents
        for i, (w, b) in enumerate(self.layers):
            x = x @ np.atleast_2d(w).T + b
            if i < len(self.layers) - 1:
                x = np.maximum(x, 0.0)
        return x.reshape(len(latents))


class RemoteReranker(Reranker):
    """Reranker whose latents come from an HTTP endpoint.

    POSTs {"query": ..., "documents": [...], "return_latents": true} and
    expects {"latents": [[...], ...]}. Scoring applies a locally loaded
    :class:`AffineHead`.
    """

    def __init__(self, url: str, latent_dim: int, head: AffineHead, timeout: float = 60.0):
        self.url = url
        self.latent_dim = latent_dim
        self.head = head
        self.timeout = timeout

    def extract_latents(self, query: str, contents: Sequence[str]) -> LatentBatch:
        resp = requests.post(
            self.url,
            json={"query": query, "documents": list(contents), "return_latents": True},
            timeout=self.timeout,
        )
        resp.raise_for_status()
        latents = np.asarray(resp.json()["latents"], dtype=np.float64)
        if latents.shape != (len(contents), self.latent_dim):
            raise ValueError(
                f"remote reranker returned shape {latents.shape}, "
                f"expected ({len(contents)}, {self.latent_dim})"
            )
        return latents

    def head_scores(self, latents: LatentBatch) -> np.ndarray:
        return self.head(latents)


@dataclass(frozen=True)
class PropagationMatrix:
    """Row-normalized propagation matrix over a retrieved subgraph.

    Rows listed in ``isolated_rows`` have no in-subgraph neighbor and are
    all-zero; every other row is non-negative and sums to 1.
    """

    matrix: np.ndarray
    isolated_rows: FrozenSet[int]


def build_propagation(ret: RankedList, g: CorpusGraph, view: View = "undirected") -> PropagationMatrix:
    """Construct the propagation matrix for the subgraph induced by ``ret``.

    A is the induced adjacency under ``view``; D holds full-graph degrees
    (zero degrees replaced by 1 to stay invertible; such nodes have empty A
    rows anyway); W = A @ D^-1 weights each neighbor by the reciprocal of its
    full-graph degree; P row-normalizes W. Rows with no neighbor are flagged
    isolated and left all-zero.
    """
    keys = ret.keys()
    n = len(keys)
    pos = {k: i for i, k in enumerate(keys)}

    a = np.zeros((n, n))
    for i, key in enumerate(keys):
        for nb in g.neighbors(key, view):
            j = pos.get(nb)
            if j is not None:
                a[i, j] = 1.0

    deg = np.array([max(g.degree(k, view), 1) for k in keys], dtype=np.float64)
    w = a / deg[np.newaxis, :]
    row_sums = w.sum(axis=1)
    isolated = frozenset(int(i) for i in np.flatnonzero(row_sums == 0.0))
    p = np.zeros_like(w)
    live = row_sums > 0.0
    p[live] = w[live] / row_sums[live, np.newaxis]
    return PropagationMatrix(matrix=p, isolated_rows=isolated)


def fuse_latents(h: LatentBatch, p: PropagationMatrix, alpha: float) -> LatentBatch:
    """Smooth latent rows over the propagation matrix.

    Non-isolated rows become (1 - alpha) * H + alpha * (P @ H); isolated rows
    are copied through unchanged so missing structure never attenuates the
    semantic signal.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 2 or p.matrix.shape != (len(h), len(h)):
        raise ValueError(f"shape mismatch: H {h.shape}, P {p.matrix.shape}")
    fused = (1.0 - alpha) * h + alpha * (p.matrix @ h)
    if p.isolated_rows:
        idx = sorted(p.isolated_rows)
        fused[idx] = h[idx]
    return fused


def _latents_for(q: str, ret: RankedList, g: CorpusGraph, rr: Reranker) -> LatentBatch:
    keys = ret.keys()
    contents = [g.content(k) for k in keys]
    try:
        return rr.extract_latents(q, contents)
    except Exception as exc:  # noqa: BLE001 - attribute failure to the batch head key
        raise RerankerError(keys[0] if keys else "?", str(exc)) from exc


def rerank_plain(q: str, ret: RankedList, rr: Reranker, k: Optional[int] = None,
                 contents: Optional[Sequence[str]] = None) -> RankedList:
    """Plain model-based rerank: top-k of ``ret`` by head(latent) score.

    ``contents`` must align with ``ret`` when given; otherwise the caller
    should use :func:`rerank_pool` with a graph. k defaults to |ret| and is
    clamped to it.
    """
    if len(ret) == 0:
        raise ValueError("ranked list is empty")
    if contents is None:
        raise ValueError("contents required (or use rerank_pool)")
    try:
        latents = rr.extract_latents(q, list(contents))
    except Exception as exc:  # noqa: BLE001
        raise RerankerError(ret.keys()[0], str(exc)) from exc
    scores = rr.head_scores(latents)
    k = len(ret) if k is None else min(k, len(ret))
    return RankedList.from_scores(zip(ret.keys(), scores.tolist()), k=k)


def rerank_pool(q: str, ret: RankedList, g: CorpusGraph, rr: Reranker,
                k: Optional[int] = None) -> RankedList:
    """Plain rerank of graph nodes named by ``ret`` (contents from the graph)."""
    return rerank_plain(q, ret, rr, k=k, contents=[g.content(key) for key in ret.keys()])


def granker(q: str, ret: RankedList, g: CorpusGraph, alpha: float, rr: Reranker,
            view: View = "undirected") -> RankedList:
    """Graph-aware rerank: extract latents, smooth them over the induced
    subgraph, score with the head, and reorder.

    Output is always a permutation of the input list (no drops); ties break
    by ascending key.
    """
    if len(ret) == 0:
        raise ValueError("ranked list is empty")
    h = _latents_for(q, ret, g, rr)
    p = build_propagation(ret, g, view=view)
    fused = fuse_latents(h, p, alpha)
    scores = rr.head_scores(fused)
    return RankedList.from_scores(zip(ret.keys(), scores.tolist()))
