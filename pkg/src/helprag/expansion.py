"""Iterative hypernode expansion: seed selection, adjacency growth, pruning.

A hypernode is a connected set of triplets treated as one reasoning path.
Retrieval starts from the top-n triplets most cosine-aligned with the query,
grows each path by one adjacent triplet per hop, and keeps the k paths with
smallest Euclidean distance to the query after every hop. Because all
embeddings are unit vectors, cosine ranking and Euclidean-distance ranking
agree, so seed scoring and pruning use one consistent order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoding import Encoder, encode, serialize_hypernode
from .errors import EmptyGraph, InvalidParams
from .kg import KnowledgeGraph, Triplet, adjacent_triplets


@dataclass(eq=False)
class HyperNode:
    """A reasoning path: triplet set plus cached embedding and query distance.

    ``embedding`` and ``query_distance`` are None on freshly expanded
    candidates and are filled in by :func:`prune`.
    """

    triplets: frozenset[Triplet]
    serialized: str
    entities: frozenset[str]
    embedding: np.ndarray | None = None
    query_distance: float | None = None

    @classmethod
    def from_triplets(
        cls,
        triplets: frozenset[Triplet],
        embedding: np.ndarray | None = None,
        query_distance: float | None = None,
    ) -> "HyperNode":
        entities = frozenset(t.head for t in triplets) | frozenset(t.tail for t in triplets)
        return cls(
            triplets=triplets,
            serialized=serialize_hypernode(triplets),
            entities=entities,
            embedding=embedding,
            query_distance=query_distance,
        )


@dataclass(frozen=True)
class ExpansionConfig:
    """Search-space bounds: hop count, seed count, and beam width."""

    hops: int = 2
    seed_size: int = 3
    beam_size: int = 50

    def __post_init__(self) -> None:
        if self.hops < 1 or self.seed_size < 1 or self.beam_size < 1:
            raise InvalidParams("hops, seed_size, and beam_size must all be >= 1")


def select_seeds(
    graph: KnowledgeGraph, encoder: Encoder, query_vector: np.ndarray, n: int
) -> list[HyperNode]:
    """Top-n catalog triplets by cosine to the query, as singleton hypernodes.

    Ties break by ascending serialized form. Uses the precomputed triplet
    vectors when the graph carries them (bit-identical to encoding live);
    otherwise encodes every singleton serialization in one batch.
    """
    if n < 1:
        raise InvalidParams("seed count must be >= 1")
    catalog = graph.index.catalog
    if not catalog:
        raise EmptyGraph("cannot select seeds from a graph with no triplets")

    if graph.embeddings is not None:
        rows = graph.embeddings.triplet_units()
        if rows.shape[0] != len(catalog):
            raise InvalidParams("precomputed triplet vectors do not match the catalog")
    else:
        rows = encode(encoder, [serialize_hypernode([t]) for t in catalog])
    scores = rows @ query_vector

    order = sorted(range(len(catalog)), key=lambda i: (-scores[i], catalog[i].as_text()))
    seeds = []
    for i in order[:n]:
        emb = rows[i]
        seeds.append(
            HyperNode.from_triplets(
                frozenset([catalog[i]]),
                embedding=emb,
                query_distance=float(np.linalg.norm(emb - query_vector)),
            )
        )
    return seeds


def expand_candidates(graph: KnowledgeGraph, beam: list[HyperNode]) -> list[HyperNode]:
    """Grow every beam member by one adjacent triplet.

    A member whose entities have no unvisited neighbors is carried forward
    unchanged, so strong short paths survive to the final hop. Candidates
    are deduplicated by serialized form and returned in serialized order;
    embeddings of new candidates are left unset for :func:`prune`.
    """
    if not beam:
        raise InvalidParams("beam must be non-empty")
    seen: dict[str, HyperNode] = {}
    for node in beam:
        fresh = adjacent_triplets(graph, node.entities) - node.triplets
        if not fresh:
            seen.setdefault(node.serialized, node)
            continue
        for nxt in sorted(fresh):
            grown = HyperNode.from_triplets(node.triplets | {nxt})
            seen.setdefault(grown.serialized, grown)
    return [seen[key] for key in sorted(seen)]


def prune(
    candidates: list[HyperNode], encoder: Encoder, query_vector: np.ndarray, k: int
) -> list[HyperNode]:
    """Keep the k candidates nearest the query by Euclidean distance.

    Embeds all candidate serializations in one batch, sorts ascending by
    (distance, serialized form), and returns at most k filled-in nodes.
    """
    if not candidates:
        raise InvalidParams("candidate list must be non-empty")
    if k < 1:
        raise InvalidParams("beam width must be >= 1")
    rows = encode(encoder, [c.serialized for c in candidates])
    dists = np.linalg.norm(rows - query_vector, axis=1)
    order = sorted(range(len(candidates)), key=lambda i: (dists[i], candidates[i].serialized))
    return [
        HyperNode.from_triplets(
            candidates[i].triplets, embedding=rows[i], query_distance=float(dists[i])
        )
        for i in order[:k]
    ]


def run_expansion(
    graph: KnowledgeGraph,
    encoder: Encoder,
    query: str,
    config: ExpansionConfig,
    query_vector: np.ndarray | None = None,
) -> list[HyperNode]:
    """Full expansion loop; returns the final beam, seeds when hops == 1.

    An empty graph yields an empty list, signalling dense-only fallback
    downstream. The query embedding may be passed in to avoid re-encoding;
    encoders are deterministic, so the result is the same either way.
    """
    if not graph.index.catalog:
        return []
    if query_vector is None:
        query_vector = encode(encoder, [query])[0]
    beam = select_seeds(graph, encoder, query_vector, config.seed_size)
    for _ in range(2, config.hops + 1):
        candidates = expand_candidates(graph, beam)
        if not candidates:  # unreachable under carry-forward, kept as a guard
            break
        beam = prune(candidates, encoder, query_vector, config.beam_size)
    return beam
