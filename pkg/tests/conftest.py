"""Shared fixtures and corpus builders for the test suite."""

from __future__ import annotations

import math
import random

import pytest

from helprag.encoding import HashEncoder, OracleEncoder, serialize_hypernode
from helprag.ingestion import CorpusRecord, build_and_embed
from helprag.kg import Passage, Triplet, build_index, canonicalize_triplet


@pytest.fixture(scope="session")
def hash_encoder() -> HashEncoder:
    return HashEncoder()


def passage(pid: str, *triples: tuple[str, str, str], text: str | None = None) -> Passage:
    parsed = tuple(canonicalize_triplet(*t) for t in triples)
    return Passage(pid, text or f"text of {pid}", parsed)


def graph_of(*passages: Passage):
    return build_index(list(passages))


def random_corpus(
    rng: random.Random,
    n_passages: int,
    max_triples_per_passage: int = 5,
    entity_pool: int = 30,
    relation_pool: int = 6,
) -> list[Passage]:
    """Random corpus over a bounded entity pool (dense enough to have adjacency)."""
    entities = [f"e{i}" for i in range(entity_pool)]
    relations = [f"r{i}" for i in range(relation_pool)]
    passages = []
    for p in range(n_passages):
        count = rng.randint(0, max_triples_per_passage)
        triples = tuple(
            Triplet(rng.choice(entities), rng.choice(relations), rng.choice(entities))
            for _ in range(count)
        )
        passages.append(Passage(f"p{p:04d}", f"passage number {p}", triples))
    return passages


def embedded_graph(records: list[CorpusRecord], encoder=None):
    return build_and_embed(records, encoder or HashEncoder())


def directional_oracle(query: str, placements: dict[str, float]):
    """Oracle encoder where each text sits at a chosen cosine from the query.

    The query maps to axis 0; a text with placement c maps to
    c*axis0 + sqrt(1-c^2)*axis1, so cosine(query, text) == c exactly
    (up to float32 quantization).
    """
    table: dict[str, list[float]] = {query: [1.0, 0.0, 0.0]}
    for text, cos in placements.items():
        table[text] = [cos, math.sqrt(max(0.0, 1.0 - cos * cos)), 0.0]
    return OracleEncoder(3, table)


def serialized(*triples: tuple[str, str, str]) -> str:
    return serialize_hypernode([canonicalize_triplet(*t) for t in triples])
