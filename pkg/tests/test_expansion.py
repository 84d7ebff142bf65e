"""Seed selection, candidate growth, pruning, and the full expansion loop."""

from __future__ import annotations

import random

import numpy as np
import pytest

from conftest import directional_oracle, graph_of, passage, random_corpus, serialized
from helprag.encoding import encode
from helprag.errors import EmptyGraph, InvalidParams
from helprag.expansion import (
    ExpansionConfig,
    HyperNode,
    expand_candidates,
    prune,
    run_expansion,
    select_seeds,
)
from helprag.kg import KnowledgeGraph, TripleToPassageIndex, build_index, canonicalize_triplet
from oracles import brute_force_expansion


def beam_sets(beam: list[HyperNode]) -> list[frozenset]:
    return [node.triplets for node in beam]


class TestSelectSeeds:
    def test_top_n_by_cosine(self):
        graph = graph_of(
            passage("p1", ("aaa", "r", "a2")),
            passage("p2", ("bbb", "r", "b2")),
            passage("p3", ("ccc", "r", "c2")),
        )
        enc = directional_oracle(
            "the query",
            {
                serialized(("aaa", "r", "a2")): 0.9,
                serialized(("bbb", "r", "b2")): 0.5,
                serialized(("ccc", "r", "c2")): 0.1,
            },
        )
        vq = encode(enc, ["the query"])[0]
        seeds = select_seeds(graph, enc, vq, n=2)
        assert beam_sets(seeds) == [
            frozenset({canonicalize_triplet("aaa", "r", "a2")}),
            frozenset({canonicalize_triplet("bbb", "r", "b2")}),
        ]
        for node in seeds:
            assert node.query_distance == pytest.approx(
                float(np.linalg.norm(node.embedding - vq)), abs=1e-12
            )

    def test_saturation_returns_all(self, hash_encoder):
        graph = graph_of(passage("p1", ("a", "r", "b"), ("b", "r", "c")))
        vq = encode(hash_encoder, ["query"])[0]
        assert len(select_seeds(graph, hash_encoder, vq, n=10)) == 2

    def test_empty_graph_raises(self, hash_encoder):
        graph = build_index([])
        vq = encode(hash_encoder, ["query"])[0]
        with pytest.raises(EmptyGraph):
            select_seeds(graph, hash_encoder, vq, n=1)


class TestExpandCandidates:
    def test_chain_grows_by_one(self):
        graph = graph_of(passage("p1", ("a", "r1", "b"), ("b", "r2", "c")))
        seed = HyperNode.from_triplets(frozenset({canonicalize_triplet("a", "r1", "b")}))
        candidates = expand_candidates(graph, [seed])
        assert beam_sets(candidates) == [
            frozenset({canonicalize_triplet("a", "r1", "b"), canonicalize_triplet("b", "r2", "c")})
        ]
        assert candidates[0].embedding is None

    def test_isolated_node_carried_forward(self):
        graph = graph_of(passage("p1", ("a", "r", "b")), passage("p2", ("x", "r", "y")))
        lonely = HyperNode.from_triplets(frozenset({canonicalize_triplet("x", "r", "y")}))
        candidates = expand_candidates(graph, [lonely])
        assert beam_sets(candidates) == [lonely.triplets]

    def test_same_set_reached_twice_deduplicated(self):
        t1 = canonicalize_triplet("a", "r", "b")
        t2 = canonicalize_triplet("b", "r", "c")
        graph = graph_of(passage("p1", ("a", "r", "b"), ("b", "r", "c")))
        candidates = expand_candidates(
            graph,
            [HyperNode.from_triplets(frozenset({t1})), HyperNode.from_triplets(frozenset({t2}))],
        )
        assert beam_sets(candidates) == [frozenset({t1, t2})]

    def test_empty_beam_rejected(self):
        graph = graph_of(passage("p1", ("a", "r", "b")))
        with pytest.raises(InvalidParams):
            expand_candidates(graph, [])


class TestPrune:
    def _candidates(self):
        texts = {
            serialized(("n1", "r", "m1")): 0.98,  # dist ~0.2
            serialized(("n2", "r", "m2")): 0.595,  # dist ~0.9
            serialized(("n3", "r", "m3")): 0.875,  # dist ~0.5
        }
        enc = directional_oracle("q", texts)
        nodes = [
            HyperNode.from_triplets(frozenset({canonicalize_triplet(f"n{i}", "r", f"m{i}")}))
            for i in (1, 2, 3)
        ]
        return enc, nodes

    def test_keeps_k_smallest_distances(self):
        enc, nodes = self._candidates()
        vq = encode(enc, ["q"])[0]
        kept = prune(nodes, enc, vq, k=2)
        assert [n.serialized for n in kept] == ["n1 r m1", "n3 r m3"]
        assert kept[0].query_distance < kept[1].query_distance
        assert kept[0].embedding is not None

    def test_k_exceeding_candidates_returns_all_sorted(self):
        enc, nodes = self._candidates()
        vq = encode(enc, ["q"])[0]
        kept = prune(nodes, enc, vq, k=10)
        assert [n.serialized for n in kept] == ["n1 r m1", "n3 r m3", "n2 r m2"]

    def test_equal_distance_breaks_by_serialization(self):
        enc = directional_oracle("q", {"a r b": 0.5, "c r d": 0.5})
        vq = encode(enc, ["q"])[0]
        nodes = [
            HyperNode.from_triplets(frozenset({canonicalize_triplet("c", "r", "d")})),
            HyperNode.from_triplets(frozenset({canonicalize_triplet("a", "r", "b")})),
        ]
        kept = prune(nodes, enc, vq, k=2)
        assert [n.serialized for n in kept] == ["a r b", "c r d"]


class TestRunExpansion:
    def test_two_hop_chain_found(self):
        # oracle rewards the full chain; query bridges a -> c through b
        chain = [("a", "r1", "b"), ("b", "r2", "c")]
        graph = graph_of(passage("p1", chain[0]), passage("p2", chain[1]))
        enc = directional_oracle(
            "how does a reach c?",
            {
                serialized(chain[0]): 0.9,
                serialized(chain[1]): 0.2,
                serialized(*chain): 0.99,
            },
        )
        final = run_expansion(graph, enc, "how does a reach c?", ExpansionConfig(hops=2, seed_size=1, beam_size=5))
        assert beam_sets(final) == [frozenset(canonicalize_triplet(*t) for t in chain)]

    def test_single_hop_returns_seeds(self, hash_encoder):
        graph = graph_of(passage("p1", ("a", "r", "b"), ("b", "r", "c")))
        config = ExpansionConfig(hops=1, seed_size=2, beam_size=5)
        final = run_expansion(graph, hash_encoder, "query", config)
        vq = encode(hash_encoder, ["query"])[0]
        assert beam_sets(final) == beam_sets(select_seeds(graph, hash_encoder, vq, 2))

    def test_empty_graph_returns_empty(self, hash_encoder):
        empty = KnowledgeGraph(passages={}, index=TripleToPassageIndex())
        assert run_expansion(empty, hash_encoder, "query", ExpansionConfig()) == []

    def test_deterministic(self, hash_encoder):
        rng = random.Random(99)
        graph = build_index(random_corpus(rng, n_passages=30))
        config = ExpansionConfig(hops=3, seed_size=3, beam_size=8)
        first = run_expansion(graph, hash_encoder, "some question", config)
        second = run_expansion(graph, hash_encoder, "some question", config)
        assert [n.serialized for n in first] == [n.serialized for n in second]
        assert [n.query_distance for n in first] == [n.query_distance for n in second]

    def test_monotone_growth_and_connectivity(self, hash_encoder):
        rng = random.Random(4)
        graph = build_index(random_corpus(rng, n_passages=40, entity_pool=15))
        for hops in (1, 2, 3):
            config = ExpansionConfig(hops=hops, seed_size=4, beam_size=10)
            final = run_expansion(graph, hash_encoder, "connectivity probe", config)
            assert 0 < len(final) <= (config.seed_size if hops == 1 else config.beam_size)
            for node in final:
                assert 1 <= len(node.triplets) <= hops
                assert _connected(node.triplets)

    def test_oracle_equivalence_sample(self, hash_encoder):
        rng = random.Random(31337)
        for _ in range(10):
            graph = build_index(random_corpus(rng, n_passages=25, entity_pool=20))
            if not graph.index.catalog:
                continue
            hops, seeds, beam = rng.randint(1, 3), rng.randint(1, 5), rng.randint(1, 10)
            query = f"probe {rng.randint(0, 999)}"
            mine = run_expansion(
                graph, hash_encoder, query, ExpansionConfig(hops, seeds, beam)
            )
            reference = brute_force_expansion(graph, hash_encoder, query, hops, seeds, beam)
            assert beam_sets(mine) == reference


def _connected(triplets: frozenset) -> bool:
    remaining = set(triplets)
    frontier = {next(iter(remaining))}
    remaining -= frontier
    entities = set()
    for t in frontier:
        entities |= {t.head, t.tail}
    while remaining:
        nxt = {t for t in remaining if t.head in entities or t.tail in entities}
        if not nxt:
            return False
        for t in nxt:
            entities |= {t.head, t.tail}
        remaining -= nxt
    return True


class TestConfig:
    def test_defaults(self):
        config = ExpansionConfig()
        assert (config.hops, config.seed_size, config.beam_size) == (2, 3, 50)

    def test_invalid_rejected(self):
        with pytest.raises(InvalidParams):
            ExpansionConfig(hops=0)
        with pytest.raises(InvalidParams):
            ExpansionConfig(seed_size=0)
        with pytest.raises(InvalidParams):
            ExpansionConfig(beam_size=0)
