"""Graph-based passage retrieval with hypernode expansion and path-guided
evidence localization.

Pipeline: a corpus of passages with extracted (head, relation, tail) triples
is indexed into a knowledge graph with a triple-to-passage provenance map;
at query time, seed triplets closest to the query grow into multi-triplet
reasoning paths by beam search, the final paths score their source passages
through the provenance weights, and a dense cosine channel backfills the
remaining context slots.
"""

from .encoding import (
    Encoder,
    HashEncoder,
    OracleEncoder,
    RemoteEncoder,
    cosine,
    distance,
    encode,
    serialize_hypernode,
)
from .errors import HelpRagError
from .evaluation import (
    BenchReport,
    QARecord,
    exact_match,
    gen_synthetic,
    load_qa,
    normalize_answer,
    recall_at_k,
    run_benchmark,
    token_f1,
)
from .expansion import (
    ExpansionConfig,
    HyperNode,
    expand_candidates,
    prune,
    run_expansion,
    select_seeds,
)
from .ingestion import (
    CorpusRecord,
    build_and_embed,
    extract_triples,
    load_corpus,
    load_index,
    save_index,
)
from .kg import (
    KnowledgeGraph,
    Passage,
    Triplet,
    adjacent_triplets,
    build_index,
    canonicalize_triplet,
    provenance_of,
)
from .localization import (
    HybridConfig,
    RetrievalResult,
    ScoredPassage,
    dense_rank,
    hybrid_merge,
    retrieve,
    retrieve_result,
    score_passages,
)

__version__ = "0.1.0"

__all__ = [
    "BenchReport",
    "CorpusRecord",
    "Encoder",
    "ExpansionConfig",
    "HashEncoder",
    "HelpRagError",
    "HybridConfig",
    "HyperNode",
    "KnowledgeGraph",
    "OracleEncoder",
    "Passage",
    "QARecord",
    "RemoteEncoder",
    "RetrievalResult",
    "ScoredPassage",
    "Triplet",
    "adjacent_triplets",
    "build_and_embed",
    "build_index",
    "canonicalize_triplet",
    "cosine",
    "dense_rank",
    "distance",
    "encode",
    "exact_match",
    "expand_candidates",
    "extract_triples",
    "gen_synthetic",
    "hybrid_merge",
    "load_corpus",
    "load_index",
    "load_qa",
    "normalize_answer",
    "provenance_of",
    "prune",
    "recall_at_k",
    "retrieve",
    "retrieve_result",
    "run_benchmark",
    "run_expansion",
    "save_index",
    "score_passages",
    "select_seeds",
    "serialize_hypernode",
    "token_f1",
]
