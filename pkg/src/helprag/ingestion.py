"""Corpus loading, triple extraction, embedding precompute, and persistence.

Corpora are JSON-lines files with optional precomputed triples, so desk-scale
runs never need an extraction service. An index bundle is a directory of the
corpus, the triplet catalog, two embedding files in a fixed binary layout,
and a manifest whose content hash makes load-time corruption detectable.
Round-trips are bit-exact: loading a saved bundle reproduces the in-memory
graph and unit vectors of a fresh build.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .encoding import Encoder, serialize_hypernode, unit_rows
from .errors import (
    CorruptFile,
    DuplicateId,
    InvalidParams,
    ParseError,
    ServiceUnreachable,
    VersionMismatch,
)
from .kg import KnowledgeGraph, Passage, build_index, canonicalize_triplet
from .services import ChatCompletionClient, ServiceConfig

log = logging.getLogger(__name__)

INDEX_VERSION = 1
EMBEDDING_MAGIC = b"HELPIDX1"

CORPUS_FILE = "corpus.jsonl"
TRIPLET_FILE = "triplets.jsonl"
PASSAGE_EMB_FILE = "passage_embeddings.bin"
TRIPLET_EMB_FILE = "triplet_embeddings.bin"
MANIFEST_FILE = "manifest.json"

EXTRACTION_PROMPT = """\
Extract factual knowledge triples from the passage below.
Reply with a JSON array only, no prose. Each element must be a three-string
array [subject, relation, object] stating one fact from the passage.
Reply with [] if the passage contains no extractable facts.

Passage:
{text}
"""

EXTRACTION_PROMPT_SHA256 = hashlib.sha256(EXTRACTION_PROMPT.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class CorpusRecord:
    """One input passage; ``triples`` is None until extraction has run."""

    id: str
    text: str
    triples: tuple[tuple[str, str, str], ...] | None = None


class EmbeddingStore:
    """Float32 passage and triplet embedding rows plus cached unit views.

    Rows are the quantized output of the encoder backend; the float64 unit
    matrices used for scoring are derived lazily and identically whether the
    rows came from a fresh encode or from a bundle on disk.
    """

    def __init__(
        self,
        passage_ids: tuple[str, ...],
        passage_rows: np.ndarray,
        triplet_rows: np.ndarray,
        encoder_id: str,
    ):
        if passage_rows.shape[0] != len(passage_ids):
            raise InvalidParams("passage row count does not match id count")
        self.passage_ids = passage_ids
        self.passage_rows = passage_rows
        self.triplet_rows = triplet_rows
        self.encoder_id = encoder_id
        self.dim = int(passage_rows.shape[1])
        self._passage_units: np.ndarray | None = None
        self._triplet_units: np.ndarray | None = None

    def passage_units(self) -> np.ndarray:
        if self._passage_units is None:
            self._passage_units = unit_rows(self.passage_rows)
        return self._passage_units

    def triplet_units(self) -> np.ndarray:
        if self._triplet_units is None:
            self._triplet_units = unit_rows(self.triplet_rows)
        return self._triplet_units


def load_corpus(path: str | Path) -> list[CorpusRecord]:
    """Parse a JSONL corpus; rejects malformed lines and duplicate ids."""
    records: list[CorpusRecord] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(lineno, f"invalid JSON: {exc.msg}") from exc
            records.append(_record_from_obj(obj, lineno))
            if records[-1].id in seen:
                raise DuplicateId(f"duplicate passage id {records[-1].id!r} at line {lineno}")
            seen.add(records[-1].id)
    return records


def _record_from_obj(obj: object, lineno: int) -> CorpusRecord:
    if not isinstance(obj, dict):
        raise ParseError(lineno, "expected a JSON object")
    pid = obj.get("id")
    text = obj.get("text")
    if not isinstance(pid, str) or not pid:
        raise ParseError(lineno, "'id' must be a non-empty string")
    if not isinstance(text, str) or not text:
        raise ParseError(lineno, "'text' must be a non-empty string")
    raw_triples = obj.get("triples")
    if raw_triples is None:
        return CorpusRecord(pid, text, None)
    if not isinstance(raw_triples, list):
        raise ParseError(lineno, "'triples' must be a list")
    triples = []
    for item in raw_triples:
        if not (isinstance(item, list) and len(item) == 3 and all(isinstance(f, str) for f in item)):
            raise ParseError(lineno, f"bad triple entry {item!r}")
        triples.append((item[0], item[1], item[2]))
    return CorpusRecord(pid, text, tuple(triples))


def _parse_triple_reply(reply: str) -> list[tuple[str, str, str]] | None:
    """Pull a [subject, relation, object] array out of a model reply, or None."""
    candidates = [reply]
    start, end = reply.find("["), reply.rfind("]")
    if start != -1 and end > start:
        candidates.append(reply[start : end + 1])
    for text in candidates:
        try:
            parsed = json.loads(text)
        except json.JSONDecodeError:
            continue
        if not isinstance(parsed, list):
            continue
        if all(isinstance(t, list) and len(t) == 3 and all(isinstance(f, str) for f in t) for t in parsed):
            return [(t[0], t[1], t[2]) for t in parsed]
    return None


def extract_triples(
    records: list[CorpusRecord], service: ServiceConfig
) -> list[CorpusRecord]:
    """Fill in missing triples via the chat-completion extraction service.

    Records already carrying triples pass through unchanged; ids and text are
    never modified. A record whose replies cannot be parsed after one retry
    keeps an empty triple list and logs a warning. If the very first request
    cannot reach the service at all, ServiceUnreachable propagates; transport
    failures later in the run degrade to per-record soft failures.
    """
    client = ChatCompletionClient(service)
    out: list[CorpusRecord] = []
    reached_service = False
    for record in records:
        if record.triples is not None:
            out.append(record)
            continue
        triples: list[tuple[str, str, str]] | None = None
        prompt = EXTRACTION_PROMPT.format(text=record.text)
        for attempt in range(2):
            try:
                reply = client.complete([{"role": "user", "content": prompt}])
            except ServiceUnreachable:
                if not reached_service:
                    raise
                log.warning("extraction service dropped out on record %s", record.id)
                break
            except ValueError:
                reached_service = True
                continue
            reached_service = True
            triples = _parse_triple_reply(reply)
            if triples is not None:
                break
            log.warning(
                "unparseable extraction reply for record %s (attempt %d)", record.id, attempt + 1
            )
        if triples is None:
            log.warning("no triples extracted for record %s; keeping it empty", record.id)
            triples = []
        out.append(replace(record, triples=tuple(triples)))
    return out


def build_and_embed(records: list[CorpusRecord], encoder: Encoder) -> KnowledgeGraph:
    """Canonicalize, index, and embed a corpus; returns the graph with vectors.

    Every passage text and every unique triplet serialization is encoded
    exactly once; triplet rows follow catalog order, passage rows follow
    sorted passage-id order.
    """
    passages = []
    for record in records:
        if record.triples is None:
            raise InvalidParams(f"record {record.id!r} has no triples; run extraction first")
        triplets = tuple(canonicalize_triplet(h, r, t) for h, r, t in record.triples)
        passages.append(Passage(record.id, record.text, triplets))

    graph = build_index(passages)
    ids = tuple(graph.passages)
    if ids:
        passage_rows = encoder.encode_batch([graph.passages[pid].text for pid in ids])
    else:
        passage_rows = np.empty((0, encoder.dim), dtype=np.float32)
    catalog = graph.index.catalog
    if catalog:
        triplet_rows = encoder.encode_batch([serialize_hypernode([t]) for t in catalog])
    else:
        triplet_rows = np.empty((0, passage_rows.shape[1]), dtype=np.float32)

    graph.embeddings = EmbeddingStore(ids, passage_rows, triplet_rows, encoder.encoder_id)
    return graph


# --- bundle persistence -------------------------------------------------------


def _write_atomic(path: Path, data: bytes) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _embedding_bytes(rows: np.ndarray) -> bytes:
    header = EMBEDDING_MAGIC + struct.pack("<I", rows.shape[1]) + struct.pack("<Q", rows.shape[0])
    return header + np.ascontiguousarray(rows, dtype="<f4").tobytes()


def _read_embedding_bytes(raw: bytes, name: str) -> np.ndarray:
    if raw[:8] != EMBEDDING_MAGIC:
        raise CorruptFile(f"{name}: bad magic")
    if len(raw) < 20:
        raise CorruptFile(f"{name}: truncated header")
    dim = struct.unpack("<I", raw[8:12])[0]
    count = struct.unpack("<Q", raw[12:20])[0]
    if len(raw) != 20 + 4 * dim * count:
        raise CorruptFile(f"{name}: payload size does not match header")
    return np.frombuffer(raw, dtype="<f4", offset=20).reshape(count, dim).copy()


def _dumps(obj: object) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def save_index(bundle_dir: str | Path, graph: KnowledgeGraph) -> dict:
    """Persist a graph with embeddings as an index bundle; returns the manifest."""
    if graph.embeddings is None:
        raise InvalidParams("graph carries no embeddings; build with build_and_embed first")
    store = graph.embeddings
    bundle = Path(bundle_dir)
    bundle.mkdir(parents=True, exist_ok=True)

    corpus_lines = [
        _dumps(
            {
                "id": p.id,
                "text": p.text,
                "triples": [[t.head, t.relation, t.tail] for t in p.triplets],
            }
        )
        for p in (graph.passages[pid] for pid in graph.passages)
    ]
    triplet_lines = [_dumps([t.head, t.relation, t.tail]) for t in graph.index.catalog]

    payloads = {
        CORPUS_FILE: ("\n".join(corpus_lines) + "\n" if corpus_lines else "").encode("utf-8"),
        TRIPLET_FILE: ("\n".join(triplet_lines) + "\n" if triplet_lines else "").encode("utf-8"),
        PASSAGE_EMB_FILE: _embedding_bytes(store.passage_rows),
        TRIPLET_EMB_FILE: _embedding_bytes(store.triplet_rows),
    }
    digest = hashlib.sha256()
    for name in (CORPUS_FILE, TRIPLET_FILE, PASSAGE_EMB_FILE, TRIPLET_EMB_FILE):
        digest.update(payloads[name])
        _write_atomic(bundle / name, payloads[name])

    manifest = {
        "version": INDEX_VERSION,
        "encoder_id": store.encoder_id,
        "dim": store.dim,
        "counts": {"passages": len(store.passage_ids), "triplets": len(graph.index.catalog)},
        "content_hash": digest.hexdigest(),
        "extraction_prompt_sha256": EXTRACTION_PROMPT_SHA256,
    }
    _write_atomic(bundle / MANIFEST_FILE, (_dumps(manifest) + "\n").encode("utf-8"))
    return manifest


def load_index(bundle_dir: str | Path) -> KnowledgeGraph:
    """Load a bundle, verifying version, content hash, and internal consistency."""
    bundle = Path(bundle_dir)
    try:
        manifest = json.loads((bundle / MANIFEST_FILE).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorruptFile(f"manifest is not valid JSON: {exc.msg}") from exc
    if manifest.get("version") != INDEX_VERSION:
        raise VersionMismatch(
            f"bundle version {manifest.get('version')!r}, this reader supports {INDEX_VERSION}"
        )

    payloads = {}
    digest = hashlib.sha256()
    for name in (CORPUS_FILE, TRIPLET_FILE, PASSAGE_EMB_FILE, TRIPLET_EMB_FILE):
        path = bundle / name
        if not path.exists():
            raise CorruptFile(f"missing bundle file {name}")
        payloads[name] = path.read_bytes()
        digest.update(payloads[name])
    if digest.hexdigest() != manifest.get("content_hash"):
        raise CorruptFile("content hash mismatch; bundle files were modified or truncated")

    records = load_corpus(bundle / CORPUS_FILE)
    if any(r.triples is None for r in records):
        raise CorruptFile("bundle corpus contains unextracted records")
    passages = [
        Passage(r.id, r.text, tuple(canonicalize_triplet(*t) for t in r.triples))
        for r in records
    ]
    graph = build_index(passages)

    catalog_lines = [
        json.loads(line)
        for line in payloads[TRIPLET_FILE].decode("utf-8").splitlines()
        if line.strip()
    ]
    expected = [[t.head, t.relation, t.tail] for t in graph.index.catalog]
    if catalog_lines != expected:
        raise CorruptFile("triplet file does not match the catalog rebuilt from the corpus")

    passage_rows = _read_embedding_bytes(payloads[PASSAGE_EMB_FILE], PASSAGE_EMB_FILE)
    triplet_rows = _read_embedding_bytes(payloads[TRIPLET_EMB_FILE], TRIPLET_EMB_FILE)
    counts = manifest.get("counts", {})
    if passage_rows.shape[0] != counts.get("passages") or passage_rows.shape[0] != len(passages):
        raise CorruptFile("passage embedding count disagrees with manifest or corpus")
    if triplet_rows.shape[0] != counts.get("triplets") or triplet_rows.shape[0] != len(
        graph.index.catalog
    ):
        raise CorruptFile("triplet embedding count disagrees with manifest or catalog")

    graph.embeddings = EmbeddingStore(
        tuple(graph.passages), passage_rows, triplet_rows, manifest.get("encoder_id", "")
    )
    return graph
