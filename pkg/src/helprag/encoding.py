"""Text-to-unit-vector encoding and the vector primitives built on it.

A hypernode (set of triplets) is serialized to one canonical string, mapped
to a raw embedding by a pluggable encoder backend, and L2-normalized. Three
backends are provided: a deterministic character-3-gram feature-hashing
encoder for offline tests, an oracle encoder backed by an explicit
string-to-vector table, and a client for a remote embeddings service.

All backends emit float32 rows that were normalized in float64 and then
quantized; callers re-normalize in float64 via :func:`unit_rows`. Routing
every vector through the float32 quantization step makes the in-memory unit
vectors bit-identical to the ones reconstructed from a persisted index.
"""

from __future__ import annotations

import hashlib
import json
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyHyperNode,
    EncoderFailure,
    InvalidParams,
    ZeroVector,
)
from .kg import Triplet
from .services import ServiceConfig, ServiceUnreachable, post_json

TRIPLET_JOIN = "; "


def serialize_hypernode(triplets: Iterable[Triplet]) -> str:
    """Render a triplet set as one canonical string.

    Triplets are sorted by (head, relation, tail) and rendered as
    "head relation tail", joined by "; ". The output is invariant under
    input order, so equal sets always serialize identically.
    """
    ordered = sorted(triplets)
    if not ordered:
        raise EmptyHyperNode("cannot serialize an empty triplet set")
    return TRIPLET_JOIN.join(t.as_text() for t in ordered)


# --- unit-vector primitives -------------------------------------------------


def unit_rows(matrix: np.ndarray) -> np.ndarray:
    """Upcast rows to float64 and normalize each to exact unit length."""
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim == 1:
        m = m[None, :]
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise ZeroVector("cannot normalize a zero row")
    return m / norms


def distance(a: np.ndarray, b: np.ndarray) -> float:
    """Euclidean distance; in [0, 2] when both inputs are unit vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Dot product; equals cosine similarity for unit vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    return float(np.dot(a, b))


# --- encoder backends --------------------------------------------------------


class Encoder(ABC):
    """Batch text-to-vector backend with a declared output dimension.

    Implementations must be deterministic within one configuration: the same
    input text always yields the identical vector.
    """

    @property
    @abstractmethod
    def dim(self) -> int: ...

    @property
    @abstractmethod
    def encoder_id(self) -> str:
        """Stable identifier recorded in index manifests."""

    @abstractmethod
    def encode_batch(self, texts: Sequence[str]) -> np.ndarray:
        """Return a float32 (len(texts), dim) matrix of near-unit rows."""


def encode(encoder: Encoder, texts: Sequence[str]) -> np.ndarray:
    """Encode texts to exact float64 unit vectors, order-preserving."""
    if any(not t for t in texts):
        raise ValueError("texts must be non-empty strings")
    if not texts:
        return np.empty((0, encoder.dim), dtype=np.float64)
    rows = encoder.encode_batch(list(texts))
    if rows.shape != (len(texts), encoder.dim):
        raise EncoderFailure(
            f"backend returned shape {rows.shape}, expected {(len(texts), encoder.dim)}"
        )
    return unit_rows(rows)


_FNV_OFFSET = np.uint64(0xCBF29CE484222325)
_FNV_PRIME = np.uint64(0x100000001B3)


def _fnv1a_gram_hashes(text: str, width: int = 3) -> np.ndarray:
    """64-bit FNV-1a hash of every contiguous byte window of the UTF-8 text.

    Texts shorter than the window width hash as a single whole-text gram.
    """
    data = np.frombuffer(text.encode("utf-8"), dtype=np.uint8)
    w = min(width, data.size)
    windows = np.lib.stride_tricks.sliding_window_view(data, w)
    h = np.full(windows.shape[0], _FNV_OFFSET, dtype=np.uint64)
    with np.errstate(over="ignore"):
        for col in range(windows.shape[1]):
            h = (h ^ windows[:, col].astype(np.uint64)) * _FNV_PRIME
    return h


class HashEncoder(Encoder):
    """Deterministic signed feature hashing over character 3-grams.

    Each 3-gram's FNV-1a 64-bit hash selects a bucket (low bits, modulo the
    dimension) and a sign (top bit); bucket counts are accumulated and
    L2-normalized. Identical across runs and platforms.
    """

    def __init__(self, dim: int = 256):
        if dim < 2:
            raise InvalidParams("hash encoder dimension must be >= 2")
        self._dim = dim

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def encoder_id(self) -> str:
        return f"hash-fnv1a-3gram-{self._dim}"

    def _raw(self, text: str) -> np.ndarray:
        hashes = _fnv1a_gram_hashes(text)
        buckets = (hashes % np.uint64(self._dim)).astype(np.intp)
        signs = np.where((hashes >> np.uint64(63)) & np.uint64(1), -1.0, 1.0)
        vec = np.zeros(self._dim, dtype=np.float64)
        np.add.at(vec, buckets, signs)
        return vec

    def encode_batch(self, texts: Sequence[str]) -> np.ndarray:
        out = np.empty((len(texts), self._dim), dtype=np.float32)
        for i, text in enumerate(texts):
            raw = self._raw(text)
            norm = np.linalg.norm(raw)
            if norm == 0.0:
                raise ZeroVector(f"hash embedding of {text!r} cancelled to zero")
            out[i] = (raw / norm).astype(np.float32)
        return out


class OracleEncoder(Encoder):
    """Exact string-to-vector table for construction-verified fixtures.

    The table maps each known text to a raw vector; unknown texts raise
    EncoderFailure. Fixture files are JSON ``{"dim": D, "vectors": {...}}``
    where each entry is either a dense list of floats or a sparse
    ``{"i": [indices], "v": [values]}`` pair.
    """

    def __init__(self, dim: int, vectors: dict[str, Sequence[float] | np.ndarray]):
        if dim < 1:
            raise InvalidParams("oracle dimension must be >= 1")
        self._dim = dim
        self._rows: dict[str, np.ndarray] = {}
        digest = hashlib.sha256()
        for text in sorted(vectors):
            raw = np.asarray(vectors[text], dtype=np.float64)
            if raw.shape != (dim,):
                raise InvalidParams(f"oracle entry for {text!r} has shape {raw.shape}")
            norm = np.linalg.norm(raw)
            if norm == 0.0:
                raise ZeroVector(f"oracle entry for {text!r} is a zero vector")
            self._rows[text] = (raw / norm).astype(np.float32)
            digest.update(text.encode("utf-8") + b"\x00" + self._rows[text].tobytes())
        self._table_hash = digest.hexdigest()[:16]

    @classmethod
    def from_table(cls, spec: dict) -> "OracleEncoder":
        """Build from a {"dim": D, "vectors": {...}} table with dense or sparse entries."""
        dim = int(spec["dim"])
        vectors: dict[str, np.ndarray] = {}
        for text, entry in spec["vectors"].items():
            if isinstance(entry, dict):
                row = np.zeros(dim, dtype=np.float64)
                row[np.asarray(entry["i"], dtype=np.intp)] = np.asarray(entry["v"], dtype=np.float64)
                vectors[text] = row
            else:
                vectors[text] = np.asarray(entry, dtype=np.float64)
        return cls(dim, vectors)

    @classmethod
    def from_file(cls, path: str | Path) -> "OracleEncoder":
        with open(path, encoding="utf-8") as fh:
            return cls.from_table(json.load(fh))

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def encoder_id(self) -> str:
        return f"oracle-{self._table_hash}"

    def known_texts(self) -> frozenset[str]:
        return frozenset(self._rows)

    def encode_batch(self, texts: Sequence[str]) -> np.ndarray:
        out = np.empty((len(texts), self._dim), dtype=np.float32)
        for i, text in enumerate(texts):
            row = self._rows.get(text)
            if row is None:
                raise EncoderFailure(f"text not in oracle table: {text[:80]!r}")
            out[i] = row
        return out


class RemoteEncoder(Encoder):
    """Client for an embeddings web service.

    Sends ``{"model": ..., "input": [texts]}`` with bearer auth and expects
    ``{"data": [{"index": i, "embedding": [...]}, ...]}``. Texts are chunked
    into bounded batches with a bounded number of in-flight requests;
    transient failures retry with exponential backoff inside
    :func:`helprag.services.post_json`.
    """

    def __init__(
        self,
        config: ServiceConfig,
        dim: int | None = None,
        batch_size: int = 64,
        in_flight: int = 4,
    ):
        if batch_size < 1 or in_flight < 1:
            raise InvalidParams("batch_size and in_flight must be >= 1")
        self.config = config
        self._dim = dim
        self.batch_size = batch_size
        self.in_flight = in_flight

    @property
    def dim(self) -> int:
        if self._dim is None:
            raise EncoderFailure("remote encoder dimension unknown before first reply")
        return self._dim

    @property
    def encoder_id(self) -> str:
        return f"remote-{self.config.model}"

    def _request_chunk(self, chunk: list[str]) -> np.ndarray:
        try:
            reply = post_json(self.config, {"model": self.config.model, "input": chunk})
        except (ServiceUnreachable, ValueError) as exc:
            raise EncoderFailure(str(exc)) from exc
        try:
            data = sorted(reply["data"], key=lambda item: item["index"])
            rows = [np.asarray(item["embedding"], dtype=np.float64) for item in data]
        except (KeyError, TypeError) as exc:
            raise EncoderFailure(f"malformed embeddings reply from {self.config.url}") from exc
        if len(rows) != len(chunk) or any(r.ndim != 1 for r in rows):
            raise EncoderFailure(f"embeddings reply shape mismatch from {self.config.url}")
        return np.stack(rows)

    def encode_batch(self, texts: Sequence[str]) -> np.ndarray:
        chunks = [list(texts[i : i + self.batch_size]) for i in range(0, len(texts), self.batch_size)]
        if len(chunks) == 1:
            raw_chunks = [self._request_chunk(chunks[0])]
        else:
            with ThreadPoolExecutor(max_workers=self.in_flight) as pool:
                raw_chunks = list(pool.map(self._request_chunk, chunks))
        raw = np.concatenate(raw_chunks, axis=0)
        if self._dim is None:
            self._dim = raw.shape[1]
        if raw.shape[1] != self._dim:
            raise EncoderFailure(f"remote replied dim {raw.shape[1]}, expected {self._dim}")
        norms = np.linalg.norm(raw, axis=1, keepdims=True)
        if np.any(norms == 0.0):
            raise ZeroVector("remote service returned a zero embedding")
        return (raw / norms).astype(np.float32)


def encoder_from_spec(spec: str) -> Encoder:
    """Build an encoder from a CLI spec: 'hash', 'oracle:<file>', or 'remote'."""
    if spec == "hash":
        return HashEncoder()
    if spec.startswith("oracle:"):
        path = spec.split(":", 1)[1]
        if not path:
            raise InvalidParams("oracle encoder needs a fixture path: oracle:<file>")
        return OracleEncoder.from_file(path)
    if spec == "remote":
        try:
            config = ServiceConfig.from_env("HELP_EMBED")
        except KeyError as exc:
            raise InvalidParams(str(exc)) from exc
        return RemoteEncoder(config)
    raise InvalidParams(f"unknown encoder spec {spec!r} (use hash | oracle:<file> | remote)")
