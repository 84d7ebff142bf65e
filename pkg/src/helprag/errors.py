"""Exception hierarchy shared across the retrieval engine."""

from __future__ import annotations


class HelpRagError(Exception):
    """Base class for all engine errors."""


class EmptyField(HelpRagError):
    """A triplet field is empty after canonicalization."""


class DuplicatePassageId(HelpRagError):
    """Two passages in one corpus share an id."""


class EmptyHyperNode(HelpRagError):
    """Serialization requested for an empty triplet set."""


class EmptyGraph(HelpRagError):
    """Seed selection requested on a graph with no triplets."""


class ZeroVector(HelpRagError):
    """Raw embedding has zero norm and cannot be normalized."""


class DimensionMismatch(HelpRagError):
    """Vector operands have different dimensions."""


class EncoderFailure(HelpRagError):
    """Encoder backend failed (unreachable service, malformed reply, missing fixture entry)."""


class EncoderMismatch(HelpRagError):
    """Supplied encoder does not match the one recorded in an index bundle."""


class MissingPassageEmbeddings(HelpRagError):
    """Dense ranking requested but the graph carries no passage embeddings."""


class ParseError(HelpRagError):
    """A corpus or fixture line failed to parse; carries the 1-based line number."""

    def __init__(self, line: int, message: str = ""):
        self.line = line
        super().__init__(f"line {line}: {message}" if message else f"line {line}")


class DuplicateId(HelpRagError):
    """Duplicate record id in an input file."""


class ServiceUnreachable(HelpRagError):
    """An external HTTP service could not be reached after retries."""


class VersionMismatch(HelpRagError):
    """Index bundle was written by an incompatible schema version."""


class CorruptFile(HelpRagError):
    """Index bundle file failed magic, size, count, or hash verification."""


class InvalidParams(HelpRagError):
    """Configuration values violate their declared constraints."""
