"""Token accounting and partitioning of external knowledge into agent-sized chunks.

Two source kinds are supported: a single long document attached to a query and
an ordered set of retrieved documents.  Long documents are cut at token
boundaries into contiguous slices; retrieved documents are packed whole, in
retrieval order, and only split when a single document is larger than a chunk.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Protocol, Sequence, runtime_checkable

import numpy as np

from .errors import ConfigError

SourceKind = Literal["long_document", "retrieved_corpus"]

# per-codepoint weights in twelfths of a token: 4 chars/token and 1.5 chars/token
_ASCII_WEIGHT = 3
_CJK_WEIGHT = 8
_WEIGHT_DENOM = 12

_CJK_RANGES = (
    (0x1100, 0x11FF),
    (0x2E80, 0x303F),
    (0x3040, 0x30FF),
    (0x3100, 0x31FF),
    (0x3400, 0x4DBF),
    (0x4E00, 0x9FFF),
    (0xA960, 0xA97F),
    (0xAC00, 0xD7AF),
    (0xF900, 0xFAFF),
    (0xFE30, 0xFE4F),
    (0xFF00, 0xFFEF),
    (0x20000, 0x2FA1F),
)

_TOKEN_SUFFIX = re.compile(r"^\s*(\d+(?:\.\d+)?)\s*([kKmM]?)\s*$")


def parse_token_count(value: str | int) -> int:
    """Parse ``"8k"``-style sizes; ``k`` is 1024 tokens and ``m`` is 1024k."""
    if isinstance(value, bool):
        raise ConfigError(f"not a token count: {value!r}")
    if isinstance(value, int):
        return value
    match = _TOKEN_SUFFIX.match(str(value))
    if not match:
        raise ConfigError(f"not a token count: {value!r}")
    number, suffix = match.groups()
    scale = {"": 1, "k": 1024, "m": 1024 * 1024}[suffix.lower()]
    amount = Fraction(number) * scale
    if amount.denominator != 1:
        raise ConfigError(f"token count must be whole: {value!r}")
    return int(amount)


def format_token_count(value: int) -> str:
    if value and value % 1024 == 0:
        return f"{value // 1024}k"
    return str(value)


def _codepoints(text: str) -> np.ndarray:
    return np.frombuffer(text.encode("utf-32-le"), dtype=np.uint32)


def _cjk_mask(points: np.ndarray) -> np.ndarray:
    mask = np.zeros(points.shape, dtype=bool)
    for lo, hi in _CJK_RANGES:
        mask |= (points >= lo) & (points <= hi)
    return mask


def _cumulative_weights(text: str) -> np.ndarray:
    weights = np.where(_cjk_mask(_codepoints(text)), _CJK_WEIGHT, _ASCII_WEIGHT).astype(np.int64)
    cum = np.empty(len(text) + 1, dtype=np.int64)
    cum[0] = 0
    np.cumsum(weights, out=cum[1:])
    return cum


@runtime_checkable
class ExactTokenizer(Protocol):
    """Plugin interface for exact tokenizers.

    ``token_offsets`` returns the end character offset of every token, so the
    last offset equals ``len(text)`` for any non-empty input.
    """

    def token_offsets(self, text: str) -> Sequence[int]: ...


@dataclass(frozen=True)
class TokenCounter:
    """Counts tokens and finds token-aligned cut points.

    In ``approximate`` mode with ``chars_per_token`` unset, every CJK codepoint
    weighs 1/1.5 token and every other codepoint 1/4 token; the count is the
    ceiling of the weight sum.  Setting ``chars_per_token`` switches to the flat
    ``ceil(len / chars_per_token)`` rule.  ``exact`` mode defers to a plugin.
    """

    mode: Literal["approximate", "exact"] = "approximate"
    chars_per_token: Fraction | None = None
    plugin: ExactTokenizer | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.mode not in ("approximate", "exact"):
            raise ConfigError(f"unknown token counter mode {self.mode!r}", field="mode")
        if self.chars_per_token is not None:
            cpt = Fraction(self.chars_per_token)
            if cpt <= 0:
                raise ConfigError("chars_per_token must be positive", field="chars_per_token")
            object.__setattr__(self, "chars_per_token", cpt)

    def _exact(self) -> ExactTokenizer:
        if self.plugin is None:
            raise ConfigError("exact token counting requires a tokenizer plugin", field="plugin")
        return self.plugin

    def count(self, text: str) -> int:
        if not text:
            if self.mode == "exact":
                self._exact()
            return 0
        if self.mode == "exact":
            return len(self._exact().token_offsets(text))
        if self.chars_per_token is not None:
            cpt = self.chars_per_token
            return -(-len(text) * cpt.denominator // cpt.numerator)
        if text.isascii():
            weight = _ASCII_WEIGHT * len(text)
        else:
            weight = int(_cumulative_weights(text)[-1])
        return -(-weight // _WEIGHT_DENOM)

    def cut(self, text: str, budget: int) -> int:
        """Length of the longest prefix of ``text`` whose count fits ``budget``."""
        if budget <= 0 or not text:
            return 0
        if self.mode == "approximate" and (self.chars_per_token is not None or text.isascii()):
            if self.chars_per_token is not None:
                cpt = self.chars_per_token
                return min(len(text), budget * cpt.numerator // cpt.denominator)
            return min(len(text), budget * _WEIGHT_DENOM // _ASCII_WEIGHT)
        return self.split_points(text, budget, limit=1)[0]

    def split_points(self, text: str, size: int, *, limit: int | None = None) -> list[int]:
        """End offsets of consecutive maximal slices of at most ``size`` tokens."""
        if size <= 0:
            raise ConfigError("slice size must be positive")
        n = len(text)
        if n == 0:
            return []
        ends: list[int] = []
        if self.mode == "exact":
            offsets = list(self._exact().token_offsets(text))
            ends = [offsets[i - 1] for i in range(size, len(offsets), size)]
            ends.append(n)
        elif self.chars_per_token is not None or text.isascii():
            if self.chars_per_token is not None:
                cpt = self.chars_per_token
                step = size * cpt.numerator // cpt.denominator
            else:
                step = size * _WEIGHT_DENOM // _ASCII_WEIGHT
            if step <= 0:
                raise ConfigError("slice size is smaller than one character")
            ends = list(range(step, n, step))
            ends.append(n)
        else:
            cum = _cumulative_weights(text)
            start = 0
            capacity = size * _WEIGHT_DENOM
            while start < n:
                end = int(np.searchsorted(cum, cum[start] + capacity, side="right")) - 1
                end = max(end, start + 1)
                ends.append(min(end, n))
                start = ends[-1]
                if limit is not None and len(ends) >= limit:
                    break
        return ends if limit is None else ends[:limit]


DEFAULT_COUNTER = TokenCounter()


def count_tokens(text: str, counter: TokenCounter = DEFAULT_COUNTER) -> int:
    return counter.count(text)


@dataclass(frozen=True)
class KnowledgeUnit:
    id: str
    text: str
    tokens: int
    rank: int | None = None


@dataclass(frozen=True)
class KnowledgeSource:
    kind: SourceKind
    units: tuple[KnowledgeUnit, ...]

    def __post_init__(self) -> None:
        ids = [u.id for u in self.units]
        if len(set(ids)) != len(ids):
            raise ConfigError("knowledge unit ids must be unique")
        if self.kind == "long_document" and len(self.units) > 1:
            raise ConfigError("a long document has exactly one unit")

    @property
    def total_tokens(self) -> int:
        return sum(u.tokens for u in self.units)

    @property
    def text(self) -> str:
        return "".join(u.text for u in self.units)

    @classmethod
    def long_document(cls, text: str, counter: TokenCounter = DEFAULT_COUNTER,
                      unit_id: str = "doc") -> KnowledgeSource:
        if not text:
            return cls("long_document", ())
        return cls("long_document", (KnowledgeUnit(unit_id, text, counter.count(text)),))

    @classmethod
    def retrieved_corpus(cls, documents: Sequence[tuple[str, str, int | None]],
                         counter: TokenCounter = DEFAULT_COUNTER) -> KnowledgeSource:
        """Build from ``(id, text, rank)`` triples, kept in ascending rank order.

        Documents without a rank keep their input position after ranked ones.
        """
        indexed = list(enumerate(documents))
        indexed.sort(key=lambda p: (p[1][2] is None, p[1][2] if p[1][2] is not None else 0, p[0]))
        units = tuple(KnowledgeUnit(doc_id, text, counter.count(text), rank)
                      for _, (doc_id, text, rank) in indexed)
        return cls("retrieved_corpus", units)


@dataclass(frozen=True)
class KnowledgeChunk:
    index: int
    text: str
    token_len: int
    source_unit_ids: tuple[str, ...]
    retrieval_rank: int | None = None


def truncate_to_budget(source: KnowledgeSource, max_tokens: int,
                       counter: TokenCounter = DEFAULT_COUNTER) -> KnowledgeSource:
    """Keep the longest prefix of ``source`` that fits ``max_tokens``.

    A long document is cut inside its text; retrieved documents are kept or
    dropped whole.
    """
    if max_tokens <= 0:
        raise ConfigError("max_tokens must be positive", field="max_tokens")
    if source.total_tokens <= max_tokens:
        return source
    if source.kind == "long_document":
        unit = source.units[0]
        cut = counter.cut(unit.text, max_tokens)
        prefix = unit.text[:cut]
        return KnowledgeSource(source.kind, (KnowledgeUnit(unit.id, prefix, counter.count(prefix), unit.rank),))
    kept: list[KnowledgeUnit] = []
    used = 0
    for unit in source.units:
        if used + unit.tokens > max_tokens:
            break
        kept.append(unit)
        used += unit.tokens
    return KnowledgeSource(source.kind, tuple(kept))


def _slices(text: str, size: int, counter: TokenCounter) -> list[str]:
    out, start = [], 0
    for end in counter.split_points(text, size):
        out.append(text[start:end])
        start = end
    return out


def partition(source: KnowledgeSource, chunk_size: int, counter: TokenCounter = DEFAULT_COUNTER,
              *, context_limit: int | None = None) -> list[KnowledgeChunk]:
    """Split ``source`` into chunks of at most ``chunk_size`` tokens."""
    if chunk_size <= 0:
        raise ConfigError("chunk_size must be positive", field="chunk_size")
    if context_limit is not None and chunk_size >= context_limit:
        raise ConfigError("chunk_size must be < max_context", field="chunk_size")
    if not source.units:
        return []

    chunks: list[KnowledgeChunk] = []

    def emit(text: str, ids: list[str], rank: int | None) -> None:
        chunks.append(KnowledgeChunk(len(chunks), text, counter.count(text), tuple(ids), rank))

    if source.kind == "long_document":
        unit = source.units[0]
        for piece in _slices(unit.text, chunk_size, counter):
            emit(piece, [unit.id], None)
        return chunks

    parts: list[str] = []
    ids: list[str] = []
    ranks: list[int] = []
    used = 0

    def flush() -> None:
        nonlocal parts, ids, ranks, used
        if parts:
            emit("".join(parts), ids, min(ranks) if ranks else None)
        parts, ids, ranks, used = [], [], [], 0

    for unit in source.units:
        if unit.tokens > chunk_size:
            flush()
            for piece in _slices(unit.text, chunk_size, counter):
                emit(piece, [unit.id], unit.rank)
            continue
        # counts are subadditive, so the running sum bounds the packed chunk
        if used + unit.tokens > chunk_size:
            flush()
        parts.append(unit.text)
        ids.append(unit.id)
        if unit.rank is not None:
            ranks.append(unit.rank)
        used += unit.tokens
    flush()
    return chunks

