"""Token-level F1 between a prediction and one or more gold answers."""

from __future__ import annotations

import re
import string
import unicodedata
from collections import Counter
from typing import Iterable, Literal

Language = Literal["en", "zh"]

_ARTICLES = re.compile(r"\b(a|an|the)\b")


def _is_punct(ch: str) -> bool:
    return ch in string.punctuation or unicodedata.category(ch).startswith("P")


def normalize_tokens(text: str, language: Language = "en") -> list[str]:
    """Lowercase, drop punctuation, then split into tokens.

    English drops the articles and splits on whitespace; Chinese keeps every
    remaining non-space character as its own token.
    """
    text = "".join(ch for ch in text.lower() if not _is_punct(ch))
    if language == "zh":
        return [ch for ch in text if not ch.isspace()]
    return _ARTICLES.sub(" ", text).split()


def _f1(pred: list[str], gold: list[str]) -> float:
    if not pred and not gold:
        return 1.0
    if not pred or not gold:
        return 0.0
    common = sum((Counter(pred) & Counter(gold)).values())
    if common == 0:
        return 0.0
    precision = common / len(pred)
    recall = common / len(gold)
    return 2 * precision * recall / (precision + recall)


def token_f1(prediction: str, gold: str | Iterable[str], language: Language = "en") -> float:
    """F1 over normalized token multisets; with several golds the best one counts."""
    golds = [gold] if isinstance(gold, str) else list(gold)
    if not golds:
        raise ValueError("at least one gold answer is required")
    pred = normalize_tokens(prediction, language)
    return max(_f1(pred, normalize_tokens(g, language)) for g in golds)
