"""Okapi BM25 over a small in-memory corpus."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from ..datasets import Document
from ..knowledge import DEFAULT_COUNTER, TokenCounter

K1 = 1.2
B = 0.75

_TERM = re.compile(r"\w+")


def tokenize(text: str) -> list[str]:
    return _TERM.findall(text.lower())


def idf(n_docs: int, df: int) -> float:
    return math.log((n_docs - df + 0.5) / (df + 0.5) + 1)


@dataclass(frozen=True)
class BM25Index:
    term_counts: tuple[Counter, ...]
    lengths: tuple[int, ...]
    df: Counter
    k1: float = K1
    b: float = B

    @classmethod
    def build(cls, texts: Sequence[str], *, k1: float = K1, b: float = B) -> BM25Index:
        counts = tuple(Counter(tokenize(t)) for t in texts)
        df: Counter = Counter()
        for c in counts:
            df.update(c.keys())
        return cls(counts, tuple(sum(c.values()) for c in counts), df, k1, b)

    @property
    def avgdl(self) -> float:
        return sum(self.lengths) / len(self.lengths) if self.lengths else 0.0

    def score(self, query: str, index: int) -> float:
        n, avgdl = len(self.lengths), self.avgdl
        tf_doc, length = self.term_counts[index], self.lengths[index]
        total = 0.0
        # every query token counts, repeats included
        for term in tokenize(query):
            tf = tf_doc.get(term, 0)
            if tf == 0:
                continue
            norm = 1 - self.b + self.b * (length / avgdl if avgdl else 0.0)
            total += idf(n, self.df[term]) * tf * (self.k1 + 1) / (tf + self.k1 * norm)
        return total

    def scores(self, query: str) -> list[float]:
        return [self.score(query, i) for i in range(len(self.lengths))]

    def rank(self, query: str) -> list[int]:
        """Document indices by descending score, ties by corpus order."""
        scores = self.scores(query)
        return sorted(range(len(scores)), key=lambda i: (-scores[i], i))


def bm25_retrieve(question: str, corpus: Sequence[Document], budget: int,
                  counter: TokenCounter = DEFAULT_COUNTER) -> list[Document]:
    """Top documents in score order until ``budget`` tokens are used, ranked 1..n.

    When even the best document is over budget it is cut to fit, like a long
    document truncated to the input budget.
    """
    if not corpus:
        return []
    if budget <= 0:
        raise ValueError("budget must be positive")
    index = BM25Index.build([d.text for d in corpus])
    out: list[Document] = []
    used = 0
    for i in index.rank(question):
        doc = corpus[i]
        tokens = counter.count(doc.text)
        if used + tokens > budget:
            if not out:
                out.append(Document(doc.id, doc.text[:counter.cut(doc.text, budget)], 1))
            break
        out.append(Document(doc.id, doc.text, len(out) + 1))
        used += tokens
    return out
