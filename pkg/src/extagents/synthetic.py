"""Synthetic oracle worlds with known fact placements.

Documents are built from fixed-size ASCII blocks (1k tokens each under the
default counter), and every fact sits inside one block.  Chunk sizes,
windows and budgets that are whole multiples of the block size therefore
never cut a fact in two, which keeps the expected outcome of every run
computable from the placements alone.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Literal, Mapping, Sequence

from .backend.oracle import Fact, OracleWorld
from .datasets import Document, Sample

BLOCK_TOKENS = 1024
BLOCK_CHARS = 4 * BLOCK_TOKENS  # four ASCII characters per token

_WORDS = (
    "river stone market garden lantern harbor meadow copper window signal pepper orchard valley "
    "engine bridge candle forest ladder mirror pocket silver summer thread velvet winter yellow "
    "anchor basket cellar desert feather glacier hollow island jacket kettle lemon marble needle "
    "ocean pepper quartz ribbon saddle tunnel umbrella violet walnut"
).split()

Role = Literal["required", "distractor", "decoy"]


@dataclass(frozen=True)
class Placement:
    fact_id: str
    block: int
    role: Role = "required"
    priority: int = 0


def fact_sentence(sample_id: str, fact_id: str) -> str:
    # upper-case markers never occur in the lower-case filler
    return f"[{sample_id.upper()}-{fact_id.upper()}] Record {fact_id.upper()} of {sample_id.upper()} is VALID."


def filler(rng: random.Random, n_chars: int) -> str:
    if n_chars <= 0:
        return ""
    words: list[str] = []
    size = 0
    while size < n_chars:
        word = rng.choice(_WORDS)
        words.append(word)
        size += len(word) + 1
    return " ".join(words)[:n_chars - 1] + " " if n_chars > 1 else " "


def block_text(rng: random.Random, sentences: Sequence[str], block_chars: int = BLOCK_CHARS) -> str:
    body = " ".join(sentences)
    if not body:
        return filler(rng, block_chars)
    if len(body) + 2 > block_chars:
        raise ValueError("too many facts for one block")
    spare = block_chars - len(body) - 2
    left = rng.randrange(spare + 1)
    return filler(rng, left) + " " + body + " " + filler(rng, spare - left)


def block_document(n_blocks: int, block_facts: Mapping[int, Sequence[str]], seed: int,
                   block_chars: int = BLOCK_CHARS) -> str:
    rng = random.Random(seed)
    parts = [block_text(rng, block_facts.get(b, ()), block_chars) for b in range(n_blocks)]
    text = "".join(parts)
    assert len(text) == n_blocks * block_chars
    return text


def make_world(sample_id: str, placements: Iterable[Placement], *, decoy_tolerance: int = 0) -> OracleWorld:
    facts = tuple(Fact(p.fact_id, fact_sentence(sample_id, p.fact_id), p.priority, p.role) for p in placements)
    return OracleWorld(
        question=f"Which code do the VALID records of {sample_id.upper()} jointly identify?",
        answer=f"code {sample_id} alpha",
        facts=facts,
        decoy_answer="mismatched ledger entry",  # shares no token with the gold answer
        decoy_tolerance=decoy_tolerance,
        guess="unknown",
    )


def document_sample(sample_id: str, n_blocks: int, placements: Sequence[Placement], seed: int, *,
                    decoy_tolerance: int = 0) -> Sample:
    """A long-document sample whose facts sit in the given blocks."""
    world = make_world(sample_id, placements, decoy_tolerance=decoy_tolerance)
    by_block: dict[int, list[str]] = {}
    for placement, fact in zip(placements, world.facts):
        if not 0 <= placement.block < n_blocks:
            raise ValueError(f"block {placement.block} outside a {n_blocks}-block document")
        by_block.setdefault(placement.block, []).append(fact.text)
    text = block_document(n_blocks, by_block, seed)
    return Sample(sample_id, world.question, (world.answer,), context=text, oracle=world)


def corpus_sample(sample_id: str, doc_facts: Sequence[Sequence[Placement]], ranks: Sequence[int], seed: int,
                  *, doc_chars: int = 800) -> Sample:
    """A retrieved-corpus sample; ``doc_facts[d]`` lists the facts of document ``d``."""
    placements = [p for facts in doc_facts for p in facts]
    world = make_world(sample_id, placements)
    texts = {f.id: f.text for f in world.facts}
    rng = random.Random(seed)
    docs = []
    for d, facts in enumerate(doc_facts):
        body = block_text(rng, [texts[p.fact_id] for p in facts], doc_chars - 1) + "\n"
        docs.append(Document(f"{sample_id}-d{d}", body, ranks[d]))
    return Sample(sample_id, world.question, (world.answer,), documents=tuple(docs), oracle=world)


def scaling_family(n_samples: int, *, total_blocks: int = 512, n_required: int = 2,
                   seed: int = 0) -> list[Sample]:
    """Required facts placed uniformly at random over ``total_blocks`` blocks."""
    rng = random.Random(seed)
    samples = []
    for k in range(n_samples):
        blocks = rng.sample(range(total_blocks), n_required)
        placements = [Placement(f"f{j}", b) for j, b in enumerate(blocks)]
        samples.append(document_sample(f"s{k}", total_blocks, placements, seed * 1000 + k))
    return samples


def chain_adversarial_suite(n_samples: int, *, n_chunks: int = 8, chunk_blocks: int = 8,
                            distractors_per_chunk: int = 6, seed: int = 0) -> list[Sample]:
    """Two required facts in the first and last chunk, salient distractors in between.

    The first-chunk fact has the lowest priority, so a bounded running summary
    sheds it once the distractors fill the message budget.
    """
    rng = random.Random(seed)
    samples = []
    for k in range(n_samples):
        first = rng.randrange(chunk_blocks)
        last = (n_chunks - 1) * chunk_blocks + rng.randrange(chunk_blocks)
        placements = [Placement("a", first, priority=0), Placement("z", last, priority=9)]
        for c in range(1, n_chunks - 1):
            for d in range(distractors_per_chunk):
                block = c * chunk_blocks + rng.randrange(chunk_blocks)
                placements.append(Placement(f"d{c}x{d}", block, "distractor", priority=5))
        samples.append(document_sample(f"c{k}", n_chunks * chunk_blocks, placements, seed * 1000 + k))
    return samples


@dataclass(frozen=True)
class FilterCase:
    """A filter-suite sample with the placements it was built from."""

    sample: Sample
    n_blocks: int
    placements: tuple[Placement, ...]


def filter_suite(seed: int = 0) -> list[FilterCase]:
    """Fifty documents mixing every way a window sweep can convict or spare a sample.

    * ``near``: both facts in one 4k-aligned region, answerable from any window;
    * ``decoy``: facts in one 4k region with a decoy elsewhere in the same
      ``2^j`` x 4k region, so wider windows see the decoy and fail;
    * ``straddle``: facts in neighbouring 4k regions of one ``2^j`` x 4k region,
      so only windows of that width or more convict;
    * ``far``: facts more than 32k apart, never convicted;
    * ``long``: over 128k tokens, kept whatever the sweep says.
    """
    rng = random.Random(seed)
    cases: list[FilterCase] = []

    def add(kind: str, n_blocks: int, placements: list[Placement]) -> None:
        sid = f"{kind}{len(cases)}"
        sample = document_sample(sid, n_blocks, placements, seed * 1000 + len(cases))
        cases.append(FilterCase(sample, n_blocks, tuple(placements)))

    def region(width_blocks: int, n_blocks: int) -> int:
        return rng.randrange(n_blocks // width_blocks) * width_blocks

    for _ in range(14):
        start = region(4, 64)
        a, b = rng.sample(range(start, start + 4), 2)
        add("near", 64, [Placement("f0", a), Placement("f1", b)])
    # decoys: facts share a 4k half; the decoy sits in the other half of a 2^j x 4k region
    for width, count in ((8, 5), (16, 5), (32, 5)):
        for _ in range(count):
            start = region(width, 64)
            half = width // 2
            facts_at = start + rng.randrange(2) * half
            facts_at += 4 * rng.randrange(half // 4) if half > 4 else 0
            a, b = rng.sample(range(facts_at, facts_at + 4), 2)
            other = start + half if facts_at < start + half else start
            decoy = other + rng.randrange(half)
            add("decoy", 64, [Placement("f0", a), Placement("f1", b), Placement("x0", decoy, "decoy")])
    for width, count in ((8, 2), (16, 2), (32, 2)):
        for _ in range(count):
            start = region(width, 64)
            half = width // 2
            a = start + half - 1 - rng.randrange(2)
            b = start + half + rng.randrange(2)
            add("straddle", 64, [Placement("f0", a), Placement("f1", b)])
    for _ in range(8):
        a = rng.randrange(0, 16)
        b = rng.randrange(a + 33, 96)
        add("far", 96, [Placement("f0", a), Placement("f1", b)])
    for _ in range(7):
        start = region(4, 136)
        a, b = rng.sample(range(start, start + 4), 2)
        add("long", 136, [Placement("f0", a), Placement("f1", b)])
    assert len(cases) == 50
    return cases


def random_corpus_sample(rng: random.Random, sample_id: str, *, max_docs: int = 12) -> Sample:
    """A random retrieved-corpus world: random facts, roles, priorities and ranks."""
    n_docs = rng.randint(1, max_docs)
    n_required = rng.randint(1, 3)
    doc_facts: list[list[Placement]] = [[] for _ in range(n_docs)]
    for j in range(n_required):
        if rng.random() < 0.9:
            doc_facts[rng.randrange(n_docs)].append(Placement(f"r{j}", 0, "required", rng.randint(0, 9)))
    for j in range(rng.randint(0, 4)):
        doc_facts[rng.randrange(n_docs)].append(Placement(f"d{j}", 0, "distractor", rng.randint(0, 9)))
    ranks = list(range(1, n_docs + 1))
    rng.shuffle(ranks)
    sample = corpus_sample(sample_id, doc_facts, ranks, rng.randrange(1 << 30))
    world = sample.oracle
    assert world is not None
    missing = [Fact(f"r{j}", fact_sentence(sample_id, f"r{j}"), 0, "required") for j in range(n_required)
               if all(f.id != f"r{j}" for f in world.facts)]
    if missing:
        # unplaced required facts make the world unanswerable, which is a case worth covering
        world = OracleWorld(world.question, world.answer, world.facts + tuple(missing),
                            world.decoy_answer, world.decoy_tolerance, world.guess)
        sample = Sample(sample.id, sample.question, sample.gold_answers, documents=sample.documents,
                        oracle=world)
    return sample
