import random

from extagents.knowledge import count_tokens
from extagents.synthetic import (
    BLOCK_CHARS,
    BLOCK_TOKENS,
    Placement,
    chain_adversarial_suite,
    document_sample,
    fact_sentence,
    filter_suite,
    random_corpus_sample,
    scaling_family,
)


def test_blocks_are_exactly_one_k_tokens():
    sample = document_sample("b", 6, [Placement("f0", 2), Placement("f1", 5)], seed=1)
    assert len(sample.context) == 6 * BLOCK_CHARS
    assert count_tokens(sample.context) == 6 * BLOCK_TOKENS
    for fact in sample.oracle.facts:
        block = sample.context.index(fact.text) // BLOCK_CHARS
        assert block == {"f0": 2, "f1": 5}[fact.id]


def test_generators_are_seeded():
    assert [s.to_record() for s in scaling_family(3, total_blocks=16, seed=4)] == \
        [s.to_record() for s in scaling_family(3, total_blocks=16, seed=4)]
    a = random_corpus_sample(random.Random(5), "r")
    b = random_corpus_sample(random.Random(5), "r")
    assert a.to_record() == b.to_record()


def test_chain_suite_overflows_the_message_budget():
    sample = chain_adversarial_suite(1)[0]
    ranked = sorted(sample.oracle.facts, key=lambda f: -f.priority)
    assert count_tokens("\n".join(f.text for f in ranked)) > 256
    assert min(ranked, key=lambda f: f.priority).id == "a"


def test_filter_suite_shape():
    cases = filter_suite()
    assert len(cases) == 50 and len({c.sample.id for c in cases}) == 50
    assert sum(c.n_blocks > 128 for c in cases) == 7


def test_fact_sentences_are_distinct():
    assert fact_sentence("s", "a") != fact_sentence("s", "b") != fact_sentence("t", "a")
