from decimal import Decimal
from fractions import Fraction

import pytest

from extagents.backend.cost import GPT4O_MINI, CostModel
from extagents.errors import ConfigError
from extagents.orchestrator import run
from extagents.records import TRACE_SCHEMA, replay, result_record

from .worlds import cfg, two_fact_sample


def make_record():
    sample = two_fact_sample(8, 1, 6)
    config = cfg(8)
    result = run(sample.question, sample.source(), config, world=sample.oracle)
    return result, result_record(result, sample.id, config.cost_model)


def test_replay_recomputes_totals():
    result, record = make_record()
    replayed = replay(record)
    assert replayed.totals == result.totals
    assert replayed.outcome == result.outcome.__class__.from_record(record["outcome"])
    assert replayed.to_record()["totals"] == record["totals"]


def test_replay_under_other_prices():
    result, record = make_record()
    doubled = CostModel(Fraction("0.30"), Fraction("1.20"))
    again = replay(record, doubled)
    assert again.totals.critical_path_rounds == result.totals.critical_path_rounds
    inp, out = result.totals.input_tokens, result.totals.output_tokens
    expected = (Decimal(inp) * Decimal("0.30") + Decimal(out) * Decimal("1.20")) / Decimal(10**6)
    assert again.totals.cost == expected.quantize(Decimal("0.000001"))


def test_replay_is_pure():
    _, record = make_record()
    assert replay(record).to_record() == replay(record).to_record()


def test_empty_trace_gives_zero_totals():
    out = replay({"schema": TRACE_SCHEMA, "events": []})
    t = out.totals
    assert (t.calls, t.input_tokens, t.output_tokens, t.critical_path_rounds) == (0, 0, 0, 0)
    assert t.cost == Decimal(0)


@pytest.mark.parametrize("record", [{"schema": "extagents.trace/v2", "events": []}, {"events": []},
                                    {"schema": "extagents.result/v1"}])
def test_schema_mismatch(record):
    with pytest.raises(ConfigError):
        replay(record, GPT4O_MINI)
