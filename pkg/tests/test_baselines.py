import pytest

from extagents.backend.base import Backends
from extagents.baselines import mapreduce_fanin, run_chain_of_agents, run_direct, run_llm_mapreduce
from extagents.config import BaselineConfig
from extagents.errors import ConfigError
from extagents.runtime import build_backends
from extagents.trace import bandwidth

from .worlds import cfg, fanin_cfg, two_fact_sample


def test_direct_is_one_call():
    sample = two_fact_sample(8, 1, 2)
    result = run_direct(sample.question, sample.source(), cfg(8, method="direct"), world=sample.oracle)
    assert result.answer == sample.gold_answers[0]
    assert result.totals.calls == 1 and result.totals.critical_path_rounds == 1


def test_direct_truncates_to_window():
    sample = two_fact_sample(200, 0, 190)  # second fact lies beyond the window
    result = run_direct(sample.question, sample.source(), cfg(200, method="direct"), world=sample.oracle)
    assert result.answer == "unknown"
    assert result.trace[0].usage.input_tokens < cfg(1).role_backends.reasoning.max_context


def test_chain_carries_facts_forward():
    sample = two_fact_sample(8, 0, 7)
    result = run_chain_of_agents(sample.question, sample.source(), cfg(8, method="chain_of_agents"),
                                 world=sample.oracle)
    assert result.answer == sample.gold_answers[0]
    assert result.totals.calls == 9 and result.totals.critical_path_rounds == 9
    assert bandwidth(result.trace) == 2


def test_mapreduce_levels_and_bandwidth():
    sample = two_fact_sample(16, 0, 15)
    result = run_llm_mapreduce(sample.question, sample.source(), fanin_cfg(16, 4), world=sample.oracle)
    assert result.answer == sample.gold_answers[0]
    # 16 maps, 4 reduces, 1 final
    assert result.totals.calls == 21 and result.totals.critical_path_rounds == 3
    assert bandwidth(result.trace) == 4


def test_fanin_bounded_by_window():
    sample = two_fact_sample(2, 0, 1)
    config = cfg(2, baseline=BaselineConfig(expected_message_len=70_000, group_fanin_cap=16))
    with pytest.raises(ConfigError):
        mapreduce_fanin(sample.question, config, build_backends(config, sample.oracle))
    config = cfg(2, baseline=BaselineConfig(expected_message_len=40_000, group_fanin_cap=16))
    assert mapreduce_fanin(sample.question, config, build_backends(config, sample.oracle)) == 3
