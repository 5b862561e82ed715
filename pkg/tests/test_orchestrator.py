import pytest

from extagents.backend.config import BackendConfig, RoleBackends
from extagents.errors import AgentCallError, BudgetError, ConfigError, RunAborted
from extagents.knowledge import KnowledgeSource
from extagents.orchestrator import run, run_extagents, run_interleaved
from extagents.trace import bandwidth

from .worlds import cfg, everyone_talks, two_fact_sample, unsolvable


def go(sample, config):
    return run(sample.question, sample.source(), config, world=sample.oracle)


def test_answer_from_top_message():
    sample = two_fact_sample(8, 3, 3)
    result = go(sample, cfg(8))
    assert result.answer == sample.gold_answers[0]
    assert result.outcome.status == "answered" and result.outcome.iteration == 1
    assert result.totals.critical_path_rounds == 3  # seek, rate, reason
    assert result.n_chunks == 8


def test_answer_needs_two_messages():
    sample = two_fact_sample(8, 1, 6)
    result = go(sample, cfg(8))
    assert result.outcome.iteration == 2 and result.outcome.context_size == 2
    assert result.totals.critical_path_rounds == 4
    reasons = [e for e in result.trace if e.kind == "reason"]
    assert [e.status for e in reasons] == ["refused", "answered"]


def test_retrieval_priority_skips_rating():
    sample = two_fact_sample(8, 0, 1)
    result = go(sample, cfg(8, ranking_mode="retrieval_priority"))
    assert not any(e.kind == "rate" for e in result.trace)
    assert result.totals.critical_path_rounds == 3  # seek, then reasoning iterations 1 and 2


def test_unsolvable_runs_T_rounds_then_forces():
    sample = unsolvable(two_fact_sample(8, 0, 5))
    config = cfg(8, T=3)
    result = go(sample, config)
    assert result.outcome.status == "forced" and result.answer == "unknown"
    reasons = [e for e in result.trace if e.kind == "reason"]
    # round 1 walks the schedule over 2 live messages, later rounds try once, then the forced call
    assert len(reasons) == 2 + (config.T - 1) + 1
    assert max(e.timestep for e in result.trace if e.kind == "seek") == config.T


def test_empty_source_goes_straight_to_terminal():
    sample = two_fact_sample(2, 0, 1)
    result = run(sample.question, KnowledgeSource.long_document(""), cfg(2), world=sample.oracle)
    assert result.outcome.status == "forced" and result.n_chunks == 0
    assert [e.kind for e in result.trace] == ["reason"]


def test_budget_checked_before_any_call():
    sample = two_fact_sample(4, 0, 1)
    tight = BackendConfig(max_context=1040)  # a 1024-token chunk fits, its prompt does not
    config = cfg(4, role_backends=RoleBackends(tight, tight))
    with pytest.raises(BudgetError) as exc:
        go(sample, config)
    assert exc.value.chunk_index == 0


def test_backend_failure_aborts_with_partial_trace():
    sample = two_fact_sample(4, 0, 1)
    small = BackendConfig(max_context=2048)
    reasoning = BackendConfig(max_context=2048, message_budget=256)
    config = cfg(4, role_backends=RoleBackends(small, reasoning, BackendConfig(max_context=40)))
    with pytest.raises(RunAborted) as exc:
        go(sample, config)
    # the rating call fails inside the first timestep, before anything is merged
    assert isinstance(exc.value.cause, AgentCallError)
    assert isinstance(exc.value.cause.cause, BudgetError)
    assert exc.value.partial_trace == []


def test_bandwidth_grows_after_first_timestep():
    sample = everyone_talks(6)
    result = go(sample, cfg(6, T=2))
    assert bandwidth(result.trace) == 6


def test_interleaved_matches_sequential():
    sample = two_fact_sample(16, 2, 9)
    base = cfg(16, ranking_mode="retrieval_priority")
    seq = go(sample, base)
    inter = run_interleaved(sample.question, sample.source(), base.with_changes(interleaved=True),
                            world=sample.oracle)
    assert inter.answer == seq.answer
    assert inter.outcome.to_record() == seq.outcome.to_record()
    assert inter.totals.critical_path_rounds <= seq.totals.critical_path_rounds


def test_method_guards():
    sample = two_fact_sample(2, 0, 1)
    with pytest.raises(ConfigError):
        run_extagents(sample.question, sample.source(), cfg(2, method="direct"), world=sample.oracle)
    with pytest.raises(ConfigError):
        run_interleaved(sample.question, sample.source(), cfg(2), world=sample.oracle)
    with pytest.raises(ConfigError):
        cfg(2, interleaved=True)


def test_exclusion_reduces_calls():
    sample = unsolvable(two_fact_sample(8, 0, 1))
    plain = go(sample, cfg(8, T=4))
    excluded = go(sample, cfg(8, T=4, exclusion=True, exclusion_patience=1))
    assert excluded.totals.calls < plain.totals.calls
    assert excluded.answer == plain.answer
