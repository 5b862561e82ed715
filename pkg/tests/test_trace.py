import pytest
from hypothesis import given
from hypothesis import strategies as st

from extagents.backend.cost import CompletionUsage
from extagents.errors import TraceError
from extagents.trace import (
    TraceEvent,
    TraceRecorder,
    bandwidth,
    compute_totals,
    critical_path_rounds,
    modeled_latency,
)

U = CompletionUsage(100, 10)


def ev(i, kind="seek", deps=(), agent=None, wall=1.0):
    return TraceEvent(i, kind, tuple(deps), agent, 1, 0, U, wall)


def test_recorder_sorts_dedups_and_rejects_forward_deps():
    r = TraceRecorder()
    a = r.add("seek", usage=U, wall_time=1, agent_index=0)
    b = r.add("seek", usage=U, wall_time=1, agent_index=1)
    c = r.add("reason", usage=U, wall_time=1, depends_on=[b.id, a.id, b.id])
    assert c.depends_on == (0, 1)
    with pytest.raises(TraceError):
        r.add("reason", usage=U, wall_time=1, depends_on=[7])


def test_critical_path_and_latency():
    events = [ev(0, wall=2), ev(1, wall=5), ev(2, "reason", [0, 1], wall=1), ev(3, "reason", [2], wall=1)]
    assert critical_path_rounds(events) == 3
    assert modeled_latency(events) == 7


def test_cycle_and_unknown_dependency():
    with pytest.raises(TraceError, match="cycle"):
        critical_path_rounds([ev(0, deps=[1]), ev(1, deps=[0])])
    with pytest.raises(TraceError, match="unknown"):
        critical_path_rounds([ev(0, deps=[5])])


def test_empty_trace_totals_are_zero():
    totals = compute_totals([])
    assert (totals.calls, totals.input_tokens, totals.output_tokens, totals.critical_path_rounds) == (0, 0, 0, 0)
    assert str(totals.cost) == "0.000000"


def test_bandwidth_chain_is_two():
    events = [ev(0, "baseline_step", agent=0)] + [ev(i, "baseline_step", [i - 1], agent=i) for i in range(1, 5)]
    assert bandwidth(events) == 2


def test_bandwidth_reduce_counts_group():
    events = [ev(i, "baseline_step", agent=i) for i in range(4)] + [ev(4, "reduce", [0, 1, 2, 3])]
    assert bandwidth(events) == 4


def test_bandwidth_ignores_reasoning_reads():
    events = [ev(i, "seek", agent=i) for i in range(6)] + [ev(6, "reason", range(6))]
    assert bandwidth(events) == 1


def test_event_record_round_trip():
    e = TraceEvent(3, "rate", (1, 2), 4, 2, 0, U, 0.25, "87", (1,), True, False)
    assert TraceEvent.from_record(e.to_record()) == e
    with pytest.raises(TraceError):
        TraceEvent.from_record({"id": 0, "kind": "mystery"})


@st.composite
def dags(draw):
    n = draw(st.integers(1, 25))
    events = []
    for i in range(n):
        deps = draw(st.sets(st.integers(0, i - 1), max_size=3)) if i else set()
        events.append(ev(i, deps=sorted(deps), wall=draw(st.floats(0, 5))))
    return events


def _brute_longest(events):
    best = {}
    for e in events:
        best[e.id] = 1 + max((best[d] for d in e.depends_on), default=0)
    return max(best.values())


@given(dags())
def test_critical_path_matches_brute_force(events):
    assert critical_path_rounds(events) == _brute_longest(events)
    assert 1 <= critical_path_rounds(events) <= len(events)
    # input order does not matter
    assert critical_path_rounds(list(reversed(events))) == critical_path_rounds(events)
