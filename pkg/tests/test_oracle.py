import pytest

from extagents.backend.base import NO_ANSWER, NO_INFORMATION, is_sentinel, make_backend
from extagents.backend.config import BackendConfig
from extagents.backend.oracle import Fact, OracleWorld
from extagents.backend.templates import load_templates
from extagents.errors import BudgetError, ConfigError, ProtocolError

T = load_templates("infbench", "en")
A = Fact("a", "[A] alpha fact.", 1)
B = Fact("b", "[B] beta fact.", 5)
D = Fact("d", "[D] decoy fact.", 0, "decoy")
WORLD = OracleWorld("Which code?", "code 42", (A, B, D), decoy_answer="wrong code", guess="no idea")


def backend(**kw):
    return make_backend(BackendConfig(**kw), world=WORLD, templates=T)


def test_seek_first_reports_present_facts_by_priority():
    reply = backend().complete(T["seek_first"].render({"question": "q", "context": f"x {A.text} y {B.text}"}))
    assert reply.text == f"{B.text}\n{A.text}"
    assert reply.usage.output_tokens > 0 and reply.latency > 0


def test_seek_first_without_facts_is_sentinel():
    reply = backend().complete(T["seek_first"].render({"question": "q", "context": "nothing here"}))
    assert reply.text == NO_INFORMATION


def test_seek_update_reports_only_new_facts():
    prompt = T["seek_update"].render({"question": "q", "context": f"{A.text} {B.text}",
                                      "extracted_information": B.text, "iteration": "2nd"})
    assert backend().complete(prompt).text == A.text


def test_message_budget_drops_low_priority_facts():
    reply = backend(message_budget=5).complete(
        T["seek_first"].render({"question": "q", "context": f"{A.text} {B.text}"}))
    assert reply.text == B.text


def test_rate_scores_required_coverage():
    prompt = T["rate"].render({"question": "q", "extracted_information": A.text})
    assert backend().complete(prompt).text == "Score: 50"


def test_reason_gate_and_terminal_guess():
    info = {"question": "q", "extracted_information": A.text}
    assert backend().complete(T["reason"].render(info)).text == NO_ANSWER
    assert backend().complete(T["reason_final"].render(info)).text == "no idea"
    both = {"question": "q", "extracted_information": f"{A.text}\n{B.text}"}
    assert backend().complete(T["reason"].render(both)).text == "code 42"


def test_decoy_overrides_answer():
    info = {"question": "q", "extracted_information": f"{A.text} {B.text} {D.text}"}
    assert backend().complete(T["reason"].render(info)).text == "wrong code"


def test_unknown_prompt():
    with pytest.raises(ProtocolError):
        backend().complete("free-form prompt")


def test_budget_checked_before_reply():
    with pytest.raises(BudgetError):
        backend(max_context=10).complete(T["seek_first"].render({"question": "q", "context": "x" * 100}))


def test_oracle_needs_world():
    with pytest.raises(ConfigError):
        make_backend(BackendConfig())


def test_world_round_trip():
    assert OracleWorld.from_record(WORLD.to_record()) == WORLD


@pytest.mark.parametrize("reply,expected", [("NO INFORMATION", True), (" no information. ", True),
                                            ("NO INFORMATION about X", False), ("NO ANSWER", False)])
def test_is_sentinel(reply, expected):
    assert is_sentinel(reply, NO_INFORMATION) is expected
