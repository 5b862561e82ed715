import pytest
from hypothesis import given
from hypothesis import strategies as st

from extagents.backend.templates import TEMPLATE_NAMES, PromptTemplate, load_templates, ordinal
from extagents.errors import ConfigError, TemplateError
from extagents.knowledge import TokenCounter


@pytest.mark.parametrize("task,language", [("infbench", "en"), ("infbench", "zh"), ("hotpotqa", "en")])
def test_builtin_sets_are_complete(task, language):
    templates = load_templates(task, language)
    for name in TEMPLATE_NAMES:
        assert templates[name].body


def test_rate_template_asks_for_score_format():
    assert "Score: (0-100)" in load_templates("infbench", "en")["rate"].body


def test_sentinels_in_templates():
    hotpot = load_templates("hotpotqa", "en")
    assert "NO INFORMATION" in hotpot["seek_first"].body
    assert "NO INFORMATION" in hotpot["seek_update"].body
    for task, language in (("hotpotqa", "en"), ("infbench", "en"), ("infbench", "zh")):
        assert "NO ANSWER" in load_templates(task, language)["reason"].body


def test_hotpotqa_zh_borrows_infbench():
    assert load_templates("hotpotqa", "zh").language == "zh"


def test_unknown_task_and_language():
    with pytest.raises(ConfigError) as exc:
        load_templates("squad", "en")
    assert exc.value.field == "task"
    with pytest.raises(ConfigError):
        load_templates("infbench", "fr")


def test_missing_binding_names_placeholder():
    t = PromptTemplate("t", "en", "Q: {question} C: {context}")
    with pytest.raises(TemplateError) as exc:
        t.render({"question": "x"})
    assert exc.value.placeholder == "context"


def test_values_with_braces_are_not_rendered_again():
    t = PromptTemplate("t", "en", "{a}|{b}")
    assert t.render({"a": "{b}", "b": "x"}) == "{b}|x"


def test_overhead_counts_scaffolding():
    t = PromptTemplate("t", "en", "abcd{x}efgh")
    counter = TokenCounter()
    assert t.overhead(counter) == 2
    assert t.overhead(counter, x="1234") == 3


def test_directory_overrides_file_by_file(tmp_path):
    folder = tmp_path / "infbench" / "en"
    folder.mkdir(parents=True)
    (folder / "direct.txt").write_text("Answer {question} using {context}\n", encoding="utf-8")
    templates = load_templates("infbench", "en", tmp_path)
    assert templates["direct"].body == "Answer {question} using {context}"
    assert templates["rate"].body == load_templates("infbench", "en")["rate"].body


def test_missing_directory():
    with pytest.raises(ConfigError):
        load_templates("infbench", "en", "/nonexistent/templates")


@pytest.mark.parametrize("n,text", [(1, "1st"), (2, "2nd"), (3, "3rd"), (4, "4th"), (11, "11th"), (22, "22nd")])
def test_ordinal(n, text):
    assert ordinal(n) == text


@given(st.text(max_size=50), st.text(max_size=50))
def test_parse_inverts_render(question, context):
    t = load_templates("infbench", "en")["direct"]
    prompt = t.render({"question": question, "context": context})
    parts = t.parse(prompt)
    assert parts is not None
    assert t.render(parts) == prompt
