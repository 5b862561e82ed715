"""Prompt templates with ``{name}`` placeholders.

Templates live in plain-text files laid out as ``<dir>/<task>/<language>/<name>.txt``.
The built-in set ships with the package; a user directory overrides it file
by file.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Literal, Mapping

from ..errors import ConfigError, TemplateError
from ..knowledge import TokenCounter

Language = Literal["en", "zh"]

PLACEHOLDER = re.compile(r"\{([a-z_]+)\}")

TEMPLATE_NAMES = (
    "seek_first",
    "seek_update",
    "rate",
    "reason",
    "reason_final",
    "direct",
    "coa_step",
    "reduce",
)
TASKS = {"hotpotqa": ("en",), "infbench": ("en", "zh")}


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    language: Language
    body: str

    @cached_property
    def placeholders(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for match in PLACEHOLDER.finditer(self.body):
            seen.setdefault(match.group(1))
        return tuple(seen)

    def render(self, bindings: Mapping[str, object]) -> str:
        return render(self, bindings)

    def overhead(self, counter: TokenCounter, **fixed: object) -> int:
        """Token count of the template with every unfixed placeholder bound to ``""``."""
        bindings = {name: "" for name in self.placeholders}
        bindings.update({k: str(v) for k, v in fixed.items()})
        return counter.count(render(self, bindings))

    @cached_property
    def pattern(self) -> re.Pattern[str]:
        """Regex inverting :func:`render`; each placeholder becomes a named group."""
        parts: list[str] = []
        pos = 0
        seen: set[str] = set()
        for match in PLACEHOLDER.finditer(self.body):
            parts.append(re.escape(self.body[pos:match.start()]))
            name = match.group(1)
            parts.append(f"(?P={name})" if name in seen else f"(?P<{name}>.*?)")
            seen.add(name)
            pos = match.end()
        parts.append(re.escape(self.body[pos:]))
        return re.compile("".join(parts) + r"\Z", re.DOTALL)

    def parse(self, prompt: str) -> dict[str, str] | None:
        match = self.pattern.match(prompt)
        return match.groupdict() if match else None


def render(template: PromptTemplate, bindings: Mapping[str, object]) -> str:
    """Substitute every placeholder in one pass; values are inserted verbatim."""
    for name in template.placeholders:
        if name not in bindings:
            raise TemplateError(f"template {template.name!r} has no binding for {{{name}}}",
                                placeholder=name)
    return PLACEHOLDER.sub(lambda m: str(bindings[m.group(1)]), template.body)


@dataclass(frozen=True)
class TemplateSet:
    task: str
    language: Language
    templates: Mapping[str, PromptTemplate] = field(repr=False)

    def __getitem__(self, name: str) -> PromptTemplate:
        try:
            return self.templates[name]
        except KeyError:
            raise ConfigError(f"no {name!r} template for {self.task}/{self.language}",
                              field="templates") from None

    def __iter__(self):
        return iter(self.templates.values())


def _read(path) -> str:
    text = path.read_text(encoding="utf-8")
    return text[:-1] if text.endswith("\n") else text


@lru_cache(maxsize=None)
def _builtin(task: str, language: str) -> dict[str, PromptTemplate]:
    root = resources.files("extagents").joinpath("prompts", task, language)
    out = {}
    for name in TEMPLATE_NAMES:
        entry = root.joinpath(f"{name}.txt")
        if entry.is_file():
            out[name] = PromptTemplate(name, language, _read(entry))  # type: ignore[arg-type]
    return out


def load_templates(task: str, language: Language, directory: str | Path | None = None) -> TemplateSet:
    if task not in TASKS:
        raise ConfigError(f"unknown task {task!r}; expected one of {sorted(TASKS)}", field="task")
    if language not in ("en", "zh"):
        raise ConfigError(f"unknown language {language!r}", field="language")
    base_language = language if language in TASKS[task] else TASKS[task][0]
    templates = dict(_builtin(task, base_language))
    if base_language != language:
        # tasks without a native template in this language borrow the other task's
        templates = dict(_builtin("infbench", language))
    if directory is not None:
        folder = Path(directory) / task / language
        if not folder.is_dir():
            raise ConfigError(f"template directory {folder} does not exist", field="templates_dir")
        for path in sorted(folder.glob("*.txt")):
            templates[path.stem] = PromptTemplate(path.stem, language, _read(path))
    return TemplateSet(task, language, templates)


def builtin_templates() -> list[PromptTemplate]:
    out: list[PromptTemplate] = []
    for task, languages in TASKS.items():
        for language in languages:
            out.extend(_builtin(task, language).values())
    return out


def ordinal(n: int, language: Language = "en") -> str:
    if language == "zh":
        return str(n)
    if 10 <= n % 100 <= 20:
        suffix = "th"
    else:
        suffix = {1: "st", 2: "nd", 3: "rd"}.get(n % 10, "th")
    return f"{n}{suffix}"


def unique(templates: Iterable[PromptTemplate]) -> list[PromptTemplate]:
    seen: set[tuple[str, str]] = set()
    out = []
    for t in templates:
        key = (t.name, t.body)
        if key not in seen:
            seen.add(key)
            out.append(t)
    return out
