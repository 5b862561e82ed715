"""Token usage and dollar cost accounting."""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction
from typing import Iterable

from ..errors import ConfigError

_MILLION = 1_000_000
_REPORT_QUANTUM = Decimal("0.000001")


@dataclass(frozen=True)
class CompletionUsage:
    input_tokens: int = 0
    output_tokens: int = 0

    def __post_init__(self) -> None:
        if self.input_tokens < 0 or self.output_tokens < 0:
            raise ValueError("token usage cannot be negative")

    def __add__(self, other: CompletionUsage) -> CompletionUsage:
        return CompletionUsage(self.input_tokens + other.input_tokens,
                               self.output_tokens + other.output_tokens)


@dataclass(frozen=True)
class CostModel:
    """Dollar prices per million input and output tokens."""

    input_price_per_million: Fraction
    output_price_per_million: Fraction

    def __post_init__(self) -> None:
        for name in ("input_price_per_million", "output_price_per_million"):
            value = Fraction(str(getattr(self, name)))
            if value < 0:
                raise ConfigError(f"{name} must be >= 0", field=name)
            object.__setattr__(self, name, value)

    def to_record(self) -> dict[str, str]:
        return {
            "input_price_per_million": str(_as_decimal(self.input_price_per_million)),
            "output_price_per_million": str(_as_decimal(self.output_price_per_million)),
        }

    @classmethod
    def from_record(cls, record: dict) -> CostModel:
        return cls(Fraction(str(record["input_price_per_million"])),
                   Fraction(str(record["output_price_per_million"])))


# gpt-4o-mini list prices used for the reported cost comparison
GPT4O_MINI = CostModel(Fraction("0.15"), Fraction("0.60"))


def exact_cost(usage: CompletionUsage, model: CostModel) -> Fraction:
    return (usage.input_tokens * model.input_price_per_million
            + usage.output_tokens * model.output_price_per_million) / _MILLION


def _as_decimal(value: Fraction) -> Decimal:
    return Decimal(value.numerator) / Decimal(value.denominator)


def round_cost(value: Fraction) -> Decimal:
    return _as_decimal(value).quantize(_REPORT_QUANTUM, rounding=ROUND_HALF_EVEN)


def estimate_cost(usage: CompletionUsage, model: CostModel) -> Decimal:
    """Dollar cost rounded to 6 decimals, computed exactly before rounding."""
    return round_cost(exact_cost(usage, model))


def total_usage(usages: Iterable[CompletionUsage]) -> CompletionUsage:
    total = CompletionUsage()
    for usage in usages:
        total = total + usage
    return total
