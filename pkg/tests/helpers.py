"""Small builders shared by the test modules."""

from __future__ import annotations

from extagents.backend.base import NO_INFORMATION
from extagents.sync import AgentMessage, MessagePool, RelevanceScore


def pool_from(scores: list[float | None], timestep: int = 1) -> MessagePool:
    """``None`` marks a no-information message (score 0)."""
    messages, rel = [], []
    for i, s in enumerate(scores):
        if s is None:
            messages.append(AgentMessage(i, timestep, NO_INFORMATION, 2, True))
            rel.append(RelevanceScore(i, timestep, 0))
        else:
            messages.append(AgentMessage(i, timestep, f"message {i}", 10 + i, False))
            rel.append(RelevanceScore(i, timestep, s))
    return MessagePool(timestep, tuple(messages), tuple(rel))
