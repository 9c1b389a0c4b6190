from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Protocol, Sequence

ROLES = ("system", "user", "assistant")

# Prompt used to obtain the short per-frame caption that seeds a document.
SHORT_CAPTION_PROMPT = "describe the picture in no more than 50 words"


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown chat role {self.role!r}")
        if not self.content:
            raise ValueError("chat message content must be non-empty")

    def to_wire(self) -> dict:
        return {"role": self.role, "content": self.content}


@dataclass(frozen=True)
class BackendConfig:
    endpoint: str = "https://api.openai.com/v1"
    model_name: str = "gpt-4-1106-preview"
    temperature: float = 0.0
    max_retries: int = 3
    timeout: float = 60.0
    backoff: float = 0.5  # seconds before the first retry; doubles each time
    frame_ref_template: str = "{frame_ref}"

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")

    def resolved_endpoint(self) -> str:
        return os.environ.get("DRDOC_ENDPOINT", self.endpoint).rstrip("/")


def check_messages(messages: Sequence[ChatMessage]) -> None:
    if not messages:
        raise ValueError("chat needs at least one message")
    if messages[0].role == "assistant":
        raise ValueError("first chat message must not come from the assistant")


class ChatModel(Protocol):
    def chat(self, messages: Sequence[ChatMessage], role: str | None = None) -> str: ...


class Embedder(Protocol):
    def embed(self, texts: Sequence[str]) -> list[list[float]]: ...


class Captioner(Protocol):
    def caption(self, frame_ref: str, prompt: str) -> str: ...


@dataclass
class Backends:
    """The three model roles a pipeline run talks to."""
    llm: ChatModel
    embedder: Embedder
    captioner: Captioner
    extra: dict = field(default_factory=dict)


def frame_ref(video_id: str, frame_id: int) -> str:
    return f"{video_id}:{frame_id}"


def check_vectors(vectors: list[list[float]], expected: int) -> list[list[float]]:
    from ..errors import DimensionMismatch

    if len(vectors) != expected:
        raise DimensionMismatch(f"expected {expected} vectors, got {len(vectors)}")
    dims = {len(v) for v in vectors}
    if len(dims) > 1 or 0 in dims:
        raise DimensionMismatch(f"ragged or empty embedding vectors (dims {sorted(dims)})")
    return vectors
