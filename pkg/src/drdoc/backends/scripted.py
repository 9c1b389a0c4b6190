"""Deterministic stand-ins for the model roles, driven by a script file.

Script files are JSON Lines; each entry is
``{"role": "plan"|"interact"|"answer"|"caption"|"embed", "key": str|null, "response": ...}``.

* chat roles (plan / interact / answer): entries with ``key`` are rules whose
  key is a regular expression searched in the prompt; they answer every
  matching call. Entries with a null key form a FIFO queue consumed when no
  rule matches.
* caption: ``key`` is a frame reference (``"video:frame"``); an optional
  ``"match"`` regex restricts the entry to prompts it matches. Null-key
  entries are fallbacks for any frame.
* embed: ``key`` is the exact text and ``response`` its vector. Texts without
  an entry get a hash-seeded unit vector.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from ..errors import EmptyCaptionReturned, ScriptExhausted
from .base import ChatMessage, check_messages, check_vectors

CHAT_ROLES = ("plan", "interact", "answer")
SCRIPT_ROLES = CHAT_ROLES + ("caption", "embed")


@dataclass(frozen=True)
class ScriptEntry:
    role: str
    key: str | None
    response: Any
    match: str | None = None

    def to_json(self) -> dict:
        obj = {"role": self.role, "key": self.key, "response": self.response}
        if self.match is not None:
            obj["match"] = self.match
        return obj


@dataclass
class Script:
    entries: list[ScriptEntry] = field(default_factory=list)

    def add(self, role: str, response: Any, key: str | None = None, match: str | None = None) -> "Script":
        if role not in SCRIPT_ROLES:
            raise ValueError(f"unknown script role {role!r}")
        self.entries.append(ScriptEntry(role, key, response, match))
        return self

    def for_role(self, role: str) -> list[ScriptEntry]:
        return [e for e in self.entries if e.role == role]

    @classmethod
    def from_jsonl(cls, text: str) -> "Script":
        script = cls()
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                script.add(obj["role"], obj["response"], obj.get("key"), obj.get("match"))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"script line {lineno}: {exc}") from None
        return script

    @classmethod
    def load(cls, path) -> "Script":
        return cls.from_jsonl(Path(path).read_text(encoding="utf-8"))

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e.to_json(), ensure_ascii=False) + "\n" for e in self.entries)


def _as_text(response: Any) -> str:
    return response if isinstance(response, str) else json.dumps(response, ensure_ascii=False)


class ScriptedChatModel:
    """Replays canned completions. Serializes calls so queue order is reproducible."""

    def __init__(self, script: Script):
        self._lock = threading.Lock()
        self._rules = {r: [e for e in script.for_role(r) if e.key is not None] for r in CHAT_ROLES}
        self._queues = {r: [e for e in script.for_role(r) if e.key is None] for r in CHAT_ROLES}
        self._next = Counter()
        self.calls = Counter()

    def chat(self, messages: Sequence[ChatMessage], role: str | None = None) -> str:
        check_messages(messages)
        if role not in CHAT_ROLES:
            raise ValueError(f"scripted chat needs a role in {CHAT_ROLES}, got {role!r}")
        prompt = "\n".join(m.content for m in messages if m.role != "assistant")
        with self._lock:
            self.calls[role] += 1
            for rule in self._rules[role]:
                if re.search(rule.key, prompt):
                    return _as_text(rule.response)
            queue = self._queues[role]
            idx = self._next[role]
            if idx >= len(queue):
                raise ScriptExhausted(f"no scripted {role} response left (call {self.calls[role]})")
            self._next[role] += 1
            return _as_text(queue[idx].response)


def hashed_unit_vector(text: str, dim: int = 64) -> list[float]:
    seed = int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "little")
    vec = np.random.default_rng(seed).standard_normal(dim)
    return (vec / np.linalg.norm(vec)).tolist()


class ScriptedEmbedder:
    def __init__(self, script: Script | None = None, dim: int = 64):
        self.dim = dim
        self.vectors = {}
        if script is not None:
            self.vectors = {e.key: [float(x) for x in e.response] for e in script.for_role("embed")}
        self.calls = 0
        self._lock = threading.Lock()

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        texts = list(texts)
        if any(not t for t in texts):
            raise ValueError("cannot embed empty text")
        with self._lock:
            self.calls += 1
        out = [list(self.vectors[t]) if t in self.vectors else hashed_unit_vector(t, self.dim) for t in texts]
        return check_vectors(out, len(texts)) if out else out


class ScriptedCaptioner:
    def __init__(self, script: Script):
        entries = script.for_role("caption")
        self._keyed = [e for e in entries if e.key is not None]
        self._fallback = [e for e in entries if e.key is None]
        self.calls = 0
        self.log: list[tuple[str, str]] = []
        self._lock = threading.Lock()

    def caption(self, frame_ref: str, prompt: str) -> str:
        if not prompt:
            raise ValueError("caption prompt must be non-empty")
        with self._lock:
            self.calls += 1
            self.log.append((frame_ref, prompt))
        for group in (self._keyed, self._fallback):
            for e in group:
                if e.key is not None and e.key != frame_ref:
                    continue
                if e.match is not None and not re.search(e.match, prompt):
                    continue
                text = _as_text(e.response).strip()
                if not text:
                    break
                return text
        raise EmptyCaptionReturned(f"no scripted caption for {frame_ref}")
