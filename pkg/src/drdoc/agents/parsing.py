"""Pull structured agent replies out of free-form LLM completions."""

from __future__ import annotations

import ast
import json
import re
from dataclasses import dataclass
from typing import Any

from ..docmodel import AugmentationType
from ..errors import InvalidLetter, NoStructureFound

_FENCE = re.compile(r"```[a-zA-Z0-9_-]*[ \t]*\n?(.*?)```", re.DOTALL)
_CLOSER = {"{": "}", "[": "]"}
_SMART_QUOTES = str.maketrans({"“": '"', "”": '"', "‘": "'", "’": "'"})


def _balanced_end(text: str, start: int) -> int | None:
    """Index just past the bracket closing the one at ``start``, or None."""
    stack = [_CLOSER[text[start]]]
    in_str = None
    escaped = False
    for i in range(start + 1, len(text)):
        ch = text[i]
        if in_str:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == in_str:
                in_str = None
            continue
        if ch == '"':
            in_str = ch
        elif ch in _CLOSER:
            stack.append(_CLOSER[ch])
        elif ch in "]}":
            if ch != stack[-1]:
                return None
            stack.pop()
            if not stack:
                return i + 1
    return None


def _loads_lenient(candidate: str):
    try:
        return json.loads(candidate)
    except json.JSONDecodeError:
        pass
    cleaned = re.sub(r",\s*([\]}])", r"\1", candidate)  # trailing commas
    try:
        return json.loads(cleaned)
    except json.JSONDecodeError:
        pass
    try:
        value = ast.literal_eval(cleaned)  # single-quoted pseudo-JSON
    except (ValueError, SyntaxError, MemoryError, RecursionError):
        raise ValueError("not a literal") from None
    if isinstance(value, (dict, list)):
        return value
    raise ValueError("not an object or array")


def _scan(text: str, want):
    pos = 0
    while pos < len(text):
        ch = text[pos]
        if ch not in _CLOSER or (want is dict and ch != "{"):
            pos += 1
            continue
        end = _balanced_end(text, pos)
        if end is not None:
            try:
                yield _loads_lenient(text[pos:end])
                pos = end
                continue
            except ValueError:
                pass
        pos += 1


def iter_structured(text: str, want: type | None = None):
    """Every top-level JSON object/array in ``text``: fenced blocks first, then the raw text."""
    if not isinstance(text, str):
        return
    candidates = [m.group(1) for m in _FENCE.finditer(text)] + [text]
    for body in candidates:
        yield from _scan(body, want)
        smart = body.translate(_SMART_QUOTES)
        if smart != body:
            yield from _scan(smart, want)


def extract_structured(text: str, want: type | None = None) -> Any:
    """First balanced JSON object or array in ``text``, looking inside code fences first.

    ``want=dict`` skips arrays and only returns objects.
    """
    for value in iter_structured(text, want):
        return value
    raise NoStructureFound(f"no JSON object or array in: {str(text)[:80]!r}")


def _first_success(text: str, want, parse):
    """Apply ``parse`` to each structure in turn; return the first that validates."""
    first_error = None
    for value in iter_structured(text, want):
        try:
            return parse(value)
        except ParseFailure as exc:
            first_error = first_error or exc
    if first_error is not None:
        raise first_error
    raise NoStructureFound(f"no JSON object or array in: {str(text)[:80]!r}")


@dataclass(frozen=True)
class AgentVerdict:
    sufficient: bool
    explanation: tuple[str, ...]

    def __post_init__(self):
        if not self.sufficient and not self.explanation:
            raise ValueError("an insufficient verdict needs an explanation")

    def to_json(self) -> dict:
        return {"sufficient": self.sufficient, "explanation": list(self.explanation)}


@dataclass(frozen=True)
class AugmentationRequest:
    frame_id: int
    kind: AugmentationType

    def to_json(self) -> list:
        return [self.frame_id, self.kind.value]


@dataclass(frozen=True)
class AnswerRecord:
    letter: str
    confidence: int
    explanation: str

    def __post_init__(self):
        if self.confidence not in (1, 2, 3):
            raise ValueError(f"confidence must be 1, 2 or 3, got {self.confidence}")

    def to_json(self) -> dict:
        return {"letter": self.letter, "confidence": self.confidence, "explanation": self.explanation}


class ParseFailure(ValueError):
    """A completion had structure, but not the structure the agent asked for."""


def _first_dict(value) -> dict:
    if isinstance(value, dict):
        return value
    if isinstance(value, list) and value and isinstance(value[0], dict):
        return value[0]
    raise ParseFailure("expected a JSON object")


def _as_int(value) -> int | None:
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, str):
        m = re.fullmatch(r"\s*(\d+)(?:\.0+)?\s*", value)
        if m:
            return int(m.group(1))
    return None


def parse_verdict(text: str) -> AgentVerdict:
    return _first_success(text, dict, _verdict_from)


def _verdict_from(value) -> AgentVerdict:
    obj = _first_dict(value)
    if "confidence" not in obj:
        raise ParseFailure("missing 'confidence'")
    conf = _as_int(obj["confidence"])
    if conf not in (0, 1):
        raise ParseFailure(f"confidence must be 0 or 1, got {obj['confidence']!r}")
    expl = obj.get("explanation", obj.get("explaination", []))
    if isinstance(expl, str):
        expl = [expl]
    if not isinstance(expl, list):
        raise ParseFailure("explanation must be a list of text")
    expl = tuple(str(e).strip() for e in expl if str(e).strip())
    if conf == 0 and not expl:
        raise ParseFailure("insufficient verdict without explanation")
    return AgentVerdict(conf == 1, expl)


_TYPE = re.compile(r"\s*(?:type\s*)?([AB])\s*", re.IGNORECASE)


def _request_from(item) -> AugmentationRequest | None:
    if not isinstance(item, dict):
        return None
    raw_frame = item.get("frame", item.get("frame_id"))
    frame = _as_int(raw_frame)
    if frame is None and isinstance(raw_frame, str):
        nums = re.findall(r"-?\d+", raw_frame)
        frame = int(nums[0]) if len(nums) == 1 else None
    kind = item.get("type")
    m = _TYPE.fullmatch(kind) if isinstance(kind, str) else None
    if frame is None or m is None:
        return None
    return AugmentationRequest(frame, AugmentationType(m.group(1).upper()))


def parse_requests(text: str) -> list[AugmentationRequest]:
    """Raw agent request list, before any validation against the document.

    Malformed items are skipped; a reply that is not a list (or a single
    request object) is a parse failure.
    """
    return _first_success(text, None, _requests_from)


def _requests_from(value) -> list[AugmentationRequest]:
    if isinstance(value, dict):
        value = [value]
    if not isinstance(value, list):
        raise ParseFailure("expected a list of requests")
    requests = [r for r in map(_request_from, value) if r is not None]
    if value and not requests:
        raise ParseFailure("no well-formed request in the list")
    return requests


_LETTER = re.compile(r"\s*(?:option\s*)?\(?([A-Za-z])\)?(?:\s*[:.)]|\s|$)", re.IGNORECASE)


def parse_answer(text: str, letters: str) -> AnswerRecord:
    """Parse the answering agent's reply; raises InvalidLetter for an out-of-range choice."""
    return _first_success(text, dict, lambda value: _answer_from(value, letters))


def _answer_from(value, letters: str) -> AnswerRecord:
    obj = _first_dict(value)
    raw = obj.get("final_answer", obj.get("answer"))
    if not isinstance(raw, str) or not raw.strip():
        raise ParseFailure("missing 'final_answer'")
    m = _LETTER.match(raw)
    if m is None:
        raise ParseFailure(f"final_answer {raw!r} is not a letter")
    letter = m.group(1).upper()
    conf = _as_int(obj.get("confidence"))
    if conf not in (1, 2, 3):
        raise ParseFailure(f"confidence must be 1, 2 or 3, got {obj.get('confidence')!r}")
    expl = obj.get("explaination", obj.get("explanation", ""))
    if isinstance(expl, list):
        expl = " ".join(str(e) for e in expl)
    if letter not in letters:
        raise InvalidLetter(letter, letters)
    return AnswerRecord(letter, conf, str(expl))
