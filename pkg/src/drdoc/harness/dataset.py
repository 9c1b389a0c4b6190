from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..agents.prompts import LETTERS
from ..errors import SchemaError


@dataclass(frozen=True)
class QAItem:
    video_id: str
    question: str
    options: tuple[str, ...]
    gold_letter: str | None = None
    captions_ref: str | None = None
    subtitles_ref: str | None = None
    frame_range: tuple[int, int] | None = None

    @property
    def letters(self) -> str:
        return LETTERS[:len(self.options)]


def _text(obj: dict, name: str, line: int, required: bool = True) -> str | None:
    value = obj.get(name)
    if value is None and not required:
        return None
    if not isinstance(value, str) or not value.strip():
        raise SchemaError(line, name, "expected non-empty text")
    return value


def parse_item(obj, line: int) -> QAItem:
    if not isinstance(obj, dict):
        raise SchemaError(line, "<item>", "expected a JSON object")
    options = obj.get("options")
    if not isinstance(options, list) or not all(isinstance(o, str) and o.strip() for o in options):
        raise SchemaError(line, "options", "expected a list of non-empty text")
    if not 2 <= len(options) <= len(LETTERS):
        raise SchemaError(line, "options", f"need 2..{len(LETTERS)} options, got {len(options)}")
    gold = obj.get("gold_letter", obj.get("gold"))
    if gold is not None:
        if not isinstance(gold, str) or gold.strip().upper() not in LETTERS[:len(options)]:
            raise SchemaError(line, "gold_letter", f"{gold!r} outside A..{LETTERS[len(options) - 1]}")
        gold = gold.strip().upper()
    frame_range = obj.get("frame_range")
    if frame_range is not None:
        if (not isinstance(frame_range, list) or len(frame_range) != 2
                or not all(isinstance(x, int) and not isinstance(x, bool) for x in frame_range)
                or not 1 <= frame_range[0] <= frame_range[1]):
            raise SchemaError(line, "frame_range", "expected [first, last] with 1 <= first <= last")
        frame_range = tuple(frame_range)
    return QAItem(
        video_id=_text(obj, "video_id", line),
        question=_text(obj, "question", line),
        options=tuple(options),
        gold_letter=gold,
        captions_ref=_text(obj, "captions_ref", line, required=False),
        subtitles_ref=_text(obj, "subtitles_ref", line, required=False),
        frame_range=frame_range,
    )


def load_dataset(path) -> list[QAItem]:
    items = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(lineno, "<json>", str(exc)) from None
            items.append(parse_item(obj, lineno))
    return items
