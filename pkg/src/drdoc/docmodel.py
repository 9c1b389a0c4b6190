"""Video documents: one caption line per sampled frame, grown by augmentation.

A document is an immutable value. Every operation that "changes" a document
returns a new one; short captions are never altered once assembled.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import (
    CorruptDocument,
    DuplicateAugmentation,
    EmptyCaption,
    EmptyDocument,
    InvalidSampling,
    UnknownFrame,
)

FORMAT_TAG = "drdoc-v1"
SEPARATOR = "; "


class AugmentationType(str, enum.Enum):
    A = "A"  # detailed, question-agnostic image description
    B = "B"  # question-conditioned answer about the frame

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class FrameRecord:
    frame_id: int
    short_caption: str
    detail_caption: str | None = None
    vqa_answer: str | None = None
    subtitle: str | None = None

    def __post_init__(self):
        if self.frame_id < 1:
            raise UnknownFrame(self.frame_id, 0)
        if not self.short_caption or not self.short_caption.strip():
            raise EmptyCaption(self.frame_id)

    def slot(self, kind: AugmentationType) -> str | None:
        return self.detail_caption if kind is AugmentationType.A else self.vqa_answer

    def description(self, include_subtitles: bool = True) -> str:
        parts = [self.short_caption, self.detail_caption, self.vqa_answer]
        if include_subtitles:
            parts.append(self.subtitle)
        return SEPARATOR.join(p for p in parts if p)


@dataclass(frozen=True)
class VideoDocument:
    video_id: str
    frames: tuple[FrameRecord, ...]
    fps: float

    def __post_init__(self):
        if not self.frames:
            raise EmptyDocument(f"document {self.video_id!r} has no frames")
        for expected, rec in enumerate(self.frames, start=1):
            if rec.frame_id != expected:
                raise CorruptDocument(
                    f"frame ids must run 1..T without gaps; got {rec.frame_id} at position {expected}"
                )
        if not self.fps > 0:
            raise InvalidSampling(f"fps must be positive, got {self.fps}")

    @property
    def total_frames(self) -> int:
        return len(self.frames)

    @property
    def duration_seconds(self) -> float:
        return self.total_frames / self.fps

    def frame(self, frame_id: int) -> FrameRecord:
        if not 1 <= frame_id <= self.total_frames:
            raise UnknownFrame(frame_id, self.total_frames)
        return self.frames[frame_id - 1]


@dataclass(frozen=True)
class DocumentText:
    lines: tuple[str, ...]

    @property
    def rendered(self) -> str:
        return "\n".join(self.lines)

    def __str__(self) -> str:
        return self.rendered


def sample_count(duration_seconds: float, fps: float) -> int:
    """Number of frames drawn from a clip: floor(duration * fps), at least one."""
    if not duration_seconds > 0 or not fps > 0:
        raise InvalidSampling(f"duration and fps must be positive (got {duration_seconds}, {fps})")
    return max(1, math.floor(duration_seconds * fps))


def new_document(video_id: str, captions: Iterable[str], fps: float) -> VideoDocument:
    captions = list(captions)
    if not captions:
        raise EmptyDocument(f"no captions for video {video_id!r}")
    frames = []
    for frame_id, text in enumerate(captions, start=1):
        if text is None or not str(text).strip():
            raise EmptyCaption(frame_id)
        frames.append(FrameRecord(frame_id, str(text)))
    return VideoDocument(str(video_id), tuple(frames), fps)


def merge_augmentation(doc: VideoDocument, frame_id: int, kind: AugmentationType | str,
                       text: str) -> VideoDocument:
    kind = AugmentationType(kind)
    rec = doc.frame(frame_id)
    if not text or not text.strip():
        raise EmptyCaption(frame_id)
    if rec.slot(kind) is not None:
        raise DuplicateAugmentation(frame_id, kind)
    field = "detail_caption" if kind is AugmentationType.A else "vqa_answer"
    frames = list(doc.frames)
    frames[frame_id - 1] = dataclasses.replace(rec, **{field: text})
    return dataclasses.replace(doc, frames=tuple(frames))


def with_subtitles(doc: VideoDocument, subtitles: Mapping[int, str]) -> VideoDocument:
    """Attach aligned subtitle lines; frames absent from the mapping are left as is."""
    frames = list(doc.frames)
    for frame_id, text in subtitles.items():
        rec = doc.frame(frame_id)
        if text:
            frames[frame_id - 1] = dataclasses.replace(rec, subtitle=text)
    return dataclasses.replace(doc, frames=tuple(frames))


def restrict(doc: VideoDocument, first: int, last: int) -> VideoDocument:
    """Sub-document covering frames first..last, renumbered from 1."""
    doc.frame(first)
    doc.frame(last)
    if last < first:
        raise UnknownFrame(last, doc.total_frames)
    frames = tuple(
        dataclasses.replace(rec, frame_id=i)
        for i, rec in enumerate(doc.frames[first - 1:last], start=1)
    )
    return dataclasses.replace(doc, frames=frames)


def render(doc: VideoDocument, include_subtitles: bool = False) -> DocumentText:
    return DocumentText(tuple(
        "{%d, %s}" % (rec.frame_id, rec.description(include_subtitles)) for rec in doc.frames
    ))


def augmented_ids(doc: VideoDocument, kind: AugmentationType | str) -> frozenset[int]:
    kind = AugmentationType(kind)
    return frozenset(rec.frame_id for rec in doc.frames if rec.slot(kind) is not None)


# --- serialization -------------------------------------------------------------

def _frame_obj(video_id: str, rec: FrameRecord) -> dict:
    return {
        "video_id": video_id,
        "frame_id": rec.frame_id,
        "caption": rec.short_caption,
        "detail": rec.detail_caption,
        "vqa": rec.vqa_answer,
        "subtitle": rec.subtitle,
    }


def header_line(fps: float, total_frames: int) -> str:
    return json.dumps({"format": FORMAT_TAG, "fps": fps, "total_frames": total_frames})


def frame_line(video_id: str, rec: FrameRecord) -> str:
    return json.dumps(_frame_obj(video_id, rec), ensure_ascii=False)


def save(doc: VideoDocument) -> bytes:
    lines = [header_line(doc.fps, doc.total_frames)]
    lines.extend(frame_line(doc.video_id, rec) for rec in doc.frames)
    return ("\n".join(lines) + "\n").encode("utf-8")


def _opt_text(obj: dict, key: str) -> str | None:
    value = obj.get(key)
    if value is not None and not isinstance(value, str):
        raise CorruptDocument(f"field {key!r} must be text or null")
    return value


def load_partial(data: bytes) -> tuple[dict, dict[str, dict[int, FrameRecord]]]:
    """Parse a cache file that may be incomplete.

    Returns the header and the frame records found, grouped by video id. Later
    lines win over earlier ones with the same frame id, so an append-only file
    can be read back after concurrent or repeated writes.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorruptDocument(f"not utf-8: {exc}") from None
    rows = [ln for ln in text.split("\n") if ln.strip()]
    if not rows:
        raise CorruptDocument("empty document file")
    try:
        header = json.loads(rows[0])
    except json.JSONDecodeError as exc:
        raise CorruptDocument(f"bad header: {exc}") from None
    if not isinstance(header, dict) or header.get("format") != FORMAT_TAG:
        raise CorruptDocument("missing drdoc-v1 header")
    fps, total = header.get("fps"), header.get("total_frames")
    if not isinstance(fps, (int, float)) or isinstance(fps, bool) or not fps > 0:
        raise CorruptDocument(f"bad fps {fps!r}")
    if not isinstance(total, int) or isinstance(total, bool) or total < 1:
        raise CorruptDocument(f"bad total_frames {total!r}")

    found: dict[str, dict[int, FrameRecord]] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        try:
            obj = json.loads(row)
        except json.JSONDecodeError as exc:
            raise CorruptDocument(f"line {lineno}: {exc}") from None
        if not isinstance(obj, dict):
            raise CorruptDocument(f"line {lineno}: expected an object")
        frame_id, video_id = obj.get("frame_id"), obj.get("video_id")
        if not isinstance(frame_id, int) or isinstance(frame_id, bool) or not isinstance(video_id, str):
            raise CorruptDocument(f"line {lineno}: bad frame_id/video_id")
        try:
            rec = FrameRecord(
                frame_id,
                obj.get("caption") if isinstance(obj.get("caption"), str) else "",
                _opt_text(obj, "detail"),
                _opt_text(obj, "vqa"),
                _opt_text(obj, "subtitle"),
            )
        except (EmptyCaption, UnknownFrame) as exc:
            raise CorruptDocument(f"line {lineno}: {exc}") from None
        found.setdefault(video_id, {})[frame_id] = rec
    return header, found


def load(data: bytes) -> VideoDocument:
    header, found = load_partial(data)
    if len(found) != 1:
        raise CorruptDocument(f"expected frames of exactly one video, found {len(found)}")
    (video_id, frames), = found.items()
    total = header["total_frames"]
    if sorted(frames) != list(range(1, total + 1)):
        raise CorruptDocument(f"expected frames 1..{total}, found {len(frames)} records")
    return VideoDocument(video_id, tuple(frames[i] for i in range(1, total + 1)), header["fps"])
