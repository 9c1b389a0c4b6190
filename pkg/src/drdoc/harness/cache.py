"""Caption caching: one JSON Lines document file per video, filled idempotently."""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from ..backends.base import SHORT_CAPTION_PROMPT, frame_ref
from ..docmodel import (
    FrameRecord,
    VideoDocument,
    frame_line,
    header_line,
    load,
    load_partial,
    sample_count,
    save,
)
from ..errors import BackendError, CorruptDocument, MissingCache, SchemaError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ManifestEntry:
    video_id: str
    duration: float | None = None
    frames: tuple[str, ...] | None = None  # explicit frame references, one per sampled frame

    def frame_count(self, fps: float) -> int:
        if self.frames is not None:
            return len(self.frames)
        return sample_count(self.duration, fps)

    def ref(self, frame_id: int) -> str:
        if self.frames is not None:
            return self.frames[frame_id - 1]
        return frame_ref(self.video_id, frame_id)


def load_manifest(path) -> list[ManifestEntry]:
    entries = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(lineno, "<json>", str(exc)) from None
        vid = obj.get("video_id") if isinstance(obj, dict) else None
        if not isinstance(vid, str) or not vid:
            raise SchemaError(lineno, "video_id")
        frames, duration = obj.get("frames"), obj.get("duration")
        if frames is not None:
            if not isinstance(frames, list) or not frames or not all(isinstance(f, str) for f in frames):
                raise SchemaError(lineno, "frames", "expected a non-empty list of frame references")
            entries.append(ManifestEntry(vid, frames=tuple(frames)))
        elif isinstance(duration, (int, float)) and not isinstance(duration, bool) and duration > 0:
            entries.append(ManifestEntry(vid, duration=float(duration)))
        else:
            raise SchemaError(lineno, "duration", "need a positive duration or a frames list")
    return entries


def document_path(cache_dir, video_id: str) -> Path:
    safe = re.sub(r"[^A-Za-z0-9._-]", "_", video_id)
    return Path(cache_dir) / f"{safe}.jsonl"


def load_cached(cache_dir, video_id: str, path=None) -> VideoDocument:
    path = Path(path) if path else document_path(cache_dir, video_id)
    if not path.exists():
        raise MissingCache(video_id)
    try:
        return load(path.read_bytes())
    except CorruptDocument:
        raise MissingCache(video_id) from None


@dataclass
class PrecaptionResult:
    video_id: str
    total_frames: int
    captioned: int = 0
    reused: int = 0
    failed: list[int] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return not self.failed


def precaption_video(entry: ManifestEntry, captioner, fps: float, cache_dir,
                     prompt: str = SHORT_CAPTION_PROMPT) -> PrecaptionResult:
    total = entry.frame_count(fps)
    path = document_path(cache_dir, entry.video_id)
    have: dict[int, FrameRecord] = {}
    if path.exists():
        try:
            header, found = load_partial(path.read_bytes())
            if header["total_frames"] == total and header["fps"] == fps:
                have = found.get(entry.video_id, {})
        except CorruptDocument:
            log.warning("discarding unreadable cache %s", path)
    if not have:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(header_line(fps, total) + "\n", encoding="utf-8")

    result = PrecaptionResult(entry.video_id, total, reused=len(have))
    with path.open("a", encoding="utf-8") as fh:
        for frame_id in range(1, total + 1):
            if frame_id in have:
                continue
            try:
                text = captioner.caption(entry.ref(frame_id), prompt)
                rec = FrameRecord(frame_id, text)
            except (BackendError, ValueError) as exc:
                log.warning("caption failed for %s frame %d: %s", entry.video_id, frame_id, exc)
                result.failed.append(frame_id)
                continue
            have[frame_id] = rec
            fh.write(frame_line(entry.video_id, rec) + "\n")
            fh.flush()
            result.captioned += 1

    if result.complete and result.captioned:
        # rewrite in canonical frame order once every frame is present
        doc = VideoDocument(entry.video_id, tuple(have[i] for i in range(1, total + 1)), fps)
        path.write_bytes(save(doc))
    return result


def precaption(manifest, captioner, fps: float, cache_dir) -> list[PrecaptionResult]:
    return [precaption_video(entry, captioner, fps, cache_dir) for entry in manifest]


# --- subtitles -----------------------------------------------------------------

_SRT_TIME = re.compile(r"(\d+):(\d+):(\d+)[,.](\d+)\s*-->\s*(\d+):(\d+):(\d+)[,.](\d+)")


def _seconds(h, m, s, frac) -> float:
    return int(h) * 3600 + int(m) * 60 + int(s) + int(frac) / 10 ** len(frac)


def load_subtitles(path) -> list[tuple[float, float, str]]:
    """Cues as (start, end, text); accepts SRT or JSON Lines ``{"start","end","text"}``."""
    text = Path(path).read_text(encoding="utf-8")
    cues = []
    if _SRT_TIME.search(text):
        for block in re.split(r"\n\s*\n", text.strip()):
            lines = block.strip().splitlines()
            for i, line in enumerate(lines):
                m = _SRT_TIME.search(line)
                if m:
                    g = m.groups()
                    body = " ".join(l.strip() for l in lines[i + 1:] if l.strip())
                    if body:
                        cues.append((_seconds(*g[:4]), _seconds(*g[4:]), body))
                    break
    else:
        for line in text.splitlines():
            if line.strip():
                obj = json.loads(line)
                cues.append((float(obj["start"]), float(obj["end"]), str(obj["text"])))
    return cues


def align_subtitles(cues, total_frames: int, fps: float) -> dict[int, str]:
    """Map each sampled frame to the cue text on screen at its timestamp."""
    aligned = {}
    for frame_id in range(1, total_frames + 1):
        t = (frame_id - 1) / fps
        hits = [body for start, end, body in cues if start <= t < end]
        if hits:
            aligned[frame_id] = " ".join(hits)
    return aligned
