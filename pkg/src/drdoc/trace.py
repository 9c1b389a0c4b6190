"""Reading run traces back: re-parsing completions and rebuilding replay scripts."""

from __future__ import annotations

import json
import math
import re
from pathlib import Path

from .agents import option_letters
from .backends.scripted import Script
from .docmodel import VideoDocument
from .pipeline import TRACE_TAG, outcome_json


def load_trace(path) -> dict:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    if obj.get("trace") != TRACE_TAG:
        raise ValueError(f"{path}: not a {TRACE_TAG} trace")
    return obj


def reparse(trace: dict) -> list[dict]:
    """Run every recorded completion through the current parsers.

    Returns one row per chat event with the recorded and fresh outcomes.
    """
    letters = option_letters(len(trace["options"]))
    rows = []
    for idx, ev in enumerate(trace["events"]):
        if ev.get("event") != "chat":
            continue
        fresh = outcome_json(ev["role"], ev["completion"], letters)
        rows.append({"event": idx, "role": ev["role"], "step": ev["step"],
                     "recorded": ev.get("parsed"), "reparsed": fresh,
                     "match": fresh == ev.get("parsed")})
    return rows


def replay_script(trace: dict, doc: VideoDocument) -> Script:
    """A script that drives a fresh run through exactly the recorded trajectory.

    Chat completions and augmentation captions are replayed verbatim. Frame
    vectors are synthesized so that cosine ranking reproduces the recorded
    top-k order (frames sharing a caption share a vector, as they did originally).
    """
    script = Script()
    for ev in trace["events"]:
        if ev["event"] == "chat":
            script.add(ev["role"], ev["completion"])
        elif ev["event"] == "augment":
            script.add("caption", ev["text"], key=ev["frame_ref"],
                       match="^" + re.escape(ev["prompt"]) + "$")
        elif ev["event"] == "retrieve":
            script.add("embed", [1.0, 0.0, 0.0], key=trace["question"])
            seen: dict[str, int] = {}
            for rank, (fid, _score) in enumerate(ev["ranked"]):
                seen.setdefault(doc.frame(fid).short_caption, rank)
            for rec in doc.frames:
                if rec.short_caption == trace["question"]:
                    continue
                if rec.short_caption in seen:
                    angle = 0.01 * seen[rec.short_caption]
                    vec = [math.cos(angle), math.sin(angle), 0.0]
                else:
                    vec = [0.0, 0.0, 1.0]
                script.add("embed", vec, key=rec.short_caption)
    return script
