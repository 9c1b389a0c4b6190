from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

from ..backends.base import Backends
from ..docmodel import VideoDocument, restrict, with_subtitles
from ..pipeline import STATUSES, RunConfig, RunTrace, run
from ..retrieval import EmbeddingCache
from .cache import align_subtitles, load_cached, load_subtitles
from .dataset import QAItem

REPORT_TAG = "drdoc-v1"


@dataclass
class ItemResult:
    index: int
    video_id: str
    gold: str | None
    predicted: str | None
    confidence: int | None
    status: str
    rounds: int
    calls: dict
    error: str | None = None

    @property
    def correct(self) -> bool | None:
        if self.gold is None:
            return None
        return self.predicted == self.gold

    def to_json(self) -> dict:
        return {"index": self.index, "video_id": self.video_id, "gold": self.gold,
                "predicted": self.predicted, "confidence": self.confidence, "correct": self.correct,
                "status": self.status, "rounds": self.rounds, "calls": self.calls, "error": self.error}


@dataclass
class EvalReport:
    items: list[ItemResult] = field(default_factory=list)

    @property
    def labeled(self) -> list[ItemResult]:
        return [r for r in self.items if r.gold is not None]

    @property
    def n_correct(self) -> int:
        return sum(1 for r in self.labeled if r.correct)

    @property
    def accuracy(self) -> float | None:
        """Fraction correct over gold-labeled items; None when there are none."""
        labeled = self.labeled
        return self.n_correct / len(labeled) if labeled else None

    def by_status(self) -> dict[str, int]:
        return {s: sum(1 for r in self.items if r.status == s) for s in STATUSES}

    def to_json(self) -> dict:
        return {
            "report": REPORT_TAG,
            "n_items": len(self.items),
            "n_labeled": len(self.labeled),
            "n_correct": self.n_correct,
            "accuracy": self.accuracy,
            "by_status": self.by_status(),
            "items": [r.to_json() for r in self.items],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False) + "\n"

    def table(self) -> str:
        rows = [f"{'#':>4}  {'video':<20} {'gold':<4} {'pred':<4} {'conf':<4} {'status':<16} rounds"]
        for r in self.items:
            rows.append(f"{r.index:>4}  {r.video_id[:20]:<20} {r.gold or '-':<4} {r.predicted or '-':<4} "
                        f"{r.confidence or '-':<4} {r.status:<16} {r.rounds}")
        acc = self.accuracy
        acc_text = "n/a (no labeled items)" if acc is None else f"{acc:.3f} ({self.n_correct}/{len(self.labeled)})"
        rows.append(f"accuracy: {acc_text}")
        return "\n".join(rows)


def trace_name(item: QAItem, index: int) -> str:
    safe = re.sub(r"[^A-Za-z0-9._-]", "_", item.video_id)
    return f"{safe}_{index}.trace.json"


def prepare_document(item: QAItem, cache_dir) -> VideoDocument:
    doc = load_cached(cache_dir, item.video_id, item.captions_ref)
    if item.subtitles_ref:
        cues = load_subtitles(item.subtitles_ref)
        doc = with_subtitles(doc, align_subtitles(cues, doc.total_frames, doc.fps))
    if item.frame_range:
        doc = restrict(doc, *item.frame_range)
    return doc


def run_item(item: QAItem, index: int, config: RunConfig, backends: Backends, cache_dir,
             embedding_cache: EmbeddingCache | None = None) -> tuple[ItemResult, RunTrace]:
    doc = prepare_document(item, cache_dir)
    if item.frame_range:
        embedding_cache = None  # renumbered frames must not collide with full-video entries
    rec, trace = run(doc, item.question, item.options, _for_item(config, item), backends, embedding_cache)
    result = ItemResult(index, item.video_id, item.gold_letter,
                        rec.letter if rec else None, rec.confidence if rec else None,
                        trace.status, trace.rounds, trace.to_json()["calls"], trace.error)
    return result, trace


def _for_item(config: RunConfig, item: QAItem) -> RunConfig:
    if config.option_count == len(item.options):
        return config
    return replace(config, option_count=len(item.options))


def evaluate(items: Sequence[QAItem], config: RunConfig, backends: Backends, cache_dir,
             trace_dir=None, concurrency: int = 4,
             embedding_cache: EmbeddingCache | None = None) -> EvalReport:
    # fail fast on missing caches: a harness error, unlike a wrong answer
    for item in items:
        load_cached(cache_dir, item.video_id, item.captions_ref)
    if trace_dir is not None:
        Path(trace_dir).mkdir(parents=True, exist_ok=True)

    def work(pair):
        index, item = pair
        result, trace = run_item(item, index, config, backends, cache_dir, embedding_cache)
        if trace_dir is not None:
            (Path(trace_dir) / trace_name(item, index)).write_text(trace.dumps(), encoding="utf-8")
        return result

    with ThreadPoolExecutor(max_workers=max(1, concurrency)) as pool:
        results = list(pool.map(work, enumerate(items)))
    return EvalReport(results)
