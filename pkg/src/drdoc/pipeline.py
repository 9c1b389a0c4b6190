"""The question-answering loop: retrieve, augment, plan/interact, answer."""

from __future__ import annotations

import dataclasses
import json
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .agents import (
    AnswerRecord,
    AugmentationRequest,
    MemoryEntry,
    answer,
    augment_prompt,
    find_missing,
    initial_augment_prompt,
    option_letters,
    parse_answer,
    parse_requests,
    parse_verdict,
    plan,
)
from .backends.base import Backends, frame_ref
from .docmodel import AugmentationType, VideoDocument, merge_augmentation
from .errors import DrDocError
from .retrieval import EmbeddingCache, embed_frames, retrieve_topk

TRACE_TAG = "drdoc-v1"
STATUSES = ("answered", "budget_exhausted", "error")


@dataclass(frozen=True)
class RunConfig:
    k: int = 5
    max_rounds: int = 2
    fps: float = 0.5
    option_count: int = 5
    augment_types: frozenset = frozenset(AugmentationType)
    include_subtitles: bool = False
    parse_retries: int = 2
    record_timings: bool = False

    def __post_init__(self):
        kinds = frozenset(AugmentationType(k) for k in self.augment_types)
        object.__setattr__(self, "augment_types", kinds)
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.max_rounds < 0:
            raise ValueError("max_rounds must be >= 0")
        if not kinds:
            raise ValueError("at least one augmentation type must be enabled")
        option_letters(self.option_count)

    def to_json(self) -> dict:
        d = dataclasses.asdict(self)
        d["augment_types"] = sorted(k.value for k in self.augment_types)
        return d


@dataclass(frozen=True)
class LoopState:
    iteration: int
    memory: tuple[MemoryEntry, ...]
    document: VideoDocument
    topk: tuple[int, ...]
    already_a: frozenset = frozenset()
    already_b: frozenset = frozenset()

    def ledger(self, kind: AugmentationType) -> frozenset:
        return self.already_a if kind is AugmentationType.A else self.already_b


class PartialAugmentation(DrDocError):
    """A captioner call failed midway through a request batch.

    ``state`` holds every merge completed before the failure.
    """

    def __init__(self, state: LoopState, index: int, cause: Exception):
        super().__init__(f"augmentation request {index + 1} failed: {cause}")
        self.state = state
        self.index = index


def apply_requests(state: LoopState, requests: Sequence[AugmentationRequest], captioner,
                   question: str, prompt_for: Callable[[AugmentationRequest], str] | None = None,
                   on_caption: Callable | None = None) -> LoopState:
    """One captioner call and one merge per request, in order."""
    if prompt_for is None:
        prompt_for = lambda req: augment_prompt(req.kind, question)  # noqa: E731
    for idx, req in enumerate(requests):
        prompt = prompt_for(req)
        ref = frame_ref(state.document.video_id, req.frame_id)
        try:
            text = captioner.caption(ref, prompt)
            doc = merge_augmentation(state.document, req.frame_id, req.kind, text)
        except DrDocError as exc:
            raise PartialAugmentation(state, idx, exc) from exc
        ledger_field = "already_a" if req.kind is AugmentationType.A else "already_b"
        state = dataclasses.replace(state, document=doc,
                                    **{ledger_field: state.ledger(req.kind) | {req.frame_id}})
        if on_caption is not None:
            on_caption(req, ref, prompt, text)
    return state


@dataclass
class RunTrace:
    video_id: str
    question: str
    options: list[str]
    config: dict
    events: list[dict] = field(default_factory=list)
    calls: Counter = field(default_factory=Counter)
    rounds: int = 0
    status: str = "error"
    answer: AnswerRecord | None = None
    error: str | None = None

    def to_json(self) -> dict:
        return {
            "trace": TRACE_TAG,
            "video_id": self.video_id,
            "question": self.question,
            "options": list(self.options),
            "config": self.config,
            "events": self.events,
            "calls": {role: self.calls[role] for role in sorted(self.calls)},
            "rounds": self.rounds,
            "status": self.status,
            "answer": self.answer.to_json() if self.answer else None,
            "error": self.error,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False) + "\n"


class _CountingEmbedder:
    def __init__(self, inner, calls: Counter):
        self.inner, self.calls = inner, calls

    def embed(self, texts):
        self.calls["embed"] += 1
        return self.inner.embed(texts)


def outcome_json(role: str, completion: str, letters: str = "ABCDE") -> dict:
    """What the current parser makes of a completion, in trace form."""
    try:
        if role == "plan":
            return parse_verdict(completion).to_json()
        if role == "interact":
            return {"requests": [r.to_json() for r in parse_requests(completion)]}
        return parse_answer(completion, letters).to_json()
    except (DrDocError, ValueError) as exc:
        return {"error": type(exc).__name__}


def run(doc: VideoDocument, question: str, options: Sequence[str], config: RunConfig,
        backends: Backends, embedding_cache: EmbeddingCache | None = None
        ) -> tuple[AnswerRecord | None, RunTrace]:
    if len(options) != config.option_count:
        raise ValueError(f"expected {config.option_count} options, got {len(options)}")
    letters = option_letters(len(options))
    trace = RunTrace(doc.video_id, question, list(options), config.to_json())
    clock = time.perf_counter
    step = 0

    def record(event: dict, started: float | None = None):
        if config.record_timings and started is not None:
            event["seconds"] = round(clock() - started, 6)
        trace.events.append(event)

    def on_call(role, messages, completion):
        trace.calls[role] += 1
        record({"event": "chat", "role": role, "step": step,
                "messages": [m.to_wire() for m in messages], "completion": completion,
                "parsed": outcome_json(role, completion, letters)})

    def on_caption(req, ref, prompt, text):
        trace.calls["caption"] += 1
        record({"event": "augment", "step": step, "frame_id": req.frame_id, "kind": req.kind.value,
                "frame_ref": ref, "prompt": prompt, "text": text})

    agent_kw = dict(include_subtitles=config.include_subtitles, retries=config.parse_retries,
                    on_call=on_call)
    state = None
    try:
        t0 = clock()
        embedder = _CountingEmbedder(backends.embedder, trace.calls)
        frames = embed_frames(doc, embedder, embedding_cache)
        hits = retrieve_topk(question, frames, config.k, embedder)
        record({"event": "retrieve", "k": config.k, "ranked": hits.to_json()["ranked"]}, t0)
        topk = tuple(hits.ids)

        state = LoopState(0, (MemoryEntry("initial_topk", topk, 0),), doc, topk)
        if AugmentationType.B in config.augment_types:
            initial = [AugmentationRequest(fid, AugmentationType.B) for fid in topk]
            state = apply_requests(state, initial, backends.captioner, question,
                                   prompt_for=lambda req: initial_augment_prompt(question),
                                   on_caption=on_caption)

        while True:
            step = state.iteration
            verdict = plan(state.document, question, state.memory, backends.llm, **agent_kw)
            record({"event": "verdict", "step": step, **verdict.to_json()})
            if verdict.sufficient:
                trace.status = "answered"
                break
            memory = state.memory + (MemoryEntry("planner_explanation", verdict.explanation, step),)
            state = dataclasses.replace(state, memory=memory)
            if state.iteration >= config.max_rounds:
                trace.status = "budget_exhausted"
                break
            requests = find_missing(state.document, question, state.memory, state.already_a,
                                    state.already_b, state.topk, config.k, backends.llm,
                                    allowed_kinds=config.augment_types, **agent_kw)
            record({"event": "requests", "step": step, "requests": [r.to_json() for r in requests]})
            memory = state.memory + (MemoryEntry(
                "requested_frames", tuple((r.frame_id, r.kind.value) for r in requests), step),)
            state = dataclasses.replace(state, memory=memory, iteration=state.iteration + 1)
            step = state.iteration
            state = apply_requests(state, requests, backends.captioner, question, on_caption=on_caption)

        trace.rounds = state.iteration
        step = state.iteration
        result = answer(state.document, question, options, backends.llm, **agent_kw)
        record({"event": "answer", "step": step, **result.to_json()})
        trace.answer = result
        return result, trace
    except PartialAugmentation as exc:
        state = exc.state
        return _fail(trace, state, exc)
    except DrDocError as exc:
        return _fail(trace, state, exc)


def _fail(trace: RunTrace, state: LoopState | None, exc: Exception):
    trace.status = "error"
    trace.error = f"{type(exc).__name__}: {exc}"
    if state is not None:
        trace.rounds = state.iteration
    return None, trace
