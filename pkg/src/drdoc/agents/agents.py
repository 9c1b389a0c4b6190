"""Planning, interaction and answering agents on top of a chat model."""

from __future__ import annotations

from typing import Callable, Collection, Iterable, Sequence

from ..backends.base import ChatMessage
from ..docmodel import AugmentationType, VideoDocument, augmented_ids, render
from ..errors import (
    InvalidLetter,
    NoStructureFound,
    UnparseableAnswer,
    UnparseableRequests,
    UnparseableVerdict,
)
from .parsing import (
    AgentVerdict,
    AnswerRecord,
    AugmentationRequest,
    ParseFailure,
    parse_answer,
    parse_requests,
    parse_verdict,
)
from .prompts import (
    MemoryEntry,
    option_letters,
    render_answering_prompt,
    render_interaction_prompt,
    render_planning_prompt,
)

PARSE_RETRIES = 2

# on_call(role, messages, completion) is invoked after every chat round trip
CallHook = Callable[[str, Sequence[ChatMessage], str], None]

_VERDICT_FIX = ('Your previous reply did not follow the required output format. Reply with only '
                '{"confidence": "0/1", "explanation": ["xxxx"]}')
_REQUEST_FIX = ('Your previous reply did not follow the required output format. Reply with only '
                '[{"frame": "<frame id>", "type": "A/B"}]')


def _ask(llm, role: str, messages: list[ChatMessage], on_call: CallHook | None) -> str:
    completion = llm.chat(messages, role=role)
    if on_call is not None:
        on_call(role, list(messages), completion)
    return completion


def _with_correction(messages, completion: str, correction: str) -> list[ChatMessage]:
    turns = list(messages)
    if completion:
        turns.append(ChatMessage("assistant", completion))
    turns.append(ChatMessage("user", correction))
    return turns


def _ask_and_parse(llm, role, prompt, parse, correction, error_cls, retries, on_call):
    messages = [ChatMessage("user", prompt)]
    for attempt in range(retries + 1):
        completion = _ask(llm, role, messages, on_call)
        try:
            return parse(completion)
        except (ParseFailure, NoStructureFound) as exc:
            last = exc
            messages = _with_correction(messages[:1], completion, correction)
    raise error_cls(f"{role} reply unparseable after {retries + 1} attempts: {last}")


def plan(doc: VideoDocument, question: str, memory: Sequence[MemoryEntry], llm, *,
         include_subtitles: bool = False, retries: int = PARSE_RETRIES,
         on_call: CallHook | None = None) -> AgentVerdict:
    prompt = render_planning_prompt(render(doc, include_subtitles), question, memory,
                                    doc.total_frames, doc.fps)
    return _ask_and_parse(llm, "plan", prompt, parse_verdict, _VERDICT_FIX,
                          UnparseableVerdict, retries, on_call)


def validate_requests(requests: Iterable[AugmentationRequest], total_frames: int,
                      already_a: Collection[int], already_b: Collection[int], k: int,
                      allowed_kinds: Collection[AugmentationType] = tuple(AugmentationType)
                      ) -> list[AugmentationRequest]:
    """Keep requests that name a real frame and a type it lacks; at most k-1, in agent order."""
    have = {AugmentationType.A: set(already_a), AugmentationType.B: set(already_b)}
    kept: list[AugmentationRequest] = []
    for req in requests:
        if len(kept) >= k - 1:
            break
        if not 1 <= req.frame_id <= total_frames:
            continue
        if req.kind not in allowed_kinds or req.frame_id in have[req.kind]:
            continue
        have[req.kind].add(req.frame_id)  # also drops repeats within one reply
        kept.append(req)
    return kept


def find_missing(doc: VideoDocument, question: str, memory: Sequence[MemoryEntry],
                 already_a: Collection[int], already_b: Collection[int], topk: Collection[int],
                 k: int, llm, *, allowed_kinds: Collection[AugmentationType] = tuple(AugmentationType),
                 include_subtitles: bool = False, retries: int = PARSE_RETRIES,
                 on_call: CallHook | None = None) -> list[AugmentationRequest]:
    # top-k frames are not banned outright: their initial augmentation sits in
    # the type B ledger, so only a repeat of that type is dropped
    already_a = set(already_a) | augmented_ids(doc, AugmentationType.A)
    already_b = set(already_b) | augmented_ids(doc, AugmentationType.B)
    prompt = render_interaction_prompt(render(doc, include_subtitles), question, memory,
                                       doc.total_frames, already_a, already_b, doc.fps)
    raw = _ask_and_parse(llm, "interact", prompt, parse_requests, _REQUEST_FIX,
                         UnparseableRequests, retries, on_call)
    return validate_requests(raw, doc.total_frames, already_a, already_b, k, allowed_kinds)


def answer(doc: VideoDocument, question: str, options: Sequence[str], llm, *,
           include_subtitles: bool = False, retries: int = PARSE_RETRIES,
           on_call: CallHook | None = None) -> AnswerRecord:
    letters = option_letters(len(options))
    prompt = render_answering_prompt(render(doc, include_subtitles), question, options,
                                     doc.total_frames, doc.fps)
    fmt = '{"final_answer": "xxx", "confidence": "xxx", "explaination": "xxx"}'
    first = [ChatMessage("user", prompt)]
    messages = first
    parse_left, letter_left = retries, 1
    while True:
        completion = _ask(llm, "answer", messages, on_call)
        try:
            return parse_answer(completion, letters)
        except InvalidLetter:
            if letter_left == 0:
                raise
            letter_left -= 1
            fix = (f"Your final answer must be one of the letters ({', '.join(letters)}). "
                   f"Reply with only {fmt}")
        except (ParseFailure, NoStructureFound) as exc:
            if parse_left == 0:
                raise UnparseableAnswer(f"answer reply unparseable: {exc}") from None
            parse_left -= 1
            fix = f"Your previous reply did not follow the required output format. Reply with only {fmt}"
        messages = _with_correction(first, completion, fix)
