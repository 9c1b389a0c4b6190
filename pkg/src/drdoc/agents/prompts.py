"""Prompt templates for the planning, interaction and answering agents.

The wording (typos included) is kept exactly as the agents were tuned on;
only frame counts, video length, option count and the content slots vary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from ..docmodel import AugmentationType, DocumentText

LETTERS = "ABCDEF"
_NUMBER_WORDS = {2: "two", 3: "three", 4: "four", 5: "five", 6: "six"}


@dataclass(frozen=True)
class MemoryEntry:
    kind: str  # initial_topk | planner_explanation | requested_frames
    payload: tuple
    step: int

    KINDS = ("initial_topk", "planner_explanation", "requested_frames")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown memory kind {self.kind!r}")
        object.__setattr__(self, "payload", tuple(self.payload))

    def describe(self) -> str:
        if self.kind == "initial_topk":
            return "retrieved key frames: " + ", ".join(str(i) for i in self.payload)
        if self.kind == "planner_explanation":
            return "planner analysis: " + " ".join(self.payload)
        return "requested frames: " + ", ".join(f"{fid} ({kind})" for fid, kind in self.payload)

    def to_json(self) -> dict:
        payload = [list(p) if isinstance(p, tuple) else p for p in self.payload]
        return {"kind": self.kind, "payload": payload, "step": self.step}


def render_memory(memory: Sequence[MemoryEntry]) -> str:
    if not memory:
        return "{}"
    return "\n".join(f"{n}. [step {m.step}] {m.describe()}" for n, m in enumerate(memory, start=1))


def _minutes(total_frames: int, fps: float) -> str:
    return f"{total_frames / fps / 60:g}"


def _preamble(total_frames: int, fps: float, view: str = "first-person view") -> str:
    return (
        f"You are given some language descriptions of a {view} video along with a question about the video.\n"
        "\n"
        f"1.The video is {_minutes(total_frames, fps)} minutes long, containing a total of {total_frames} frames.\n"
        "\n"
        "2. Each sentence in these language descriptions represents the text description for a single frame.\n"
        "\n"
        "3. The format of each sentence is {frame id, description}. The frame id indicates the temporal "
        f"position of the frame, ranging from 1 to {total_frames}.\n"
    )


def render_planning_prompt(doc_text: DocumentText, question: str, memory: Sequence[MemoryEntry],
                           total_frames: int, fps: float = 0.5) -> str:
    if not doc_text.lines:
        raise ValueError("planning prompt needs a non-empty document")
    return (
        _preamble(total_frames, fps)
        + "\n"
        f"Here are the original descriptions of this video: {doc_text.rendered}\n"
        "\n"
        f"Here is the question: {question}\n"
        "\n"
        f"Here is the memory: {render_memory(memory)}\n"
        "\n"
        "Your task is to determine whether these descriptions above can answer the question accurately, "
        "reasonably, and without contradiction.\n"
        "\n"
        "If your answer is yes, please give me an reasonable explanation. the output will be as follows: "
        '{"confidence": "1", "explanation": ["xxxx"]}\n'
        "\n"
        "If your answer is no, the confidence is 0, indicating the provided information is insufficient. "
        "Please give me a reasonable explanation for what frame is missing. For each frame identified as "
        "potentially relevant, provide a concise description focusing on essential visual elements(e.g., "
        "objects, humans, interactions, actions, and scenes) in the explanation. The output will be as follows: "
        '{"confidence": "0", "explanation": ["xxxx"]}\n'
        "\n"
        "You must not provide any other response or explanation.\n"
        "\n"
        '{"confidence": "0/1", "explanation": ["xxxx"]}\n'
    )


def _id_list(ids: Iterable[int]) -> str:
    ids = sorted(ids)
    return ", ".join(str(i) for i in ids) if ids else "none"


def render_interaction_prompt(doc_text: DocumentText, question: str, memory: Sequence[MemoryEntry],
                              total_frames: int, already_a: Iterable[int], already_b: Iterable[int],
                              fps: float = 0.5) -> str:
    if not doc_text.lines:
        raise ValueError("interaction prompt needs a non-empty document")
    return (
        _preamble(total_frames, fps)
        + "\n"
        f"Here are the original descriptions of this video: {doc_text.rendered}\n"
        "\n"
        f"Here are the memory: {render_memory(memory)}\n"
        "\n"
        f"To answer the following question: {question}\n"
        "\n"
        "Theses descriptions are insufficient and cannot answer this question accurately, reasonably, "
        "and without contradiction.\n"
        "\n"
        "Your task is to determine which frame needs which type of information and can answer this question "
        "accurately, reasonably, and without contradiction.\n"
        "\n"
        "The two types of information are as follows:\n"
        "\n"
        f"A: {TYPE_DESCRIPTIONS[AugmentationType.A]}\n"
        "\n"
        f"B: {TYPE_DESCRIPTIONS[AugmentationType.B]}\n"
        "\n"
        f"Please note that frame selections range from 1 to {total_frames}. "
        f"These frames ({_id_list(already_a)}) already have type A information and these frames "
        f"({_id_list(already_b)}) already have type B information, please note not to repeatedly select "
        "this type of information from these frames. Please note that the the key of frame only one number. "
        "The output must be as follows:\n"
        f'[{{"frame": "1/2/3/.../{total_frames}", "type": "A/B"}}]\n'
    )


TYPE_DESCRIPTIONS = {
    AugmentationType.A: "Given an image, get a detailed description of the image "
                        "(image caption, just like what is shown in this image?)",
    AugmentationType.B: "Given an image, get a response to the above question (visual question answering)",
}


def option_letters(count: int) -> str:
    if not 2 <= count <= len(LETTERS):
        raise ValueError(f"option count must be 2..{len(LETTERS)}, got {count}")
    return LETTERS[:count]


def _letter_choice(letters: str) -> str:
    # "A, B, C, or D"
    if len(letters) == 2:
        return f"{letters[0]} or {letters[1]}"
    return ", ".join(letters[:-1]) + ", or " + letters[-1]


def render_answering_prompt(doc_text: DocumentText, question: str, options: Sequence[str],
                            total_frames: int, fps: float = 0.5) -> str:
    letters = option_letters(len(options))
    n = len(options)
    choices = " ".join(f"{ltr}: {opt}" for ltr, opt in zip(letters, options))
    return (
        "You are individual C, with others represented as O. Your task is to answer a question related to "
        f"this video, choosing the correct option out of {_NUMBER_WORDS[n]} possible answers. "
        "You are given some language descriptions of a first person view video along with a question about "
        "the video.\n"
        "\n"
        f"1.The video is {_minutes(total_frames, fps)} minutes long, containing a total of {total_frames} frames.\n"
        "\n"
        "2. Each sentence in these language descriptions represents the text description for a single frame.\n"
        "\n"
        "3. The format of each sentence is {frame id, description}. The frame id indicates the temporal "
        f"position of the frame, ranging from 1 to {total_frames}.\n"
        "\n"
        f"Here are the descriptions of this video: {doc_text.rendered}\n"
        "\n"
        f"Please answer the following question: {question}\n"
        "\n"
        f"Here are the choices. {choices}\n"
        "\n"
        f"The question has {n} choices, labeled as {', '.join(letters)}. Please think step by step and write "
        f"the best answer index. Note your final answer must be one of the letters ({_letter_choice(letters)}), "
        "the confidence must be one of the letters (1, 2, 3), please provide a concise one-sentence "
        "explanation for your chosen answer. the output must be the following format. You must not provide "
        "any other response or explanation.\n"
        "\n"
        '{"final_answer": "xxx", "confidence": "xxx", "explaination": "xxx"}\n'
    )


# Captioner prompts used to augment a frame.
def initial_augment_prompt(question: str) -> str:
    return ("If there are factual errors in the question, provide a precise description of the image; "
            f"if not, proceed to answer the question: {question}")


def augment_prompt(kind: AugmentationType | str, question: str) -> str:
    kind = AugmentationType(kind)
    if kind is AugmentationType.A:
        return "What is shown in this image? Provide a detailed description of the image."
    return f"Answer the following question based on the image: {question}"
