from .agents import PARSE_RETRIES, answer, find_missing, plan, validate_requests
from .parsing import (
    AgentVerdict,
    AnswerRecord,
    AugmentationRequest,
    ParseFailure,
    extract_structured,
    parse_answer,
    parse_requests,
    parse_verdict,
)
from .prompts import (
    MemoryEntry,
    augment_prompt,
    initial_augment_prompt,
    option_letters,
    render_answering_prompt,
    render_interaction_prompt,
    render_memory,
    render_planning_prompt,
)

__all__ = [
    "PARSE_RETRIES",
    "AgentVerdict",
    "AnswerRecord",
    "AugmentationRequest",
    "MemoryEntry",
    "ParseFailure",
    "answer",
    "augment_prompt",
    "extract_structured",
    "find_missing",
    "initial_augment_prompt",
    "option_letters",
    "parse_answer",
    "parse_requests",
    "parse_verdict",
    "plan",
    "render_answering_prompt",
    "render_interaction_prompt",
    "render_memory",
    "render_planning_prompt",
    "validate_requests",
]
