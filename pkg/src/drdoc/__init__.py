"""Long-video question answering as long-document retrieval and agent reasoning."""

from .docmodel import (
    AugmentationType,
    DocumentText,
    FrameRecord,
    VideoDocument,
    augmented_ids,
    load,
    merge_augmentation,
    new_document,
    render,
    sample_count,
    save,
)
from .pipeline import LoopState, RunConfig, RunTrace, apply_requests, run

__version__ = "0.1.0"

__all__ = [
    "AugmentationType",
    "DocumentText",
    "FrameRecord",
    "LoopState",
    "RunConfig",
    "RunTrace",
    "VideoDocument",
    "apply_requests",
    "augmented_ids",
    "load",
    "merge_augmentation",
    "new_document",
    "render",
    "run",
    "sample_count",
    "save",
]
