from .cache import (
    ManifestEntry,
    PrecaptionResult,
    align_subtitles,
    load_cached,
    load_manifest,
    load_subtitles,
    precaption,
    precaption_video,
)
from .config import Settings, load_settings, parse_settings
from .dataset import QAItem, load_dataset, parse_item
from .evaluate import EvalReport, ItemResult, evaluate, run_item

__all__ = [
    "EvalReport",
    "ItemResult",
    "ManifestEntry",
    "PrecaptionResult",
    "QAItem",
    "Settings",
    "align_subtitles",
    "evaluate",
    "load_cached",
    "load_dataset",
    "load_manifest",
    "load_settings",
    "load_subtitles",
    "parse_item",
    "parse_settings",
    "precaption",
    "precaption_video",
    "run_item",
]
