"""TOML run configuration.

::

    [run]                       # RunConfig fields
    k = 5
    max_rounds = 2
    fps = 0.5
    option_count = 5
    augment_types = ["A", "B"]
    include_subtitles = false

    [paths]                     # relative to the config file
    cache = "cache"             # document cache directory
    embeddings = "cache/embeddings.jsonl"   # optional

    [llm]                       # also [embedder] and [captioner]
    kind = "http"               # or "scripted"
    endpoint = "https://api.openai.com/v1"
    model = "gpt-4-1106-preview"
    temperature = 0.0
    max_retries = 3
    timeout = 60
    script = "script.jsonl"     # scripted kind only
    frame_ref_template = "file:///frames/{video_id}/{frame_id:05d}.jpg"   # captioner only

Credentials come from ``DRDOC_API_KEY``; ``DRDOC_ENDPOINT`` overrides every endpoint.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..backends import (
    BackendConfig,
    Backends,
    HttpCaptioner,
    HttpChatModel,
    HttpEmbedder,
    Script,
    ScriptedCaptioner,
    ScriptedChatModel,
    ScriptedEmbedder,
)
from ..pipeline import RunConfig

_RUN_KEYS = {"k", "max_rounds", "fps", "option_count", "augment_types", "include_subtitles",
             "parse_retries", "record_timings"}
_BACKEND_KEYS = {"kind", "endpoint", "model", "temperature", "max_retries", "timeout", "backoff",
                 "script", "dim", "frame_ref_template"}

DEFAULT_MODELS = {"llm": "gpt-4-1106-preview", "embedder": "text-embedding-3-small",
                  "captioner": "llava-v1.6-mistral-7b-hf"}


@dataclass
class Settings:
    run: RunConfig
    backend_sections: dict
    cache_dir: Path
    embeddings_path: Path | None
    base_dir: Path

    def backends(self) -> Backends:
        scripts: dict[Path, Script] = {}

        def script_for(section):
            path = self.base_dir / section["script"]
            if path not in scripts:
                scripts[path] = Script.load(path)
            return scripts[path]

        built = {}
        for role in ("llm", "embedder", "captioner"):
            section = self.backend_sections.get(role, {})
            kind = section.get("kind", "http")
            if kind == "scripted":
                if "script" not in section and role != "embedder":
                    raise ValueError(f"[{role}] scripted backend needs a 'script' path")
                script = script_for(section) if "script" in section else None
                built[role] = {
                    "llm": lambda: ScriptedChatModel(script),
                    "embedder": lambda: ScriptedEmbedder(script, int(section.get("dim", 64))),
                    "captioner": lambda: ScriptedCaptioner(script),
                }[role]()
            elif kind == "http":
                cfg = backend_config(role, section)
                built[role] = {"llm": HttpChatModel, "embedder": HttpEmbedder,
                               "captioner": HttpCaptioner}[role](cfg)
            else:
                raise ValueError(f"[{role}] unknown backend kind {kind!r}")
        return Backends(built["llm"], built["embedder"], built["captioner"])


def backend_config(role: str, section: dict) -> BackendConfig:
    kwargs = {"model_name": section.get("model", DEFAULT_MODELS[role])}
    for key in ("endpoint", "temperature", "max_retries", "timeout", "backoff", "frame_ref_template"):
        if key in section:
            kwargs[key] = section[key]
    return BackendConfig(**kwargs)


def parse_settings(data: dict, base_dir: Path = Path(".")) -> Settings:
    run_section = dict(data.get("run", {}))
    unknown = set(run_section) - _RUN_KEYS
    if unknown:
        raise ValueError(f"unknown [run] keys: {sorted(unknown)}")
    for role in ("llm", "embedder", "captioner"):
        extra = set(data.get(role, {})) - _BACKEND_KEYS
        if extra:
            raise ValueError(f"unknown [{role}] keys: {sorted(extra)}")
    if "augment_types" in run_section:
        run_section["augment_types"] = frozenset(run_section["augment_types"])
    paths = data.get("paths", {})
    cache = base_dir / paths.get("cache", "cache")
    emb = paths.get("embeddings")
    return Settings(
        run=RunConfig(**run_section),
        backend_sections={r: data.get(r, {}) for r in ("llm", "embedder", "captioner")},
        cache_dir=cache,
        embeddings_path=base_dir / emb if emb else None,
        base_dir=base_dir,
    )


def load_settings(path) -> Settings:
    path = Path(path)
    with path.open("rb") as fh:
        data = tomllib.load(fh)
    return parse_settings(data, path.parent)
