"""OpenAI-compatible HTTP clients for the chat, embedding and captioning roles."""

from __future__ import annotations

import base64
import logging
import mimetypes
import os
import time
from pathlib import Path
from typing import Sequence

import requests

from ..errors import (
    BackendUnavailable,
    EmptyCaptionReturned,
    MalformedResponse,
)
from .base import BackendConfig, ChatMessage, check_messages, check_vectors

log = logging.getLogger(__name__)

_TRANSIENT_STATUS = {408, 409, 425, 429, 500, 502, 503, 504}


def _headers() -> dict:
    headers = {"Content-Type": "application/json"}
    key = os.environ.get("DRDOC_API_KEY")
    if key:
        headers["Authorization"] = f"Bearer {key}"
    return headers


def post_json(config: BackendConfig, path: str, body: dict) -> dict:
    """POST with bounded exponential-backoff retries on transient failures."""
    url = f"{config.resolved_endpoint()}/{path.lstrip('/')}"
    last_error = "no attempt made"
    for attempt in range(config.max_retries + 1):
        if attempt:
            time.sleep(config.backoff * 2 ** (attempt - 1))
        try:
            resp = requests.post(url, json=body, headers=_headers(), timeout=config.timeout)
        except (requests.ConnectionError, requests.Timeout) as exc:
            last_error = f"{type(exc).__name__}: {exc}"
            log.warning("attempt %d to %s failed: %s", attempt + 1, url, last_error)
            continue
        if resp.status_code in _TRANSIENT_STATUS:
            last_error = f"HTTP {resp.status_code}"
            log.warning("attempt %d to %s failed: %s", attempt + 1, url, last_error)
            continue
        if resp.status_code >= 400:
            raise BackendUnavailable(f"{url} answered HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()
        except ValueError:
            raise MalformedResponse(f"{url} returned non-JSON body") from None
    raise BackendUnavailable(f"{url} unavailable after {config.max_retries + 1} attempts ({last_error})")


def _completion_text(payload: dict) -> str:
    try:
        content = payload["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError):
        raise MalformedResponse("reply has no choices[0].message.content") from None
    if not isinstance(content, str):
        raise MalformedResponse("completion content is not text")
    return content


def chat(config: BackendConfig, messages: Sequence[ChatMessage]) -> str:
    check_messages(messages)
    body = {
        "model": config.model_name,
        "messages": [m.to_wire() for m in messages],
        "temperature": config.temperature,
    }
    return _completion_text(post_json(config, "chat/completions", body))


def embed(config: BackendConfig, texts: Sequence[str]) -> list[list[float]]:
    texts = list(texts)
    if any(not t for t in texts):
        raise ValueError("cannot embed empty text")
    if not texts:
        return []
    payload = post_json(config, "embeddings", {"model": config.model_name, "input": texts})
    try:
        data = sorted(payload["data"], key=lambda d: d.get("index", 0))
        vectors = [[float(x) for x in d["embedding"]] for d in data]
    except (KeyError, TypeError, ValueError):
        raise MalformedResponse("reply has no data[i].embedding") from None
    return check_vectors(vectors, len(texts))


def _image_url(ref: str) -> str:
    if ref.startswith(("http://", "https://", "data:")):
        return ref
    path = Path(ref[len("file://"):] if ref.startswith("file://") else ref)
    mime = mimetypes.guess_type(path.name)[0] or "image/jpeg"
    return f"data:{mime};base64,{base64.b64encode(path.read_bytes()).decode()}"


def caption(config: BackendConfig, frame_ref: str, prompt: str) -> str:
    """Ask a vision-language chat model about one frame image."""
    if not prompt:
        raise ValueError("caption prompt must be non-empty")
    video_id, _, frame_id = frame_ref.rpartition(":")
    ref = config.frame_ref_template.format(
        frame_ref=frame_ref, video_id=video_id, frame_id=int(frame_id) if frame_id.isdigit() else frame_id
    )
    try:
        image = _image_url(ref)
    except OSError as exc:
        raise BackendUnavailable(f"cannot read frame {ref}: {exc}") from None
    body = {
        "model": config.model_name,
        "messages": [{
            "role": "user",
            "content": [
                {"type": "text", "text": prompt},
                {"type": "image_url", "image_url": {"url": image}},
            ],
        }],
        "temperature": config.temperature,
    }
    text = _completion_text(post_json(config, "chat/completions", body)).strip()
    if not text:
        raise EmptyCaptionReturned(f"empty caption for {frame_ref}")
    return text


class HttpChatModel:
    def __init__(self, config: BackendConfig):
        self.config = config

    def chat(self, messages, role=None) -> str:
        return chat(self.config, messages)


class HttpEmbedder:
    def __init__(self, config: BackendConfig):
        self.config = config

    def embed(self, texts):
        return embed(self.config, texts)


class HttpCaptioner:
    def __init__(self, config: BackendConfig):
        self.config = config

    def caption(self, frame_ref, prompt):
        return caption(self.config, frame_ref, prompt)
