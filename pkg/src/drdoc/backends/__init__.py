from .base import (
    SHORT_CAPTION_PROMPT,
    BackendConfig,
    Backends,
    Captioner,
    ChatMessage,
    ChatModel,
    Embedder,
    frame_ref,
)
from .http import HttpCaptioner, HttpChatModel, HttpEmbedder, caption, chat, embed
from .scripted import (
    Script,
    ScriptedCaptioner,
    ScriptedChatModel,
    ScriptedEmbedder,
    hashed_unit_vector,
)

__all__ = [
    "SHORT_CAPTION_PROMPT",
    "BackendConfig",
    "Backends",
    "Captioner",
    "ChatMessage",
    "ChatModel",
    "Embedder",
    "HttpCaptioner",
    "HttpChatModel",
    "HttpEmbedder",
    "Script",
    "ScriptedCaptioner",
    "ScriptedChatModel",
    "ScriptedEmbedder",
    "caption",
    "chat",
    "embed",
    "frame_ref",
    "hashed_unit_vector",
    "scripted_backends",
]


def scripted_backends(script: Script, dim: int = 64) -> Backends:
    return Backends(ScriptedChatModel(script), ScriptedEmbedder(script, dim), ScriptedCaptioner(script))
