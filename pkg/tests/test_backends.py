import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from drdoc.backends import (
    BackendConfig,
    ChatMessage,
    HttpCaptioner,
    Script,
    ScriptedCaptioner,
    ScriptedChatModel,
    ScriptedEmbedder,
    caption,
    chat,
    embed,
    hashed_unit_vector,
)
from drdoc.errors import (
    BackendUnavailable,
    DimensionMismatch,
    EmptyCaptionReturned,
    MalformedResponse,
    ScriptExhausted,
)


class Stub:
    """Tiny OpenAI-compatible server; ``replies`` is consumed one per request."""

    def __init__(self, replies):
        self.replies = list(replies)
        self.requests = []
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
                stub.requests.append({"path": self.path, "body": body,
                                      "auth": self.headers.get("Authorization")})
                status, payload = stub.replies.pop(0) if len(stub.replies) > 1 else stub.replies[0]
                data = json.dumps(payload).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args):
                pass

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)

    @property
    def config(self):
        return BackendConfig(endpoint=f"http://127.0.0.1:{self.server.server_port}/v1",
                             model_name="stub-model", max_retries=2, backoff=0.0, timeout=5)

    def __enter__(self):
        self.thread.start()
        return self

    def __exit__(self, *exc):
        self.server.shutdown()
        self.server.server_close()


def completion(text):
    return 200, {"choices": [{"message": {"role": "assistant", "content": text}}]}


USER = [ChatMessage("user", "hello")]


# --- HTTP -----------------------------------------------------------------------

def test_http_chat_returns_completion_and_sends_wire_format(monkeypatch):
    monkeypatch.setenv("DRDOC_API_KEY", "sekret")
    monkeypatch.delenv("DRDOC_ENDPOINT", raising=False)
    with Stub([completion("fixed reply")]) as stub:
        cfg = stub.config
        assert chat(cfg, USER) == "fixed reply"
    req = stub.requests[0]
    assert req["path"] == "/v1/chat/completions"
    assert req["body"] == {"model": "stub-model", "messages": [{"role": "user", "content": "hello"}],
                           "temperature": 0.0}
    assert req["auth"] == "Bearer sekret"


def test_http_chat_sends_configured_temperature():
    with Stub([completion("x")]) as stub:
        cfg = BackendConfig(**{**stub.config.__dict__, "temperature": 0.7})
        chat(cfg, USER)
    assert stub.requests[0]["body"]["temperature"] == 0.7


def test_http_retry_exhaustion():
    with Stub([(500, {"error": "boom"})]) as stub:
        with pytest.raises(BackendUnavailable):
            chat(stub.config, USER)
    assert len(stub.requests) == 3  # first try + max_retries=2


def test_http_recovers_after_transient_failure():
    with Stub([(503, {}), completion("ok")]) as stub:
        assert chat(stub.config, USER) == "ok"
    assert len(stub.requests) == 2


def test_http_malformed_reply():
    with Stub([(200, {"choices": []})]) as stub:
        with pytest.raises(MalformedResponse):
            chat(stub.config, USER)


def test_http_unreachable_endpoint():
    cfg = BackendConfig(endpoint="http://127.0.0.1:9/v1", max_retries=1, backoff=0.0, timeout=1)
    with pytest.raises(BackendUnavailable):
        chat(cfg, USER)


def test_endpoint_env_override(monkeypatch):
    with Stub([completion("via env")]) as stub:
        monkeypatch.setenv("DRDOC_ENDPOINT", stub.config.endpoint)
        cfg = BackendConfig(endpoint="http://127.0.0.1:9/nowhere", max_retries=0)
        assert chat(cfg, USER) == "via env"


def test_http_embed_orders_by_index():
    payload = {"data": [{"index": 1, "embedding": [0.0, 1.0]}, {"index": 0, "embedding": [1.0, 0.0]}]}
    with Stub([(200, payload)]) as stub:
        assert embed(stub.config, ["a", "b"]) == [[1.0, 0.0], [0.0, 1.0]]
    assert stub.requests[0]["path"] == "/v1/embeddings"
    assert stub.requests[0]["body"] == {"model": "stub-model", "input": ["a", "b"]}


def test_http_embed_ragged():
    payload = {"data": [{"index": 0, "embedding": [1.0, 0.0]}, {"index": 1, "embedding": [1.0]}]}
    with Stub([(200, payload)]) as stub:
        with pytest.raises(DimensionMismatch):
            embed(stub.config, ["a", "b"])


def test_http_caption_sends_image_and_prompt():
    with Stub([completion("  a kitchen sink  ")]) as stub:
        cfg = BackendConfig(**{**stub.config.__dict__,
                               "frame_ref_template": "https://frames.example/{video_id}/{frame_id:04d}.jpg"})
        assert HttpCaptioner(cfg).caption("vid7:12", "describe the picture") == "a kitchen sink"
    content = stub.requests[0]["body"]["messages"][0]["content"]
    assert content[0] == {"type": "text", "text": "describe the picture"}
    assert content[1]["image_url"]["url"] == "https://frames.example/vid7/0012.jpg"


def test_http_caption_empty_reply():
    with Stub([completion("   ")]) as stub:
        cfg = BackendConfig(**{**stub.config.__dict__, "frame_ref_template": "https://x/{frame_id}.jpg"})
        with pytest.raises(EmptyCaptionReturned):
            caption(cfg, "v:1", "describe")


def test_chat_preconditions():
    with pytest.raises(ValueError):
        ChatMessage("user", "")
    with pytest.raises(ValueError):
        ChatMessage("robot", "hi")
    with pytest.raises(ValueError):
        chat(BackendConfig(), [])
    with pytest.raises(ValueError):
        chat(BackendConfig(), [ChatMessage("assistant", "hi")])
    with pytest.raises(ValueError):
        BackendConfig(temperature=-1)


# --- scripted ---------------------------------------------------------------------

def test_scripted_chat_replays_queue_then_exhausts():
    script = Script().add("plan", '{"confidence":"1","explanation":["x"]}').add("plan", "second")
    llm = ScriptedChatModel(script)
    assert llm.chat(USER, role="plan") == '{"confidence":"1","explanation":["x"]}'
    assert llm.chat(USER, role="plan") == "second"
    with pytest.raises(ScriptExhausted):
        llm.chat(USER, role="plan")


def test_scripted_rules_take_precedence_and_persist():
    script = Script().add("answer", "queued").add("answer", {"final_answer": "B"}, key=r"red box")
    llm = ScriptedChatModel(script)
    assert llm.chat([ChatMessage("user", "what is in the red box?")], role="answer") == '{"final_answer": "B"}'
    assert llm.chat([ChatMessage("user", "the red box again")], role="answer") == '{"final_answer": "B"}'
    assert llm.chat(USER, role="answer") == "queued"


def test_script_jsonl_round_trip():
    script = Script().add("plan", "a").add("caption", "cap", key="v:1", match="detail").add("embed", [1, 0], key="t")
    again = Script.from_jsonl(script.to_jsonl())
    assert again.entries == script.entries


def test_scripted_embedder_deterministic_unit_vectors():
    emb = ScriptedEmbedder(dim=16)
    a1, b = emb.embed(["a", "b"])
    (a2,) = emb.embed(["a"])
    assert a1 == a2 and a1 != b
    assert len(a1) == len(b) == 16
    assert abs(sum(x * x for x in a1) - 1.0) < 1e-12
    assert hashed_unit_vector("a", 16) == a1


def test_scripted_embedder_explicit_vectors_and_ragged():
    script = Script().add("embed", [1.0, 0.0], key="x").add("embed", [1.0], key="y")
    emb = ScriptedEmbedder(script)
    assert emb.embed(["x"]) == [[1.0, 0.0]]
    with pytest.raises(DimensionMismatch):
        emb.embed(["x", "y"])


def test_scripted_captioner_keys_and_fallbacks():
    script = (Script()
              .add("caption", "C opens the fridge", key="v1:3")
              .add("caption", "a detailed fridge interior", key="v1:3", match="factual errors"))
    cap = ScriptedCaptioner(script)
    assert cap.caption("v1:3", "describe the picture in no more than 50 words") == "C opens the fridge"
    # first matching keyed entry wins, in file order
    assert cap.caption("v1:3", "If there are factual errors in the question ...") == "C opens the fridge"
    with pytest.raises(EmptyCaptionReturned):
        cap.caption("v1:4", "describe")


def test_scripted_captioner_match_routes_by_prompt():
    script = (Script()
              .add("caption", "precise fridge description", key="v1:3", match="factual errors")
              .add("caption", "C opens the fridge", key="v1:3")
              .add("caption", "generic frame"))
    cap = ScriptedCaptioner(script)
    assert cap.caption("v1:3", "If there are factual errors in the question, provide ...") \
        == "precise fridge description"
    assert cap.caption("v1:3", "describe the picture") == "C opens the fridge"
    assert cap.caption("v1:99", "describe the picture") == "generic frame"
