import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from benchevo.llm import (
    AuthError,
    ChatRequest,
    ChatResponse,
    DigestMismatch,
    HttpChatClient,
    ProviderConfig,
    ProviderRefusal,
    RateLimited,
    ReplaySession,
    SessionExhausted,
    SessionRecorder,
    TransportError,
    replay_chat,
    request_digest,
)


def ok_body(text, prompt_tokens=7):
    return {
        "choices": [{"message": {"role": "assistant", "content": text}}],
        "usage": {"prompt_tokens": prompt_tokens, "completion_tokens": 3},
    }


class StubState:
    def __init__(self, script):
        self.script = list(script)
        self.seen = []
        self.lock = threading.Lock()


class StubHandler(BaseHTTPRequestHandler):
    state: StubState = None

    def do_POST(self):
        length = int(self.headers.get("Content-Length", "0"))
        body = json.loads(self.rfile.read(length)) if length else None
        with self.state.lock:
            self.state.seen.append(
                {"body": body, "auth": self.headers.get("Authorization")}
            )
            status, payload = self.state.script.pop(0)
        raw = payload if isinstance(payload, bytes) else json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(raw)))
        self.end_headers()
        self.wfile.write(raw)

    def log_message(self, *args):
        pass


@pytest.fixture
def stub_server():
    servers = []

    def start(script):
        state = StubState(script)
        handler = type("Handler", (StubHandler,), {"state": state})
        server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        servers.append(server)
        url = f"http://127.0.0.1:{server.server_address[1]}/v1/chat/completions"
        return url, state

    yield start
    for server in servers:
        server.shutdown()
        server.server_close()


def provider(url, **kw):
    defaults = dict(
        name="stub",
        endpoint_url=url,
        model="stub-model",
        api_key_env="STUB_LLM_KEY",
        timeout_s=5.0,
        max_retries=3,
    )
    defaults.update(kw)
    return ProviderConfig(**defaults)


def request(content="say hi"):
    return ChatRequest(model="stub-model", messages=(("user", content),))


@pytest.fixture
def api_key(monkeypatch):
    monkeypatch.setenv("STUB_LLM_KEY", "sk-test-123")


class TestChatRequest:
    def test_requires_messages(self):
        with pytest.raises(ValueError):
            ChatRequest(model="m", messages=())

    def test_rejects_unknown_role(self):
        with pytest.raises(ValueError):
            ChatRequest(model="m", messages=(("operator", "hi"),))


class TestHttpChat:
    def test_returns_stub_text(self, stub_server, api_key):
        url, state = stub_server([(200, ok_body("hello back"))])
        client = HttpChatClient(provider(url))
        resp = client.chat(request())
        assert resp.text == "hello back"
        assert resp.usage["prompt_tokens"] == 7
        assert resp.provider_meta["retries"] == 0

    def test_sends_bearer_key_and_payload(self, stub_server, api_key):
        url, state = stub_server([(200, ok_body("x"))])
        HttpChatClient(provider(url)).chat(request("ping"))
        sent = state.seen[0]
        assert sent["auth"] == "Bearer sk-test-123"
        assert sent["body"]["model"] == "stub-model"
        assert sent["body"]["messages"] == [{"role": "user", "content": "ping"}]

    def test_retries_through_429(self, stub_server, api_key):
        url, state = stub_server(
            [(429, {"error": "slow down"}), (429, {"error": "slow down"}), (200, ok_body("ok"))]
        )
        delays = []
        client = HttpChatClient(provider(url), sleep=delays.append)
        resp = client.chat(request())
        assert resp.text == "ok"
        assert resp.provider_meta["retries"] == 2
        assert len(state.seen) == 3
        assert delays == sorted(delays) and len(delays) == 2

    def test_retries_through_500(self, stub_server, api_key):
        url, _ = stub_server([(500, {"error": "boom"}), (200, ok_body("ok"))])
        client = HttpChatClient(provider(url), sleep=lambda s: None)
        assert client.chat(request()).text == "ok"

    def test_rate_limit_exhausts(self, stub_server, api_key):
        url, state = stub_server([(429, {})] * 4)
        client = HttpChatClient(provider(url, max_retries=3), sleep=lambda s: None)
        with pytest.raises(RateLimited):
            client.chat(request())
        assert len(state.seen) == 4

    def test_backoff_grows_and_is_capped(self, stub_server, api_key):
        url, _ = stub_server([(500, {})] * 8)
        delays = []
        client = HttpChatClient(provider(url, max_retries=7), sleep=delays.append)
        with pytest.raises(TransportError):
            client.chat(request())
        assert delays[0] < delays[1] < delays[2]
        assert max(delays) <= 8.0

    def test_connection_refused_is_transport_error(self, api_key):
        client = HttpChatClient(
            provider("http://127.0.0.1:9/none", max_retries=1), sleep=lambda s: None
        )
        with pytest.raises(TransportError):
            client.chat(request())

    def test_missing_key_fails_before_network(self, stub_server, monkeypatch):
        monkeypatch.delenv("STUB_LLM_KEY", raising=False)
        url, state = stub_server([(200, ok_body("never"))])
        with pytest.raises(AuthError):
            HttpChatClient(provider(url)).chat(request())
        assert state.seen == []

    def test_denied_credentials(self, stub_server, api_key):
        url, _ = stub_server([(401, {"error": "bad key"})])
        with pytest.raises(AuthError):
            HttpChatClient(provider(url)).chat(request())

    def test_empty_content_is_refusal(self, stub_server, api_key):
        url, _ = stub_server([(200, ok_body(""))])
        with pytest.raises(ProviderRefusal):
            HttpChatClient(provider(url)).chat(request())

    def test_bodyless_choices_is_refusal(self, stub_server, api_key):
        url, _ = stub_server([(200, {"choices": []})])
        with pytest.raises(ProviderRefusal):
            HttpChatClient(provider(url)).chat(request())

    def test_garbled_body_is_transport_error(self, stub_server, api_key):
        url, _ = stub_server([(200, b"not json at all")])
        with pytest.raises(TransportError):
            HttpChatClient(provider(url)).chat(request())


class TestDigest:
    def test_stable_across_equal_requests(self):
        a = request_digest(request("same"))
        b = request_digest(ChatRequest(model="stub-model", messages=(("user", "same"),)))
        assert a == b and len(a) == 64

    def test_sensitive_to_content(self):
        assert request_digest(request("a")) != request_digest(request("b"))


class TestRecordReplay:
    def test_record_then_replay_reproduces_texts(self, stub_server, api_key, tmp_path):
        url, _ = stub_server([(200, ok_body("first")), (200, ok_body("second"))])
        record_path = tmp_path / "session.jsonl"
        client = HttpChatClient(provider(url), recorder=SessionRecorder(record_path))
        live = [client.chat(request("one")), client.chat(request("two"))]

        session = ReplaySession.load(record_path)
        replayed = [session.chat(request("one")), session.chat(request("two"))]
        assert [r.text for r in replayed] == [r.text for r in live]
        assert replayed[0].usage == live[0].usage

    def test_record_format(self, stub_server, api_key, tmp_path):
        url, _ = stub_server([(200, ok_body("x"))])
        record_path = tmp_path / "session.jsonl"
        HttpChatClient(provider(url), recorder=SessionRecorder(record_path)).chat(
            request("one")
        )
        rows = [json.loads(l) for l in record_path.read_text().splitlines()]
        assert set(rows[0]) == {"request_digest", "response_text", "usage"}
        assert rows[0]["request_digest"] == request_digest(request("one"))

    def test_replay_in_recorded_order(self):
        session = ReplaySession.from_texts(["a", "b", "c"])
        texts = [replay_chat(session, request()).text for _ in range(3)]
        assert texts == ["a", "b", "c"]

    def test_exhausted_session(self):
        session = ReplaySession.from_texts(["only"])
        replay_chat(session, request())
        with pytest.raises(SessionExhausted):
            replay_chat(session, request())

    def test_strict_mode_catches_altered_prompt(self, tmp_path):
        rows = [
            {
                "request_digest": request_digest(request("original")),
                "response_text": "r",
                "usage": None,
            }
        ]
        path = tmp_path / "s.jsonl"
        path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        session = ReplaySession.load(path, strict=True)
        with pytest.raises(DigestMismatch):
            session.chat(request("tampered"))

    def test_non_strict_skips_digest_check(self, tmp_path):
        rows = [{"request_digest": "0" * 64, "response_text": "r", "usage": None}]
        path = tmp_path / "s.jsonl"
        path.write_text(json.dumps(rows[0]) + "\n")
        session = ReplaySession.load(path, strict=False)
        assert session.chat(request("anything")).text == "r"

    def test_scripted_rows_skip_check_even_in_strict(self):
        session = ReplaySession.from_texts(["r"])
        session.strict = True
        assert session.chat(request("whatever")).text == "r"

    def test_response_meta_reports_replay(self):
        session = ReplaySession.from_texts(["r"])
        resp = session.chat(request())
        assert resp.provider_meta == {"replayed": True, "index": 0}
        assert isinstance(resp, ChatResponse)
