import json
import threading
import time

import httpx
import pytest

from founder_success.llm_gateway import (
    AuthError,
    CacheStore,
    ConfigError,
    Gateway,
    HttpBackend,
    LlmError,
    LlmRequest,
    MockBackend,
    MockMissError,
    ProviderResponseError,
    RateLimitError,
    TransientError,
    prompt_fingerprint,
)


def ok_body(text="L9"):
    return {"choices": [{"message": {"role": "assistant", "content": text}}]}


def http_backend(handler, **kw):
    client = httpx.Client(transport=httpx.MockTransport(handler))
    return HttpBackend(endpoint="https://llm.test/v1/chat", api_key="k-test", client=client, **kw)


class Sleeps(list):
    def __call__(self, s):
        self.append(s)


def test_mock_echo():
    gw = Gateway(MockBackend.from_prompts({"P": "L9"}))
    r = gw.complete(LlmRequest("P"))
    assert (r.text, r.backend) == ("L9", "mock")


def test_mock_founder_header_lookup():
    mb = MockBackend(by_founder={("f1", "level"): "L4"})
    assert mb.complete(LlmRequest("# founder_id: f1\nwhatever", stage="level")) == "L4"
    with pytest.raises(MockMissError):
        mb.complete(LlmRequest("# founder_id: f1\nwhatever", stage="flags"))


def test_mock_from_files(tmp_path):
    p = tmp_path / "fx.jsonl"
    p.write_text(
        json.dumps({"fingerprint": prompt_fingerprint("hello"), "completion": "[A]"})
        + "\n\n"
        + json.dumps({"founder_id": "z", "stage": "summary", "completion": "S"})
        + "\n"
    )
    mb = MockBackend.from_files([p])
    assert mb.complete(LlmRequest("hello")) == "[A]"
    assert mb.complete(LlmRequest("# founder_id: z", stage="summary")) == "S"


def test_request_validation_and_key():
    with pytest.raises(ValueError):
        LlmRequest("")
    with pytest.raises(ValueError):
        LlmRequest("p", temperature=-1)
    a, b = LlmRequest("p"), LlmRequest("p", temperature=0.7)
    assert a.cache_key != b.cache_key
    assert a.cache_key == LlmRequest("p", stage="other").cache_key
    assert a.cache_key != LlmRequest("p", model_id="other").cache_key


def test_cache_roundtrip(tmp_path):
    store = CacheStore(tmp_path / "cache" / "llm.jsonl")
    gw = Gateway(MockBackend.from_prompts({"P": "L9"}), cache=store)
    first = gw.complete(LlmRequest("P"))
    second = gw.complete(LlmRequest("P"))
    assert first.backend == "mock" and second.backend == "cache"
    assert first.text == second.text
    assert len(store) == 1 and gw.backend_calls == 1
    reopened = CacheStore(tmp_path / "cache" / "llm.jsonl")
    assert reopened.get(LlmRequest("P").cache_key) == "L9"


def test_cached_complete_distinct_temperatures(tmp_path):
    store = CacheStore(tmp_path / "c.jsonl")
    gw = Gateway(MockBackend(fallback=lambda r: f"t={r.temperature}"))
    gw.cached_complete(LlmRequest("P", temperature=0.0), store)
    gw.cached_complete(LlmRequest("P", temperature=0.5), store)
    assert len(store) == 2
    assert len((tmp_path / "c.jsonl").read_text().splitlines()) == 2


def test_cache_tolerates_corrupt_lines(tmp_path):
    p = tmp_path / "c.jsonl"
    good = {"key": LlmRequest("P").cache_key, "response_text": "x"}
    p.write_text("not json\n" + json.dumps(good) + "\n{\"key\": 1}\n")
    assert CacheStore(p).get(good["key"]) == "x"


def test_cache_write_failure_degrades(tmp_path, caplog):
    blocker = tmp_path / "file"
    blocker.write_text("")
    store = CacheStore(blocker / "sub" / "llm.jsonl")  # parent is a regular file
    gw = Gateway(MockBackend.from_prompts({"P": "ok"}), cache=store)
    assert gw.complete(LlmRequest("P")).text == "ok"
    assert "cache write failed" in caplog.text


def test_http_success_wire_format():
    seen = {}

    def handler(request: httpx.Request):
        seen["auth"] = request.headers["authorization"]
        seen["body"] = json.loads(request.content)
        return httpx.Response(200, json=ok_body("L3"))

    gw = Gateway(http_backend(handler))
    r = gw.complete(LlmRequest("prompt text", model_id="m1", temperature=0.0))
    assert r.text == "L3" and r.backend == "live"
    assert seen["auth"] == "Bearer k-test"
    assert seen["body"]["model"] == "m1"
    assert seen["body"]["messages"] == [{"role": "user", "content": "prompt text"}]
    assert seen["body"]["temperature"] == 0.0


def test_prompt_reaches_backend_unmodified():
    prompt = "  weird\r\n{braces} ’unicode’\n\n"
    got = []
    Gateway(MockBackend(fallback=lambda r: got.append(r.prompt) or "x")).complete(LlmRequest(prompt))
    assert got == [prompt]


def test_auth_error_not_retried():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(401, json={"error": "bad key"})

    sleeps = Sleeps()
    with pytest.raises(AuthError):
        Gateway(http_backend(handler), sleep=sleeps).complete(LlmRequest("p"))
    assert len(calls) == 1 and sleeps == []


def test_missing_key_is_config_error(monkeypatch):
    monkeypatch.delenv("FS_LLM_API_KEY", raising=False)
    with pytest.raises(ConfigError):
        HttpBackend()


def test_endpoint_from_env(monkeypatch):
    monkeypatch.setenv("FS_LLM_API_KEY", "k")
    monkeypatch.setenv("FS_LLM_ENDPOINT", "https://example.invalid/chat")
    assert HttpBackend().endpoint == "https://example.invalid/chat"


@pytest.mark.parametrize("status", [429, 500, 503])
def test_retry_then_success(status):
    responses = [httpx.Response(status), httpx.Response(status), httpx.Response(200, json=ok_body())]

    def handler(request):
        return responses.pop(0)

    sleeps = Sleeps()
    gw = Gateway(http_backend(handler), sleep=sleeps)
    assert gw.complete(LlmRequest("p")).text == "L9"
    assert sleeps == [1.0, 2.0]
    assert gw.backend_calls == 3


def test_rate_limit_exhausted_after_five_attempts():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(429)

    sleeps = Sleeps()
    with pytest.raises(RateLimitError):
        Gateway(http_backend(handler), sleep=sleeps).complete(LlmRequest("p"))
    assert len(calls) == 5
    assert sleeps == [1.0, 2.0, 4.0, 8.0]


def test_timeout_is_retried():
    state = {"n": 0}

    def handler(request):
        state["n"] += 1
        if state["n"] == 1:
            raise httpx.ReadTimeout("slow", request=request)
        return httpx.Response(200, json=ok_body("ok"))

    sleeps = Sleeps()
    assert Gateway(http_backend(handler), sleep=sleeps).complete(LlmRequest("p")).text == "ok"
    assert sleeps == [1.0]


def test_connect_error_not_retried():
    def handler(request):
        raise httpx.ConnectError("refused", request=request)

    sleeps = Sleeps()
    with pytest.raises(LlmError) as info:
        Gateway(http_backend(handler), sleep=sleeps).complete(LlmRequest("p"))
    assert not isinstance(info.value, TransientError)
    assert sleeps == []


@pytest.mark.parametrize(
    "response",
    [
        httpx.Response(200, json={"choices": []}),
        httpx.Response(200, text="<html>"),
        httpx.Response(200, json={"choices": [{"message": {"content": None}}]}),
        httpx.Response(400, json={"error": "bad request"}),
    ],
)
def test_malformed_provider_response(response):
    with pytest.raises(ProviderResponseError):
        Gateway(http_backend(lambda r: response)).complete(LlmRequest("p"))


def test_in_flight_bound():
    active, peak = [0], [0]
    lock = threading.Lock()

    def slow(req):
        with lock:
            active[0] += 1
            peak[0] = max(peak[0], active[0])
        time.sleep(0.01)
        with lock:
            active[0] -= 1
        return "x"

    gw = Gateway(MockBackend(fallback=slow), max_in_flight=3)
    threads = [threading.Thread(target=gw.complete, args=(LlmRequest(f"p{i}"),)) for i in range(20)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert 1 <= peak[0] <= 3
    assert gw.backend_calls == 20


def test_concurrent_cache_writes(tmp_path):
    store = CacheStore(tmp_path / "c.jsonl")
    gw = Gateway(MockBackend(fallback=lambda r: r.prompt.upper()), cache=store, max_in_flight=8)
    threads = [threading.Thread(target=gw.complete, args=(LlmRequest(f"p{i}"),)) for i in range(50)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    lines = (tmp_path / "c.jsonl").read_text().splitlines()
    assert len(lines) == 50
    assert all(json.loads(ln)["response_text"].startswith("P") for ln in lines)
