import pytest
import requests

from voicepilot.config import load_config
from voicepilot.errors import BackendUnavailable, ConfigError, EmptyCompletion, NoCode
from voicepilot.llm import (
    EnvironmentDescription,
    ExchangeHistory,
    MockCompleter,
    PromptBuilder,
    RawCompletion,
    RemoteCompleter,
    extract_code,
    load_prompt_template,
    load_rules,
)


@pytest.fixture(scope="module")
def config():
    return load_config(None)


@pytest.fixture(scope="module")
def env(config):
    return EnvironmentDescription.from_config(config)


@pytest.fixture(scope="module")
def template(config):
    return load_prompt_template(config.resolve(config.prompt_template))


@pytest.fixture()
def completer(config, env):
    return MockCompleter(load_rules(config.resolve(config.llm.rules)), env, pause_delay_s=4.0)


@pytest.fixture()
def builder(template, env, config):
    return PromptBuilder(template, env, config)


def test_template_has_required_blocks(template):
    for block in ("environment", "functions", "variables", "user_control", "exchange"):
        assert block in template


def test_template_missing_block_fails(tmp_path):
    path = tmp_path / "broken.txt"
    path.write_text("[environment]\nonly one block\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_prompt_template(path)


def test_prompt_mentions_environment_and_variables(builder):
    prompt = builder.build([], "feed me", 4.0)
    assert "- Bowl 0: blueberries" in prompt
    assert "- Bowl 2: yogurt" in prompt
    assert "obi.scoop_from_bowlno" in prompt
    assert "obi.speed: 0 to 5 (default 2.5)" in prompt
    assert "time.sleep(4)" in prompt


def test_prompt_ends_with_command(builder):
    prompt = builder.build([], "scoop from bowl 3", 4.0)
    assert prompt.splitlines()[-1] == "scoop from bowl 3"


def test_prompt_pause_delay_substituted(builder):
    assert "time.sleep(2.5)" in builder.build([], "feed me", 2.5)


def test_history_rendered_in_order_verbatim(builder):
    history = ExchangeHistory(cap=10)
    history.append("feed me", "obi.scoop_from_bowlno(1)\nobi.move_to_mouth()")
    history.append("stop", "obi.stop()")
    prompt = builder.build(history.entries(), "again", 4.0)
    first = prompt.find("User: feed me")
    second = prompt.find("obi.scoop_from_bowlno(1)\nobi.move_to_mouth()")
    third = prompt.find("User: stop\nCode:\nobi.stop()")
    assert -1 < first < second < third
    # no history -> no history header
    assert "feed me" not in builder.build([], "again", 4.0)


def test_history_cap_evicts_oldest():
    history = ExchangeHistory(cap=3)
    for i in range(5):
        history.append(f"cmd {i}", f"code {i}")
    entries = history.entries()
    assert [e.user_command for e in entries] == ["cmd 2", "cmd 3", "cmd 4"]
    assert len(history) == 3


def test_mock_single_bite(completer):
    done = completer.complete("...\nfeed me a bite of bowl 1")
    assert extract_code(done) == "obi.scoop_from_bowlno(1)\nobi.move_to_mouth()"


def test_mock_repeat_unrolls_with_pause(completer):
    code = extract_code(completer.complete("...\nfeed me 3 bites of bowl 0"))
    lines = code.splitlines()
    assert lines.count("obi.scoop_from_bowlno(0)") == 3
    assert lines.count("time.sleep(4)") == 2  # separator between bites


def test_mock_pause_delay_tracks_setting(config, env):
    completer = MockCompleter(
        load_rules(config.resolve(config.llm.rules)), env, pause_delay_s=2.0
    )
    code = extract_code(completer.complete("...\nfeed me 2 bites of bowl 0"))
    assert "time.sleep(2)" in code


def test_mock_food_lookup(completer):
    code = extract_code(completer.complete("...\nfeed me a bite of yogurt"))
    assert "obi.scoop_from_bowlno(2)" in code


def test_mock_unknown_food_is_empty_completion(completer):
    with pytest.raises(EmptyCompletion):
        completer.complete("...\nfeed me a bite of lasagna")


def test_mock_control_words(completer):
    assert extract_code(completer.complete("x\nstop")) == "obi.stop()"
    assert extract_code(completer.complete("x\npause")) == "obi.pause_indefinitely()"
    assert extract_code(completer.complete("x\nstart")) == "obi.start()"


def test_mock_set_variable(completer):
    assert extract_code(completer.complete("x\nset the speed to 9")) == "obi.speed = 9"
    code = extract_code(completer.complete("x\nset scoop depth to 1.5"))
    assert code == "obi.scoop_depth = 1.5"


def test_mock_unsafe_demo_rule(completer):
    code = extract_code(completer.complete("x\nrun diagnostics"))
    assert "import os" in code


def test_mock_no_match_raises(completer):
    with pytest.raises(EmptyCompletion):
        completer.complete("x\nwhat is the weather like")


def test_mock_counts_calls(completer):
    assert completer.calls == 0
    completer.complete("x\nstop")
    with pytest.raises(EmptyCompletion):
        completer.complete("x\nunmatchable gibberish zzz")
    assert completer.calls == 2


def test_extract_code_prefers_fenced_block():
    text = "Sure, here you go:\n```python\nobi.stop()\n```\nthanks"
    assert extract_code(text) == "obi.stop()"
    assert extract_code("```\nobi.start()\n```") == "obi.start()"


def test_extract_code_unfenced_passthrough():
    assert extract_code("obi.stop()\n") == "obi.stop()"


def test_extract_code_empty_raises():
    with pytest.raises(NoCode):
        extract_code("   \n\t ")
    with pytest.raises(NoCode):
        extract_code(RawCompletion(text="```\n```", backend_id="mock", latency_ms=0))


def test_remote_completer_requires_url(monkeypatch):
    monkeypatch.delenv("VP_LLM_URL", raising=False)
    with pytest.raises(ConfigError):
        RemoteCompleter()


class _StubHttp:
    def __init__(self, response=None, error=None):
        self.response = response
        self.error = error
        self.requests = []

    def post(self, url, json=None, headers=None, timeout=None):
        self.requests.append({"url": url, "json": json, "headers": headers})
        if self.error:
            raise self.error
        return self.response


class _StubResponse:
    def __init__(self, payload):
        self.payload = payload

    def raise_for_status(self):
        pass

    def json(self):
        return self.payload


def test_remote_completer_payload_and_auth():
    stub = _StubHttp(
        response=_StubResponse(
            {"choices": [{"message": {"content": "```\nobi.stop()\n```"}}]}
        )
    )
    completer = RemoteCompleter(
        url="http://llm.test/v1", token="tok", model="m1", session=stub
    )
    completion = completer.complete("the prompt")
    assert extract_code(completion) == "obi.stop()"
    sent = stub.requests[0]
    assert sent["json"]["model"] == "m1"
    assert sent["json"]["messages"][0]["content"] == "the prompt"
    assert sent["headers"]["Authorization"] == "Bearer tok"


def test_remote_completer_network_failure():
    stub = _StubHttp(error=requests.ConnectionError("down"))
    completer = RemoteCompleter(url="http://llm.test/v1", session=stub)
    with pytest.raises(BackendUnavailable):
        completer.complete("prompt")


def test_remote_completer_empty_text():
    stub = _StubHttp(
        response=_StubResponse({"choices": [{"message": {"content": "   "}}]})
    )
    completer = RemoteCompleter(url="http://llm.test/v1", session=stub)
    with pytest.raises(EmptyCompletion):
        completer.complete("prompt")
