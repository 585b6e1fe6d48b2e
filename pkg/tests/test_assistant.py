import threading

import httpx
import pytest

from conftest import oracle_top_k
from medplat.assistant import (
    Assistant,
    ChatSession,
    ChatTurn,
    FINISH_ERROR,
    FINISH_STOP,
    GenerationRequest,
    RemoteGateway,
    SamplingParams,
    StubGateway,
    TranslationJob,
    assemble_prompt,
    export_session,
    import_session,
    translate,
)
from medplat.errors import ArgumentError, BusySessionError, ValidationError
from medplat.podpolicy import EgressPolicy
from medplat.vecindex import Chunk, EmbeddingVector, VectorIndex, reference_embed

DIM = 32


def _corpus(texts):
    index = VectorIndex(dim=DIM)
    for i, text in enumerate(texts):
        index.upsert(
            Chunk(
                chunk_id=f"doc{i}#0",
                doc_id=f"doc{i}",
                text=text,
                span=(0, len(text)),
                vector=reference_embed(text, DIM),
            )
        )
    return index


def _assistant(texts=("ecg waveforms", "chest xray imaging", "blood glucose labs"), **kw):
    return Assistant(_corpus(texts), StubGateway(), **kw)


class TestSamplingParams:
    def test_defaults(self):
        params = SamplingParams()
        assert (params.max_tokens, params.temperature, params.top_p, params.top_k) == (
            512,
            0.2,
            0.9,
            40,
        )

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"max_tokens": 0},
            {"temperature": -0.1},
            {"top_p": 0.0},
            {"top_p": 1.5},
            {"top_k": 0},
        ],
    )
    def test_bounds_enforced(self, kwargs):
        with pytest.raises(ValidationError):
            SamplingParams(**kwargs)


class TestRetrieveContext:
    def test_matches_oracle(self):
        assistant = _assistant()
        hits = assistant.retrieve_context("ecg waveform data", k=2)
        chunks = [assistant.index.get(cid) for cid in assistant.index.chunk_ids()]
        query = reference_embed("ecg waveform data", DIM)
        expected = oracle_top_k(chunks, query.values, 2)
        assert [(c.chunk_id, round(s, 9)) for c, s in hits] == [
            (cid, round(s, 9)) for cid, s in expected
        ]

    def test_k_zero_rejected(self):
        with pytest.raises(ArgumentError):
            _assistant().retrieve_context("x", k=0)

    def test_empty_corpus(self):
        assistant = Assistant(VectorIndex(dim=DIM), StubGateway())
        assert assistant.retrieve_context("anything", k=3) == []


class TestAssemblePrompt:
    def _chunks(self, *texts):
        return [
            (
                Chunk(
                    chunk_id=f"c#{i}",
                    doc_id="c",
                    text=text,
                    span=(0, len(text)),
                    vector=reference_embed(text, DIM),
                ),
                1.0 - 0.1 * i,
            )
            for i, text in enumerate(texts)
        ]

    def test_no_context_no_history(self):
        prompt, ids = assemble_prompt("what is ecg", [])
        assert ids == []
        assert prompt.endswith("user: what is ecg")

    def test_chunk_ids_appear_verbatim(self):
        context = self._chunks("alpha text", "beta text")
        prompt, ids = assemble_prompt("q", context)
        assert ids == ["c#0", "c#1"]
        for cid in ids:
            assert f"[source: {cid}]" in prompt

    def test_lowest_scored_dropped_first(self):
        context = self._chunks("x" * 200, "y" * 200)
        full_prompt, _ = assemble_prompt("q", context, budget=10_000)
        budget = len(full_prompt) - 1
        prompt, ids = assemble_prompt("q", context, budget=budget)
        assert ids == ["c#0"]  # c#1 has the lower score
        assert "[source: c#1]" not in prompt

    def test_history_window_is_six_turns(self):
        session = ChatSession(session_id="s")
        session.turns = tuple(
            ChatTurn(role="user" if i % 2 == 0 else "assistant", text=f"turn-{i}")
            for i in range(10)
        )
        prompt, _ = assemble_prompt("q", [], session)
        assert "turn-3" not in prompt
        assert all(f"turn-{i}" in prompt for i in range(4, 10))

    def test_oldest_history_dropped_after_context(self):
        session = ChatSession(session_id="s")
        session.turns = (
            ChatTurn(role="user", text="a" * 100),
            ChatTurn(role="assistant", text="b" * 100),
        )
        full_prompt, _ = assemble_prompt("q", [], session, budget=10_000)
        prompt, _ = assemble_prompt("q", [], session, budget=len(full_prompt) - 1)
        assert "a" * 100 not in prompt
        assert "b" * 100 in prompt


class TestChat:
    def test_stub_contract_and_grounding(self):
        assistant = _assistant()
        session = ChatSession(session_id="s1", retrieval_k=2)
        turn = assistant.chat(session, "tell me about ecg waveforms")
        assert turn.text.startswith("STUB(")
        assert turn.finish_reason == FINISH_STOP
        context = assistant.retrieve_context("tell me about ecg waveforms", 2)
        _, expected_ids = assemble_prompt("tell me about ecg waveforms", context)
        assert list(turn.cited_chunk_ids) == expected_ids
        assert len(session.turns) == 2
        assert [t.role for t in session.turns] == ["user", "assistant"]

    def test_determinism(self):
        turns = []
        for _ in range(2):
            assistant = _assistant()
            session = ChatSession(session_id="s", retrieval_k=2)
            turns.append(assistant.chat(session, "glucose labs"))
        assert turns[0] == turns[1]

    def test_gateway_failure_leaves_session_unchanged(self):
        class FailingGateway:
            def generate(self, request):
                from medplat.assistant import GenerationResponse

                return GenerationResponse(
                    text="", finish_reason=FINISH_ERROR, latency_ms=0.0, error="boom"
                )

        assistant = Assistant(_corpus(["ecg data"]), FailingGateway())
        session = ChatSession(session_id="s", retrieval_k=1)
        before = export_session(session)
        turn = assistant.chat(session, "hello ecg")
        assert turn.finish_reason == FINISH_ERROR
        assert export_session(session) == before

    def test_busy_session_rejected(self):
        release = threading.Event()
        entered = threading.Event()

        class SlowGateway:
            def generate(self, request):
                entered.set()
                release.wait(timeout=5)
                return StubGateway().generate(request)

        assistant = Assistant(_corpus(["ecg data"]), SlowGateway())
        session = ChatSession(session_id="s", retrieval_k=1)
        worker = threading.Thread(
            target=lambda: assistant.chat(session, "first message")
        )
        worker.start()
        try:
            assert entered.wait(timeout=5)
            with pytest.raises(BusySessionError):
                assistant.chat(session, "second message")
        finally:
            release.set()
            worker.join()

    def test_blank_text_rejected(self):
        with pytest.raises(ArgumentError):
            _assistant().chat(ChatSession(session_id="s"), "   ")


class TestTranslate:
    def test_glossary_warning_with_stub(self):
        job = TranslationJob(
            direction="ko-en",
            source_text="환자의 심전도 검사 결과",
            glossary=(("심전도", "electrocardiogram"),),
        )
        done = translate(job, StubGateway())
        assert done.result_text is not None
        assert any("심전도" in w for w in done.warnings)

    def test_empty_glossary_no_warnings(self):
        job = TranslationJob(direction="en-ko", source_text="blood pressure")
        done = translate(job, StubGateway())
        assert done.warnings == ()

    def test_empty_source_rejected(self):
        job = TranslationJob(direction="ko-en", source_text=" ")
        with pytest.raises(ArgumentError):
            translate(job, StubGateway())

    def test_bad_direction_rejected(self):
        with pytest.raises(ValidationError):
            TranslationJob(direction="fr-en", source_text="x")

    def test_glossary_term_absent_from_source_no_warning(self):
        job = TranslationJob(
            direction="ko-en",
            source_text="혈압 측정",
            glossary=(("심전도", "electrocardiogram"),),
        )
        done = translate(job, StubGateway())
        assert done.warnings == ()


class TestRemoteGateway:
    def _request(self):
        return GenerationRequest(prompt="hello", params=SamplingParams(), model="m")

    def test_egress_denied_makes_no_network_call(self):
        calls = []

        def handler(request):
            calls.append(request)
            return httpx.Response(200, json={"choices": [{"text": "hi"}]})

        gateway = RemoteGateway(
            "http://llm.example.com",
            policy=EgressPolicy(api_allowlist=frozenset()),
            transport=httpx.MockTransport(handler),
        )
        response = gateway.generate(self._request())
        assert response.finish_reason == FINISH_ERROR
        assert response.error == "egress-denied"
        assert calls == []

    def test_allowlisted_host_round_trip(self):
        seen = {}

        def handler(request):
            import json as _json

            seen.update(_json.loads(request.content))
            return httpx.Response(
                200, json={"choices": [{"text": "bonjour", "finish_reason": "stop"}]}
            )

        gateway = RemoteGateway(
            "http://llm.internal",
            policy=EgressPolicy(api_allowlist=frozenset({"llm.internal"})),
            transport=httpx.MockTransport(handler),
        )
        response = gateway.generate(self._request())
        assert (response.text, response.finish_reason) == ("bonjour", FINISH_STOP)
        assert seen["prompt"] == "hello"
        assert {"model", "max_tokens", "temperature", "top_p", "top_k"} <= set(seen)

    def test_non_2xx_is_error(self):
        gateway = RemoteGateway(
            "http://llm.internal",
            policy=EgressPolicy(api_allowlist=frozenset({"llm.internal"})),
            transport=httpx.MockTransport(lambda req: httpx.Response(503)),
        )
        response = gateway.generate(self._request())
        assert response.finish_reason == FINISH_ERROR
        assert "503" in response.error

    def test_transport_failure_is_error(self):
        def handler(request):
            raise httpx.ConnectError("refused")

        gateway = RemoteGateway(
            "http://llm.internal",
            policy=EgressPolicy(api_allowlist=frozenset({"llm.internal"})),
            transport=httpx.MockTransport(handler),
        )
        response = gateway.generate(self._request())
        assert response.finish_reason == FINISH_ERROR
        assert response.error.startswith("transport")


class TestSessionSerialization:
    def test_round_trip(self):
        session = ChatSession(session_id="s9", retrieval_k=3)
        session.turns = (
            ChatTurn(role="user", text="hi"),
            ChatTurn(role="assistant", text="STUB(hi)", cited_chunk_ids=("a#0",)),
        )
        assert import_session(export_session(session)) == session
