"""RAG chat and medical translation orchestration.

Retrieval runs on the shared vector index; generation goes through one
gateway abstraction with an OpenAI-style completion wire shape. The stub
gateway is pure and offline, which makes the whole chat pipeline a
deterministic function of (session, text, params, corpus). Remote calls are
mediated by the egress policy before any network I/O.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field, replace
from typing import Callable

import httpx

from .errors import ArgumentError, BusySessionError, ValidationError
from .podpolicy import EgressPolicy, EgressRequest, evaluate_egress
from .vecindex import Chunk, EmbeddingVector, VectorIndex, reference_embed

DEFAULT_MAX_TOKENS = 512
DEFAULT_TEMPERATURE = 0.2
DEFAULT_TOP_P = 0.9
DEFAULT_TOP_K = 40
DEFAULT_TIMEOUT_S = 30.0

HISTORY_WINDOW = 6
DEFAULT_CONTEXT_BUDGET = 6000

SYSTEM_PREAMBLE = (
    "You are a research assistant for a medical data platform. Answer using "
    "only the numbered context blocks below and cite them by their source ids."
)

FINISH_STOP = "stop"
FINISH_LENGTH = "length"
FINISH_ERROR = "error"

DIRECTIONS = ("ko-en", "en-ko")


@dataclass(frozen=True)
class SamplingParams:
    max_tokens: int = DEFAULT_MAX_TOKENS
    temperature: float = DEFAULT_TEMPERATURE
    top_p: float = DEFAULT_TOP_P
    top_k: int = DEFAULT_TOP_K

    def __post_init__(self):
        if self.max_tokens < 1:
            raise ValidationError(f"max_tokens must be positive, got {self.max_tokens}")
        if self.temperature < 0:
            raise ValidationError(f"temperature must be >= 0, got {self.temperature}")
        if not 0 < self.top_p <= 1:
            raise ValidationError(f"top_p must be in (0, 1], got {self.top_p}")
        if self.top_k < 1:
            raise ValidationError(f"top_k must be positive, got {self.top_k}")


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    params: SamplingParams
    model: str


@dataclass(frozen=True)
class GenerationResponse:
    text: str
    finish_reason: str
    latency_ms: float
    error: str | None = None

    def __post_init__(self):
        if self.finish_reason not in (FINISH_STOP, FINISH_LENGTH, FINISH_ERROR):
            raise ValidationError(f"unknown finish_reason {self.finish_reason!r}")
        if not self.text and self.finish_reason != FINISH_ERROR:
            raise ValidationError("response text empty without finish_reason=error")


class StubGateway:
    """Deterministic offline gateway: echoes a fixed-size prompt prefix."""

    ECHO_PREFIX_CHARS = 40

    def generate(self, request: GenerationRequest) -> GenerationResponse:
        text = f"STUB({request.prompt[: self.ECHO_PREFIX_CHARS]})"
        return GenerationResponse(text=text, finish_reason=FINISH_STOP, latency_ms=0.0)


class RemoteGateway:
    """HTTP completion gateway; every call is checked against the egress
    policy before any network traffic."""

    def __init__(
        self,
        base_url: str,
        path: str = "/v1/completions",
        model: str = "default",
        policy: EgressPolicy | None = None,
        timeout_s: float = DEFAULT_TIMEOUT_S,
        transport: httpx.BaseTransport | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.path = path
        self.model = model
        self.policy = policy or EgressPolicy()
        self.timeout_s = timeout_s
        self._transport = transport

    @property
    def host(self) -> str:
        return httpx.URL(self.base_url).host.lower()

    def generate(self, request: GenerationRequest) -> GenerationResponse:
        started = time.monotonic()
        decision = evaluate_egress(
            self.policy, EgressRequest(host=self.host, kind="llm-api", action="fetch")
        )
        if not decision.allowed:
            return GenerationResponse(
                text="", finish_reason=FINISH_ERROR, latency_ms=0.0, error="egress-denied"
            )
        body = {
            "model": request.model or self.model,
            "prompt": request.prompt,
            "max_tokens": request.params.max_tokens,
            "temperature": request.params.temperature,
            "top_p": request.params.top_p,
            "top_k": request.params.top_k,
        }
        try:
            with httpx.Client(timeout=self.timeout_s, transport=self._transport) as client:
                resp = client.post(self.base_url + self.path, json=body)
        except httpx.HTTPError as exc:
            return GenerationResponse(
                text="",
                finish_reason=FINISH_ERROR,
                latency_ms=(time.monotonic() - started) * 1000,
                error=f"transport: {exc}",
            )
        latency = (time.monotonic() - started) * 1000
        if resp.status_code // 100 != 2:
            return GenerationResponse(
                text="",
                finish_reason=FINISH_ERROR,
                latency_ms=latency,
                error=f"status {resp.status_code}",
            )
        payload = resp.json()
        choice = payload["choices"][0]
        return GenerationResponse(
            text=choice["text"],
            finish_reason=choice.get("finish_reason", FINISH_STOP),
            latency_ms=latency,
        )


@dataclass(frozen=True)
class ChatTurn:
    role: str
    text: str
    cited_chunk_ids: tuple[str, ...] = ()
    finish_reason: str | None = None

    def __post_init__(self):
        if self.role not in ("user", "assistant"):
            raise ValidationError(f"unknown role {self.role!r}")


@dataclass
class ChatSession:
    session_id: str
    retrieval_k: int = 4
    turns: tuple[ChatTurn, ...] = ()

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "retrieval_k": self.retrieval_k,
            "turns": [
                {
                    "role": t.role,
                    "text": t.text,
                    "cited_chunk_ids": list(t.cited_chunk_ids),
                    "finish_reason": t.finish_reason,
                }
                for t in self.turns
            ],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "ChatSession":
        return cls(
            session_id=obj["session_id"],
            retrieval_k=obj.get("retrieval_k", 4),
            turns=tuple(
                ChatTurn(
                    role=t["role"],
                    text=t["text"],
                    cited_chunk_ids=tuple(t.get("cited_chunk_ids", [])),
                    finish_reason=t.get("finish_reason"),
                )
                for t in obj.get("turns", [])
            ),
        )


def assemble_prompt(
    query: str,
    context: list[tuple[Chunk, float]],
    history: ChatSession | None = None,
    budget: int = DEFAULT_CONTEXT_BUDGET,
) -> tuple[str, list[str]]:
    """Deterministic prompt template.

    Preamble, numbered context blocks each tagged `[source: chunk_id]`, the
    last 6 history turns, then the query. Over budget, lowest-scored context
    blocks drop first, then the oldest history turns. Returns the prompt and
    the chunk_ids actually included.
    """
    turns = list(history.turns[-HISTORY_WINDOW:]) if history is not None else []
    # drop lowest score first; on score ties drop the later-ranked block
    kept = list(context)

    def render(ctx: list[tuple[Chunk, float]], hist: list[ChatTurn]) -> str:
        parts = [SYSTEM_PREAMBLE, ""]
        for i, (chunk, _score) in enumerate(ctx, start=1):
            parts.append(f"Context {i} [source: {chunk.chunk_id}]:\n{chunk.text}")
        if ctx:
            parts.append("")
        for turn in hist:
            parts.append(f"{turn.role}: {turn.text}")
        if hist:
            parts.append("")
        parts.append(f"user: {query}")
        return "\n".join(parts)

    prompt = render(kept, turns)
    while len(prompt) > budget and kept:
        drop_idx = min(range(len(kept)), key=lambda i: (kept[i][1], -i))
        kept.pop(drop_idx)
        prompt = render(kept, turns)
    while len(prompt) > budget and turns:
        turns.pop(0)
        prompt = render(kept, turns)
    return prompt, [chunk.chunk_id for chunk, _ in kept]


class Assistant:
    """Binds a retrieval corpus to a generation gateway; sessions are
    single-writer (concurrent chats on one session raise a busy error)."""

    def __init__(
        self,
        index: VectorIndex,
        gateway,
        model: str = "stub",
        embedder: Callable[[str], EmbeddingVector] | None = None,
        context_budget: int = DEFAULT_CONTEXT_BUDGET,
    ):
        self.index = index
        self.gateway = gateway
        self.model = model
        self.embedder = embedder or (lambda text: reference_embed(text, index.dim))
        self.context_budget = context_budget
        self._session_locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def retrieve_context(self, query: str, k: int) -> list[tuple[Chunk, float]]:
        if k < 1:
            raise ArgumentError(f"k must be >= 1, got {k}")
        if len(self.index) == 0:
            return []
        qvec = self.embedder(query)
        if qvec.is_zero:
            return []
        hits = self.index.top_k(qvec, k=k)
        return [(self.index.get(hit.chunk_id), hit.score) for hit in hits]

    def _session_lock(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._session_locks.setdefault(session_id, threading.Lock())

    def chat(
        self, session: ChatSession, user_text: str, params: SamplingParams | None = None
    ) -> ChatTurn:
        """Retrieve, assemble, generate; appends user+assistant turns only on
        success (a failed generation leaves the session untouched)."""
        if not user_text.strip():
            raise ArgumentError("user text must be nonempty")
        params = params or SamplingParams()
        lock = self._session_lock(session.session_id)
        if not lock.acquire(blocking=False):
            raise BusySessionError(f"session {session.session_id!r} has a chat in flight")
        try:
            context = self.retrieve_context(user_text, session.retrieval_k)
            prompt, cited_ids = assemble_prompt(
                user_text, context, session, budget=self.context_budget
            )
            response = self.gateway.generate(
                GenerationRequest(prompt=prompt, params=params, model=self.model)
            )
            if response.finish_reason == FINISH_ERROR:
                return ChatTurn(
                    role="assistant",
                    text=response.error or "generation failed",
                    cited_chunk_ids=(),
                    finish_reason=FINISH_ERROR,
                )
            turn = ChatTurn(
                role="assistant",
                text=response.text,
                cited_chunk_ids=tuple(cited_ids),
                finish_reason=response.finish_reason,
            )
            session.turns = session.turns + (
                ChatTurn(role="user", text=user_text),
                turn,
            )
            return turn
        finally:
            lock.release()


@dataclass
class TranslationJob:
    direction: str
    source_text: str
    glossary: tuple[tuple[str, str], ...] = ()
    result_text: str | None = None
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ValidationError(
                f"direction must be one of {DIRECTIONS}, got {self.direction!r}"
            )
        for src, dst in self.glossary:
            if not src or not dst:
                raise ValidationError("glossary terms must be nonempty")


def _translation_prompt(job: TranslationJob) -> str:
    if job.direction == "ko-en":
        header = "Translate the following Korean medical text into English."
    else:
        header = "Translate the following English medical text into Korean."
    parts = [header]
    if job.glossary:
        parts.append("Required terminology:")
        for src, dst in job.glossary:
            parts.append(f"- {src} => {dst}")
    parts.append("Source:")
    parts.append(job.source_text)
    return "\n".join(parts)


def translate(job: TranslationJob, gateway, params: SamplingParams | None = None,
              model: str = "stub") -> TranslationJob:
    """Run the translation prompt, then enforce the glossary: every source
    term present in the input must yield its required target term in the
    output; misses become warnings, not errors."""
    if not job.source_text.strip():
        raise ArgumentError("source text must be nonempty")
    params = params or SamplingParams()
    response = gateway.generate(
        GenerationRequest(prompt=_translation_prompt(job), params=params, model=model)
    )
    if response.finish_reason == FINISH_ERROR:
        return replace(
            job,
            result_text=None,
            warnings=(f"generation failed: {response.error}",),
        )
    warnings = []
    for src, dst in job.glossary:
        if src in job.source_text and dst not in response.text:
            warnings.append(f"glossary term {src!r} not rendered as {dst!r}")
    return replace(job, result_text=response.text, warnings=tuple(warnings))


def export_session(session: ChatSession) -> str:
    return json.dumps(session.to_dict(), ensure_ascii=False, sort_keys=True)


def import_session(data: str) -> ChatSession:
    return ChatSession.from_dict(json.loads(data))
