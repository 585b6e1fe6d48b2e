"""HTTP API binding all platform modules, with per-request session
extraction, policy evaluation, and audit logging.

Responses are canonical JSON (sorted keys, UTF-8, compact separators) so
pure queries are byte-stable under the reference embedder and stub gateway.
"""

from __future__ import annotations

import json
import uuid
from pathlib import Path

from fastapi import FastAPI, Header, HTTPException, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .. import assistant as assistant_mod
from .. import catalog as catalog_mod
from .. import drugs as drugs_mod
from .. import podpolicy
from .. import search as search_mod
from .. import termmap
from ..catalog import AccessTier
from ..errors import (
    ArgumentError,
    BusySessionError,
    EmptyDictionaryError,
    NotFoundError,
    ValidationError,
)
from ..vecindex import VectorIndex, chunk_document, reference_embed
from .config import ApiConfig


class CanonicalJSONResponse(JSONResponse):
    def render(self, content) -> bytes:
        return json.dumps(
            content, ensure_ascii=False, sort_keys=True, separators=(",", ":")
        ).encode("utf-8")


def _load_sessions(path) -> dict[str, podpolicy.Session]:
    with Path(path).open(encoding="utf-8") as fh:
        raw = json.load(fh)
    sessions = {}
    for token, obj in raw.items():
        sessions[token] = podpolicy.Session(
            user_id=obj["user_id"],
            vpn_authenticated=obj.get("vpn_authenticated", False),
            approved_pods=frozenset(obj.get("approved_pods", [])),
            pod_dataset_grants={
                pod: set(ids) for pod, ids in obj.get("pod_dataset_grants", {}).items()
            },
        )
    return sessions


class PlatformState:
    """Everything the endpoints touch: immutable snapshots plus the audit
    log and the single-writer chat sessions."""

    def __init__(self, config: ApiConfig):
        self.config = config
        self.catalog = catalog_mod.load_catalog(config.catalog_path)
        self.drugs = drugs_mod.load_drugs(config.drugs_path)
        self.concepts = termmap.load_concepts(
            config.concepts_path, embedder=self._embed_concepts
        )
        self.papers = search_mod.load_papers(config.papers_path)
        self.policy = podpolicy.EgressPolicy.load(config.policy_path)
        self.sessions = _load_sessions(config.sessions_path)
        self.audit = podpolicy.AuditLog(config.audit_log_path)

        self.search = search_mod.SearchEngine(dim=config.embedding_dim)
        self.search.index_corpus(self.catalog, self.papers)

        # assistant corpus: dataset descriptions double as the grounding text
        corpus = VectorIndex(dim=config.embedding_dim)
        for rec in self.catalog:
            for chunk in chunk_document(
                rec.id,
                rec.description,
                embedder=lambda t: reference_embed(t, config.embedding_dim),
            ):
                corpus.upsert(chunk)
        gateway = self._build_gateway()
        self.assistant = assistant_mod.Assistant(
            corpus,
            gateway,
            model=config.gateway_model,
            context_budget=config.context_budget,
        )
        self.generation_gateway = gateway
        self.chat_sessions: dict[str, assistant_mod.ChatSession] = {}

    def _embed_concepts(self, text):
        return reference_embed(text, self.config.embedding_dim)

    def _build_gateway(self):
        if self.config.generation_gateway == "stub":
            return assistant_mod.StubGateway()
        if not self.config.gateway_url:
            raise ValidationError("generation_gateway=remote requires gateway_url")
        return assistant_mod.RemoteGateway(
            base_url=self.config.gateway_url,
            path=self.config.gateway_path,
            model=self.config.gateway_model,
            policy=self.policy,
            timeout_s=self.config.gateway_timeout_s,
        )

    def session_for(self, authorization: str | None) -> podpolicy.Session | None:
        if not authorization:
            return None
        token = authorization.removeprefix("Bearer ").strip()
        return self.sessions.get(token)

    def log_decision(self, session, request_desc: str, decision) -> None:
        user = session.user_id if session is not None else "anonymous"
        self.audit.append(user, request_desc, decision)


def _decision_body(decision: podpolicy.AccessDecision) -> dict:
    return {
        "verdict": decision.verdict,
        "code": decision.code,
        "message": decision.message,
    }


def _dataset_body(rec: catalog_mod.DatasetRecord) -> dict:
    return rec.to_dict()


def _parse_tier(value: str | None) -> AccessTier | None:
    if value is None:
        return None
    try:
        return AccessTier.parse(value)
    except ValidationError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from None


def create_app(config: ApiConfig | None = None) -> FastAPI:
    state = PlatformState(config or ApiConfig())
    app = FastAPI(title="medplat gateway", default_response_class=CanonicalJSONResponse)
    app.state.platform = state

    @app.exception_handler(HTTPException)
    async def _http_exc(request: Request, exc: HTTPException):
        return CanonicalJSONResponse({"error": exc.detail}, status_code=exc.status_code)

    @app.get("/v1/datasets")
    def list_datasets(
        tier: str | None = None,
        q: str | None = None,
        k: int | None = None,
        pod: str | None = None,
        authorization: str | None = Header(default=None),
    ):
        session = state.session_for(authorization)
        tier_filter = _parse_tier(tier)
        if q is not None:
            if not q.strip():
                raise HTTPException(status_code=400, detail="query must be nonempty")
            results = state.search.search_datasets(q, k or 10, tier_filter)
            body = []
            for res in results:
                rec = catalog_mod.get_dataset(state.catalog, res.target_id)
                decision = podpolicy.evaluate_dataset_access(session, rec, "read", pod)
                state.log_decision(session, f"dataset-read {rec.id}", decision)
                body.append(
                    {
                        "dataset": _dataset_body(rec),
                        "score": res.score,
                        "snippet": res.snippet,
                        "access": _decision_body(decision),
                    }
                )
            return {"results": body}
        if k is not None:
            raise HTTPException(status_code=400, detail="k requires a query q")
        body = []
        for rec in state.catalog:
            if tier_filter is not None and rec.tier is not tier_filter:
                continue
            decision = podpolicy.evaluate_dataset_access(session, rec, "read", pod)
            state.log_decision(session, f"dataset-read {rec.id}", decision)
            body.append({"dataset": _dataset_body(rec), "access": _decision_body(decision)})
        return {"results": body}

    @app.get("/v1/papers")
    def search_papers(q: str | None = None, k: int = 10):
        if q is None or not q.strip():
            raise HTTPException(status_code=400, detail="query must be nonempty")
        results = state.search.search_papers(q, k)
        return {
            "results": [
                {
                    "paper_id": r.target_id,
                    "title": r.title,
                    "snippet": r.snippet,
                    "score": r.score,
                }
                for r in results
            ]
        }

    @app.get("/v1/drugs")
    def search_drugs(q: str | None = None):
        if q is None or not q.strip():
            raise HTTPException(status_code=400, detail="query must be nonempty")
        return {"results": [rec.to_dict() for rec in drugs_mod.search_drugs(state.drugs, q)]}

    @app.get("/v1/drugs/{drug_id}/neighbors")
    def drug_neighbors(drug_id: str, level: int = 4):
        if not 1 <= level <= 5:
            raise HTTPException(status_code=422, detail="level must be in 1..5")
        try:
            neighbors = drugs_mod.therapeutic_neighbors(state.drugs, drug_id, level)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None
        return {"results": [rec.to_dict() for rec in neighbors]}

    @app.get("/v1/drugs/{drug_id}/contraindications")
    def drug_contraindications(drug_id: str):
        try:
            items = drugs_mod.contraindications_for(state.drugs, drug_id)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None
        return {"results": items}

    def _candidates_body(candidates):
        return [
            {
                "system": c.concept.system,
                "code": c.concept.code,
                "preferred_term": c.concept.preferred_term,
                "score": c.score,
                "rank": c.rank,
                "matched_via": c.matched_via,
            }
            for c in candidates
        ]

    @app.post("/v1/terminology/map")
    def map_terms(
        body: dict,
        authorization: str | None = Header(default=None),
    ):
        session = state.session_for(authorization)
        system = body.get("system")
        k = body.get("k", 5)
        embedder = state._embed_concepts
        state.log_decision(
            session, "terminology-map", podpolicy.AccessDecision("allow", "OK", "mapping")
        )
        if "texts" in body:
            items = termmap.map_batch(state.concepts, body["texts"], system, k, embedder)
            payload = [
                {"candidates": _candidates_body(item.candidates)}
                if item.error is None
                else {"error": item.error}
                for item in items
            ]
            status = 207 if any(item.error is not None for item in items) else 200
            return CanonicalJSONResponse({"results": payload}, status_code=status)
        text = body.get("text", "")
        try:
            candidates = termmap.map_term(state.concepts, text, system, k, embedder)
        except ArgumentError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        except EmptyDictionaryError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        return {"candidates": _candidates_body(candidates)}

    @app.post("/v1/translate")
    def translate(
        body: dict,
        authorization: str | None = Header(default=None),
    ):
        session = state.session_for(authorization)
        state.log_decision(
            session, "translate", podpolicy.AccessDecision("allow", "OK", "translation")
        )
        try:
            params = (
                assistant_mod.SamplingParams(**body["params"])
                if "params" in body
                else assistant_mod.SamplingParams()
            )
            job = assistant_mod.TranslationJob(
                direction=body.get("direction", ""),
                source_text=body.get("text", ""),
                glossary=tuple(
                    (pair[0], pair[1]) for pair in body.get("glossary", [])
                ),
            )
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        try:
            done = assistant_mod.translate(
                job, state.generation_gateway, params, model=state.config.gateway_model
            )
        except ArgumentError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        if done.result_text is None:
            return CanonicalJSONResponse(
                {"error": "gateway failure", "warnings": list(done.warnings)},
                status_code=502,
            )
        return {"result": done.result_text, "warnings": list(done.warnings)}

    @app.post("/v1/sessions")
    def create_session(
        body: dict | None = None,
        authorization: str | None = Header(default=None),
    ):
        session = state.session_for(authorization)
        state.log_decision(
            session, "session-create", podpolicy.AccessDecision("allow", "OK", "new session")
        )
        body = body or {}
        session_id = uuid.uuid4().hex
        chat_session = assistant_mod.ChatSession(
            session_id=session_id, retrieval_k=body.get("k", 4)
        )
        state.chat_sessions[session_id] = chat_session
        return {"session_id": session_id, "retrieval_k": chat_session.retrieval_k}

    @app.post("/v1/chat")
    def chat(
        body: dict,
        authorization: str | None = Header(default=None),
    ):
        session = state.session_for(authorization)
        state.log_decision(
            session, "chat", podpolicy.AccessDecision("allow", "OK", "chat turn")
        )
        chat_session = state.chat_sessions.get(body.get("session_id", ""))
        if chat_session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        try:
            params = (
                assistant_mod.SamplingParams(**body["params"])
                if "params" in body
                else assistant_mod.SamplingParams()
            )
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        try:
            turn = state.assistant.chat(chat_session, body.get("text", ""), params)
        except ArgumentError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        except BusySessionError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        if turn.finish_reason == assistant_mod.FINISH_ERROR:
            return CanonicalJSONResponse(
                {"error": turn.text, "finish_reason": turn.finish_reason}, status_code=502
            )
        return {
            "session_id": chat_session.session_id,
            "text": turn.text,
            "cited_chunk_ids": list(turn.cited_chunk_ids),
            "finish_reason": turn.finish_reason,
        }

    @app.get("/v1/chunks/{chunk_id}")
    def get_chunk(chunk_id: str):
        chunk = state.assistant.index.get(chunk_id)
        if chunk is None:
            raise HTTPException(status_code=404, detail="unknown chunk")
        return {
            "chunk_id": chunk.chunk_id,
            "doc_id": chunk.doc_id,
            "text": chunk.text,
            "span": list(chunk.span),
        }

    @app.post("/v1/policy/egress")
    def policy_egress(
        body: dict,
        authorization: str | None = Header(default=None),
    ):
        session = state.session_for(authorization)
        try:
            request = podpolicy.EgressRequest(
                host=body.get("host", ""),
                kind=body.get("kind", ""),
                action=body.get("action", ""),
            )
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        decision = podpolicy.evaluate_egress(state.policy, request)
        state.log_decision(
            session, f"egress {request.action} {request.kind} {request.host}", decision
        )
        return _decision_body(decision)

    @app.get("/v1/audit")
    def read_audit(from_seq: int = 0):
        events = state.audit.read(from_seq)
        return {"events": [e.to_dict() for e in events]}

    if state.config.ui_dist_path and Path(state.config.ui_dist_path).is_dir():
        app.mount(
            "/ui", StaticFiles(directory=state.config.ui_dist_path, html=True), name="ui"
        )

    return app
