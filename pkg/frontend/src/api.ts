// Typed client for the platform HTTP API. The UI never computes over
// results; everything rendered comes straight from these responses.

export type Tier = "open" | "restricted" | "credentialed";

export type AccessInfo = {
  verdict: string;
  code: string;
  message: string;
};

export type DatasetRecord = {
  id: string;
  name: string;
  description: string;
  tier: Tier;
  modality_tags: string[];
  record_count: number;
  count_unit: string;
  source: string;
  join_key: string;
};

export type DatasetHit = {
  dataset: DatasetRecord;
  access: AccessInfo;
  score?: number;
  snippet?: string;
};

export type PaperHit = {
  paper_id: string;
  title: string;
  snippet: string;
  score: number;
};

export type DrugRecord = {
  drug_id: string;
  name: string;
  main_ingredients: string[];
  atc_codes: string[];
  contraindications: string[];
};

export type TermCandidate = {
  system: string;
  code: string;
  preferred_term: string;
  score: number;
  rank: number;
  matched_via: string;
};

export type BatchItem = {
  candidates?: TermCandidate[];
  error?: string;
};

export type TranslateResult = {
  result: string;
  warnings: string[];
};

export type ChatReply = {
  session_id: string;
  text: string;
  finish_reason: string;
  cited_chunk_ids: string[];
};

export type EgressDecision = AccessInfo;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private token: string | null = null,
    private fetchFn: typeof fetch = fetch,
  ) {}

  setToken(token: string | null): void {
    this.token = token;
  }

  private headers(): Record<string, string> {
    const out: Record<string, string> = { "Content-Type": "application/json" };
    if (this.token) {
      out["Authorization"] = `Bearer ${this.token}`;
    }
    return out;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: this.headers(),
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json().catch(() => null);
    // 207 is a partial-success batch; its body is still the result
    if (!response.ok && response.status !== 207) {
      const detail =
        payload && typeof payload === "object" && "error" in payload
          ? String((payload as { error: unknown }).error)
          : response.statusText;
      throw new ApiError(response.status, detail);
    }
    return payload as T;
  }

  searchDatasets(q: string, k: number, tier?: Tier, pod?: string): Promise<{ results: DatasetHit[] }> {
    const params = new URLSearchParams({ q, k: String(k) });
    if (tier) params.set("tier", tier);
    if (pod) params.set("pod", pod);
    return this.request("GET", `/v1/datasets?${params}`);
  }

  listDatasets(tier?: Tier): Promise<{ results: DatasetHit[] }> {
    const params = new URLSearchParams();
    if (tier) params.set("tier", tier);
    const qs = params.toString();
    const suffix = qs ? `?${qs}` : "";
    return this.request("GET", `/v1/datasets${suffix}`);
  }

  searchPapers(q: string, k: number): Promise<{ results: PaperHit[] }> {
    const params = new URLSearchParams({ q, k: String(k) });
    return this.request("GET", `/v1/papers?${params}`);
  }

  searchDrugs(q: string): Promise<{ results: DrugRecord[] }> {
    return this.request("GET", `/v1/drugs?${new URLSearchParams({ q })}`);
  }

  drugNeighbors(drugId: string, level: number): Promise<{ results: DrugRecord[] }> {
    return this.request("GET", `/v1/drugs/${encodeURIComponent(drugId)}/neighbors?level=${level}`);
  }

  drugContraindications(drugId: string): Promise<{ results: string[] }> {
    return this.request("GET", `/v1/drugs/${encodeURIComponent(drugId)}/contraindications`);
  }

  mapTerm(text: string, k: number, system?: string): Promise<{ candidates: TermCandidate[] }> {
    const body: Record<string, unknown> = { text, k };
    if (system) body["system"] = system;
    return this.request("POST", "/v1/terminology/map", body);
  }

  mapBatch(texts: string[], k: number, system?: string): Promise<{ results: BatchItem[] }> {
    const body: Record<string, unknown> = { texts, k };
    if (system) body["system"] = system;
    return this.request("POST", "/v1/terminology/map", body);
  }

  translate(
    direction: string,
    text: string,
    glossary: Array<[string, string]>,
  ): Promise<TranslateResult> {
    return this.request("POST", "/v1/translate", { direction, text, glossary });
  }

  newSession(retrievalK: number): Promise<{ session_id: string; retrieval_k: number }> {
    return this.request("POST", "/v1/sessions", { retrieval_k: retrievalK });
  }

  chat(sessionId: string, text: string): Promise<ChatReply> {
    return this.request("POST", "/v1/chat", { session_id: sessionId, text });
  }

  chunk(chunkId: string): Promise<{ chunk_id: string; doc_id: string; text: string }> {
    return this.request("GET", `/v1/chunks/${encodeURIComponent(chunkId)}`);
  }

  checkEgress(host: string, kind: string, action: string): Promise<EgressDecision> {
    return this.request("POST", "/v1/policy/egress", { host, kind, action });
  }
}
