/** Typed client for the lexdim HTTP service. All scores shown anywhere in the
 * UI come from these responses; the client never recomputes them. */

export interface Candidate {
  word: string;
  score: number;
}

export interface DictionaryEntry {
  word: string;
  score: number;
}

export interface Dictionary {
  dimension_name: string;
  threshold: number;
  entries: DictionaryEntry[];
}

export interface SessionSummary {
  session_id: string;
  dimension_name: string;
  round: number;
  positives: number;
  negatives: number;
}

export interface RoundResult {
  round: number;
  candidates: Candidate[];
}

export interface LabelCounts {
  round: number;
  positives: number;
  negatives: number;
  auto_negatives: number;
}

export interface SessionState {
  id: string;
  dimension_name: string;
  round: number;
  positive_words: string[];
  negative_words: string[];
  history: { round_index: number; top_k: [string, number][] }[];
  current_dimension: { name: string } | null;
}

export interface Health {
  status: string;
  primary_language: string;
  vocab_sizes: Record<string, number>;
}

export interface ApplyResult {
  dimension_name: string;
  language_tag: string;
  candidates: Candidate[];
}

export interface DocFeatureRow {
  doc_id: string;
  values: number[] | null;
  token_count: number;
}

export interface DocFeaturesResult {
  dimension_names: string[];
  rows: DocFeatureRow[];
}

/** Error envelope {code, message, detail?} surfaced with the HTTP status. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly detail?: unknown,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class WorkbenchApi {
  constructor(readonly base: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await fetch(this.base + path, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await resp.json();
    if (!resp.ok) {
      throw new ApiError(
        resp.status,
        payload.code ?? "Unknown",
        payload.message ?? resp.statusText,
        payload.detail,
      );
    }
    return payload as T;
  }

  health(): Promise<Health> {
    return this.request("GET", "/health");
  }

  createSession(dimensionName: string, seeds: string[], rngSeed?: number): Promise<{ session_id: string }> {
    const body: Record<string, unknown> = { dimension_name: dimensionName, seeds };
    if (rngSeed !== undefined) body.rng_seed = rngSeed;
    return this.request("POST", "/sessions", body);
  }

  listSessions(): Promise<{ sessions: SessionSummary[] }> {
    return this.request("GET", "/sessions");
  }

  getSession(sessionId: string): Promise<SessionState> {
    return this.request("GET", `/sessions/${sessionId}`);
  }

  requestRound(sessionId: string, k: number): Promise<RoundResult> {
    return this.request("POST", `/sessions/${sessionId}/round`, { k });
  }

  submitLabels(sessionId: string, accept: string[], reject: string[]): Promise<LabelCounts> {
    return this.request("POST", `/sessions/${sessionId}/labels`, { accept, reject });
  }

  dictionary(sessionId: string, threshold: number): Promise<Dictionary> {
    return this.request("GET", `/sessions/${sessionId}/dictionary?threshold=${threshold}`);
  }

  apply(
    dimensionId: string,
    languageTag: string,
    opts: { k?: number; words?: string[] } = {},
  ): Promise<ApplyResult> {
    const body: Record<string, unknown> = { language_tag: languageTag };
    if (opts.k !== undefined) body.k = opts.k;
    if (opts.words !== undefined) body.words = opts.words;
    return this.request("POST", `/dimensions/${dimensionId}/apply`, body);
  }

  docFeatures(
    dimensionIds: string[],
    docs: { id: string; text: string }[],
    opts: { dedupe?: boolean; keepStopwords?: boolean } = {},
  ): Promise<DocFeaturesResult> {
    return this.request("POST", "/doc-features", {
      dimension_ids: dimensionIds,
      docs,
      dedupe: opts.dedupe ?? false,
      keep_stopwords: opts.keepStopwords ?? false,
    });
  }
}
