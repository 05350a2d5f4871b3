import { ApiClient, ApiError } from "./api.js";
import type { MethodName, RetrieveRequest, RetrieveResult } from "./types.js";

export const LAMBDA_STEP = 0.05;
export const DEBOUNCE_MS = 150;

export interface QueryTriple {
  queryImageId: string | null;
  uploadedEmbedding: number[] | null;
  queryText: string;
  lambda: number;
  method: MethodName;
  k: number;
}

export interface ExplorerState extends QueryTriple {
  excludeQuery: boolean;
  /** Ranked results, verbatim from the last applied service response. */
  results: RetrieveResult[];
  /** The query triple the current results were computed for. */
  resultsFor: QueryTriple | null;
  pending: boolean;
  error: string | null;
}

export interface CompareColumn {
  lambda: number;
  results: RetrieveResult[] | null;
  error: string | null;
}

/** Snap to the slider grid and clamp into [0, 1]. */
export function clampLambda(value: number): number {
  const snapped = Math.round(value / LAMBDA_STEP) * LAMBDA_STEP;
  const clamped = Math.min(1, Math.max(0, snapped));
  return Number(clamped.toFixed(2));
}

type Listener = (state: ExplorerState) => void;

/**
 * UI-facing state machine. Every state change that affects the query
 * schedules a debounced retrieve; responses are applied only when their
 * request sequence number is newer than the last applied one, so a slow
 * early response can never overwrite a later one (last issued wins).
 * The store never computes scores; it only stores what the service sent.
 */
export class ExplorerStore {
  readonly state: ExplorerState = {
    queryImageId: null,
    uploadedEmbedding: null,
    queryText: "",
    lambda: 0.5,
    method: "weicom",
    k: 20,
    excludeQuery: false,
    results: [],
    resultsFor: null,
    pending: false,
    error: null,
  };

  private api: ApiClient;
  private debounceMs: number;
  private listeners: Listener[] = [];
  private timer: ReturnType<typeof setTimeout> | null = null;
  private issued = 0;
  private applied = 0;

  constructor(api: ApiClient, debounceMs: number = DEBOUNCE_MS) {
    this.api = api;
    this.debounceMs = debounceMs;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  setLambda(value: number): void {
    this.state.lambda = clampLambda(value);
    this.scheduleQuery();
  }

  setMethod(method: MethodName): void {
    this.state.method = method;
    this.scheduleQuery();
  }

  setQueryImage(id: string | null): void {
    this.state.queryImageId = id;
    if (id !== null) this.state.uploadedEmbedding = null;
    this.scheduleQuery();
  }

  setUploadedEmbedding(embedding: number[] | null): void {
    this.state.uploadedEmbedding = embedding;
    if (embedding !== null) this.state.queryImageId = null;
    this.scheduleQuery();
  }

  setQueryText(text: string): void {
    this.state.queryText = text;
    this.scheduleQuery();
  }

  setK(k: number): void {
    this.state.k = Math.max(1, Math.floor(k));
    this.scheduleQuery();
  }

  setExcludeQuery(exclude: boolean): void {
    this.state.excludeQuery = exclude;
    this.scheduleQuery();
  }

  /** Re-issue the current query immediately (error-banner retry). */
  retry(): void {
    void this.issueQuery();
  }

  private currentTriple(): QueryTriple {
    return {
      queryImageId: this.state.queryImageId,
      uploadedEmbedding: this.state.uploadedEmbedding,
      queryText: this.state.queryText,
      lambda: this.state.lambda,
      method: this.state.method,
      k: this.state.k,
    };
  }

  buildRequest(): RetrieveRequest | null {
    const s = this.state;
    const needsImage = s.method !== "text_only";
    const needsText = s.method !== "image_only";
    const req: RetrieveRequest = {
      method: s.method,
      lambda: s.lambda,
      k: s.k,
      exclude_query_image: s.excludeQuery,
    };
    if (needsImage) {
      if (s.queryImageId !== null) req.query_image_id = s.queryImageId;
      else if (s.uploadedEmbedding !== null) req.query_image_embedding = s.uploadedEmbedding;
      else return null; // incomplete query, nothing to issue
    }
    if (needsText) {
      if (!s.queryText) return null;
      req.query_text = s.queryText;
    }
    return req;
  }

  private scheduleQuery(): void {
    this.notify();
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.issueQuery();
    }, this.debounceMs);
  }

  private async issueQuery(): Promise<void> {
    const req = this.buildRequest();
    if (req === null) return;
    const seq = ++this.issued;
    const triple = this.currentTriple();
    this.state.pending = true;
    this.notify();
    try {
      const response = await this.api.retrieve(req);
      if (seq <= this.applied) return; // stale: a newer response already landed
      this.applied = seq;
      this.state.results = response.results;
      this.state.resultsFor = triple;
      this.state.error = null;
    } catch (err) {
      if (seq <= this.applied) return;
      this.applied = seq;
      // non-blocking banner; previous results stay on screen
      this.state.error = err instanceof ApiError ? err.message : String(err);
    } finally {
      if (seq === this.issued) this.state.pending = false;
      this.notify();
    }
  }

  /** Side-by-side grids for up to four deduplicated lambda values. */
  async compare(lambdas: number[]): Promise<CompareColumn[]> {
    const unique: number[] = [];
    for (const raw of lambdas) {
      const lam = clampLambda(raw);
      if (!unique.includes(lam)) unique.push(lam);
    }
    if (unique.length === 0) {
      throw new Error("pick between one and four lambda values to compare");
    }
    if (unique.length > 4) {
      throw new Error("compare view supports at most four lambda values");
    }
    const base = this.buildRequest();
    if (base === null) {
      throw new Error("select a query image and query text first");
    }
    return Promise.all(
      unique.map(async (lam): Promise<CompareColumn> => {
        try {
          const response = await this.api.retrieve({ ...base, lambda: lam });
          return { lambda: lam, results: response.results, error: null };
        } catch (err) {
          const message = err instanceof ApiError ? err.message : String(err);
          return { lambda: lam, results: null, error: message };
        }
      }),
    );
  }
}
