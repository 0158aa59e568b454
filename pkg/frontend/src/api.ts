/** Typed client for the /api/v1 backend. Responses are data-only JSON; a
 * per-topic sequence number discards stale responses from superseded
 * requests (single UI thread, asynchronous calls). */

import {
  DepsPayload,
  NameStats,
  PlotPayload,
  PlotRequest,
  SessionBrief,
  SpanPayload,
  Trackable,
  TreePayload,
} from "./types.js";

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private base: string = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init)
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.base}/api/v1${path}`, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json();
    if (!response.ok) {
      const detail = payload?.detail ?? {};
      throw new ApiError(response.status, detail.code ?? "error", detail.message ?? response.statusText);
    }
    return payload as T;
  }

  createSession(files: Record<string, string>, entry: string): Promise<SessionBrief> {
    return this.request("POST", "/sessions", { files, entry });
  }

  putSpec(sid: string, spec: unknown): Promise<{ spec: unknown; version: number }> {
    return this.request("PUT", `/sessions/${sid}/spec`, spec);
  }

  runTrace(sid: string): Promise<{ ok: boolean; aborted: boolean; error: string | null }> {
    return this.request("POST", `/sessions/${sid}/trace`);
  }

  getTree(sid: string, root = 0, depth?: number): Promise<TreePayload> {
    const q = depth === undefined ? `root=${root}` : `root=${root}&depth=${depth}`;
    return this.request("GET", `/sessions/${sid}/tree?${q}`);
  }

  getPlot(sid: string, query: PlotRequest): Promise<PlotPayload> {
    return this.request("POST", `/sessions/${sid}/plot`, query);
  }

  getDeps(sid: string, block: number): Promise<DepsPayload> {
    return this.request("GET", `/sessions/${sid}/deps/${block}`);
  }

  getSpan(sid: string, block: number): Promise<SpanPayload> {
    return this.request("GET", `/sessions/${sid}/span/${block}`);
  }

  getNames(sid: string): Promise<NameStats[]> {
    return this.request("GET", `/sessions/${sid}/names`);
  }

  getTrackables(sid: string): Promise<Trackable[]> {
    return this.request("GET", `/sessions/${sid}/trackables`);
  }

  getSource(sid: string): Promise<{ entry: string; files: Record<string, string> }> {
    return this.request("GET", `/sessions/${sid}/source`);
  }
}

/** Keeps only the latest in-flight request per topic. */
export class LatestOnly {
  private seq = new Map<string, number>();

  async run<T>(topic: string, work: () => Promise<T>): Promise<T | null> {
    const ticket = (this.seq.get(topic) ?? 0) + 1;
    this.seq.set(topic, ticket);
    const result = await work();
    return this.seq.get(topic) === ticket ? result : null;
  }
}
