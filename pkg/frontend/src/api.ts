/** Typed client for the gateway's public HTTP API. */

import { readSseEvents } from "./sse.js";
import type { FrameInfo, QueryEvent, StageTimings, TaskHint } from "./types.js";

export class GatewayError extends Error {
  constructor(
    message: string,
    public readonly code: string,
    public readonly status: number,
  ) {
    super(message);
    this.name = "GatewayError";
  }
}

/** The session already has a query streaming; try again when it finishes. */
export class BusyError extends GatewayError {
  constructor(message: string) {
    super(message, "busy", 409);
    this.name = "BusyError";
  }
}

export interface AskOptions {
  task?: TaskHint;
  signal?: AbortSignal;
}

export interface TimingsReport {
  rows: Array<Record<string, unknown>>;
  table: string;
}

type FetchLike = typeof fetch;

async function raiseForStatus(response: Response): Promise<void> {
  if (response.ok) return;
  let code = "internal";
  let message = `HTTP ${response.status}`;
  try {
    const body = (await response.json()) as { code?: string; message?: string };
    if (body.code) code = body.code;
    if (body.message) message = body.message;
  } catch {
    // non-JSON error body; keep the status text
  }
  if (code === "busy") throw new BusyError(message);
  throw new GatewayError(message, code, response.status);
}

export class GatewayClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = fetch,
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private url(path: string): string {
    return this.baseUrl + path;
  }

  async createSession(): Promise<string> {
    const response = await this.fetchFn(this.url("/v1/sessions"), { method: "POST" });
    await raiseForStatus(response);
    const body = (await response.json()) as { session_id: string };
    return body.session_id;
  }

  async sendFrame(
    sessionId: string,
    image: Blob | ArrayBuffer,
    contentType: string,
  ): Promise<FrameInfo> {
    const response = await this.fetchFn(this.url(`/v1/sessions/${sessionId}/frames`), {
      method: "POST",
      headers: { "Content-Type": contentType },
      body: image,
    });
    await raiseForStatus(response);
    const body = (await response.json()) as { frame_id: string; captured_at: number };
    return { frameId: body.frame_id, capturedAt: body.captured_at };
  }

  /**
   * Start a query and yield its events. The server rejects a second query
   * while one is streaming, surfaced here as BusyError before any event.
   */
  async *ask(
    sessionId: string,
    modality: "text" | "audio",
    payload: string | Blob,
    options: AskOptions = {},
  ): AsyncGenerator<QueryEvent, void, undefined> {
    const params = new URLSearchParams({ modality });
    if (options.task) params.set("task", options.task);
    const contentType = modality === "text" ? "text/plain" : "audio/wav";
    const response = await this.fetchFn(
      this.url(`/v1/sessions/${sessionId}/queries?${params}`),
      {
        method: "POST",
        headers: { "Content-Type": contentType },
        body: payload,
        signal: options.signal ?? null,
      },
    );
    await raiseForStatus(response);
    if (!response.body) throw new GatewayError("response had no body", "protocol", 502);
    for await (const raw of readSseEvents(response.body)) {
      const data = raw.data as Record<string, unknown>;
      if (raw.event === "chunk") {
        yield { event: "chunk", seq: data.seq as number, text: data.text as string };
      } else if (raw.event === "done") {
        yield {
          event: "done",
          queryId: data.query_id as string,
          timings: data.timings as StageTimings,
        };
        return;
      } else if (raw.event === "error") {
        yield {
          event: "error",
          stage: data.stage as string,
          message: data.message as string,
        };
        return;
      }
    }
    throw new GatewayError("stream ended without a terminal event", "protocol", 502);
  }

  async fetchAnswerAudio(
    sessionId: string,
    queryId: string,
  ): Promise<{ bytes: ArrayBuffer; contentType: string }> {
    const response = await this.fetchFn(
      this.url(`/v1/sessions/${sessionId}/queries/${queryId}/audio`),
    );
    await raiseForStatus(response);
    return {
      bytes: await response.arrayBuffer(),
      contentType: response.headers.get("content-type") ?? "",
    };
  }

  async fetchTimingsReport(): Promise<TimingsReport> {
    const response = await this.fetchFn(this.url("/v1/report/timings"));
    await raiseForStatus(response);
    return (await response.json()) as TimingsReport;
  }

  async health(): Promise<boolean> {
    try {
      const response = await this.fetchFn(this.url("/healthz"));
      return response.status === 200;
    } catch {
      return false;
    }
  }
}
