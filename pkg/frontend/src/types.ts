/** Wire types mirrored from the gateway's HTTP API. */

export interface StageTimings {
  asr_ms: number | null;
  tagging_ms: number | null;
  first_token_ms: number | null;
  total_generation_ms: number | null;
  tts_ms: number | null;
}

export interface ChunkEvent {
  event: "chunk";
  seq: number;
  text: string;
}

export interface DoneEvent {
  event: "done";
  queryId: string;
  timings: StageTimings;
}

export interface StageErrorEvent {
  event: "error";
  stage: string;
  message: string;
}

export type QueryEvent = ChunkEvent | DoneEvent | StageErrorEvent;

export interface FrameInfo {
  frameId: string;
  capturedAt: number;
}

export type TaskHint =
  | "scene_understanding"
  | "object_localization"
  | "risk_assessment"
  | "freeform";

export interface QueryHistoryEntry {
  question: string;
  status: "streaming" | "complete" | "failed";
  answer: string;
  queryId: string | null;
  timings: StageTimings | null;
}

/** Client-side mirror of one server session; filled only from API responses. */
export interface ClientSession {
  sessionId: string;
  frameCount: number;
  lastFrameId: string | null;
  history: QueryHistoryEntry[];
}
