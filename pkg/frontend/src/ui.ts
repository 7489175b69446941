/** DOM assembly and event wiring for the gateway web client. */

import { BusyError, GatewayClient } from "./api.js";
import { PushToTalkRecorder } from "./recorder.js";
import { downscaleImage } from "./resize.js";
import type {
  ClientSession,
  QueryHistoryEntry,
  StageTimings,
  TaskHint,
} from "./types.js";

const TIMING_LABELS: ReadonlyArray<readonly [keyof StageTimings, string]> = [
  ["asr_ms", "transcription"],
  ["tagging_ms", "tagging"],
  ["first_token_ms", "first token"],
  ["total_generation_ms", "generation"],
  ["tts_ms", "speech synthesis"],
];

const TASK_CHOICES: ReadonlyArray<readonly [string, string]> = [
  ["auto", "Route by question"],
  ["scene_understanding", "Scene understanding"],
  ["object_localization", "Object localization"],
  ["risk_assessment", "Risk assessment"],
  ["freeform", "Freeform"],
];

export interface AppDeps {
  recorder?: PushToTalkRecorder;
  downscale?: typeof downscaleImage;
  createObjectUrl?: (blob: Blob) => string;
}

export interface AppElements {
  fileInput: HTMLInputElement;
  preview: HTMLImageElement;
  uploadStatus: HTMLElement;
  retryButton: HTMLButtonElement;
  questionInput: HTMLInputElement;
  taskSelect: HTMLSelectElement;
  askButton: HTMLButtonElement;
  talkButton: HTMLButtonElement;
  answer: HTMLElement;
  status: HTMLElement;
  timings: HTMLUListElement;
  playButton: HTMLButtonElement;
  history: HTMLOListElement;
}

export interface AppHandles {
  elements: AppElements;
  session(): ClientSession | null;
  setImageFile(file: File): Promise<void>;
  retryUpload(): Promise<void>;
  askText(question?: string): Promise<void>;
  pressTalk(): Promise<void>;
  releaseTalk(): Promise<void>;
  playAnswerAudio(): Promise<void>;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [name, value] of Object.entries(attrs)) node.setAttribute(name, value);
  if (text) node.textContent = text;
  return node;
}

function errorText(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}

function defaultObjectUrl(blob: Blob): string {
  return typeof URL !== "undefined" && typeof URL.createObjectURL === "function"
    ? URL.createObjectURL(blob)
    : "";
}

/** Build the app inside `container` and return handles for driving it. */
export function mountApp(
  container: HTMLElement,
  client: GatewayClient,
  deps: AppDeps = {},
): AppHandles {
  const recorder = deps.recorder ?? new PushToTalkRecorder();
  const downscale = deps.downscale ?? downscaleImage;
  const makeObjectUrl = deps.createObjectUrl ?? defaultObjectUrl;

  const els: AppElements = {
    fileInput: el("input", {
      id: "frame-input",
      type: "file",
      accept: "image/*",
      capture: "environment",
    }),
    preview: el("img", {
      class: "preview",
      alt: "Preview of the uploaded scene",
      hidden: "",
    }),
    uploadStatus: el("p", { class: "upload-status", role: "status" }),
    retryButton: el("button", { class: "retry", type: "button", hidden: "" }, "Retry upload"),
    questionInput: el("input", {
      id: "question-input",
      type: "text",
      placeholder: "Can you describe the environment around?",
    }),
    taskSelect: el("select", { id: "task-select" }),
    askButton: el("button", { class: "ask", type: "button" }, "Ask"),
    talkButton: el("button", { class: "talk", type: "button" }, "Hold to talk"),
    answer: el("p", { class: "answer", "aria-live": "polite" }),
    status: el("p", { class: "status", role: "status", "aria-live": "polite" }),
    timings: el("ul", { class: "timings", "aria-label": "Stage timings" }),
    playButton: el("button", { class: "play", type: "button", disabled: "" }, "Play answer audio"),
    history: el("ol", { class: "history" }),
  };
  for (const [value, label] of TASK_CHOICES) {
    els.taskSelect.appendChild(el("option", { value }, label));
  }

  const framePanel = el("section", { class: "frame-panel" });
  framePanel.append(
    el("label", { for: "frame-input" }, "Scene image"),
    els.fileInput,
    els.preview,
    els.uploadStatus,
    els.retryButton,
  );
  const askPanel = el("section", { class: "ask-panel" });
  askPanel.append(
    el("label", { for: "question-input" }, "Question"),
    els.questionInput,
    el("label", { for: "task-select" }, "Task"),
    els.taskSelect,
    els.askButton,
    els.talkButton,
  );
  const answerPanel = el("section", { class: "answer-panel" });
  answerPanel.append(
    el("h2", {}, "Answer"),
    els.answer,
    els.status,
    els.timings,
    els.playButton,
  );
  const historyPanel = el("section", { class: "history-panel" });
  historyPanel.append(el("h2", {}, "History"), els.history);

  const root = el("main", { class: "app" });
  root.append(el("h1", {}, "SightGuide"), framePanel, askPanel, answerPanel, historyPanel);
  container.appendChild(root);

  let session: ClientSession | null = null;
  let streaming = false;
  let pendingFile: File | null = null; // kept so a failed upload can be retried

  function setStatus(text: string): void {
    els.status.textContent = text;
  }

  function setUploadStatus(text: string): void {
    els.uploadStatus.textContent = text;
  }

  async function ensureSession(): Promise<ClientSession> {
    if (!session) {
      const sessionId = await client.createSession();
      session = { sessionId, frameCount: 0, lastFrameId: null, history: [] };
    }
    return session;
  }

  function selectedTask(): TaskHint | undefined {
    const value = els.taskSelect.value;
    return value === "auto" ? undefined : (value as TaskHint);
  }

  function showPreview(file: File): void {
    const url = makeObjectUrl(file);
    if (!url) return;
    els.preview.src = url;
    els.preview.hidden = false;
  }

  async function uploadPending(): Promise<void> {
    if (!pendingFile) return;
    els.retryButton.hidden = true;
    setUploadStatus("Uploading image…");
    try {
      const current = await ensureSession();
      const scaled = await downscale(pendingFile);
      const frame = await client.sendFrame(current.sessionId, scaled.blob, scaled.contentType);
      current.frameCount += 1;
      current.lastFrameId = frame.frameId;
      pendingFile = null;
      setUploadStatus(`Image ready (frame ${frame.frameId}).`);
    } catch (err) {
      els.retryButton.hidden = false;
      setUploadStatus(`Upload failed: ${errorText(err)}`);
    }
  }

  async function setImageFile(file: File): Promise<void> {
    pendingFile = file;
    showPreview(file);
    await uploadPending();
  }

  function renderTimings(timings: StageTimings): void {
    els.timings.textContent = "";
    for (const [key, label] of TIMING_LABELS) {
      const value = timings[key];
      if (value === null || value === undefined) continue;
      els.timings.appendChild(el("li", {}, `${label}: ${value.toFixed(1)} ms`));
    }
  }

  function renderHistory(): void {
    els.history.textContent = "";
    if (!session) return;
    for (const entry of session.history) {
      const summary =
        entry.status === "complete" ? entry.answer : `(${entry.status})`;
      els.history.appendChild(el("li", {}, `${entry.question} — ${summary}`));
    }
  }

  async function runQuery(
    modality: "text" | "audio",
    payload: string | Blob,
    label: string,
  ): Promise<void> {
    if (streaming) {
      setStatus("An answer is still streaming; wait for it to finish.");
      return;
    }
    let current: ClientSession;
    try {
      current = await ensureSession();
    } catch (err) {
      setStatus(`Could not reach the gateway: ${errorText(err)}`);
      return;
    }
    if (current.frameCount === 0) {
      setStatus("Add a scene image before asking.");
      return;
    }

    const entry: QueryHistoryEntry = {
      question: label,
      status: "streaming",
      answer: "",
      queryId: null,
      timings: null,
    };
    current.history.push(entry);
    streaming = true;
    els.askButton.disabled = true;
    els.playButton.disabled = true;
    els.answer.textContent = "";
    els.timings.textContent = "";
    setStatus("Waiting for the first words…");
    try {
      const task = selectedTask();
      const options = task ? { task } : {};
      for await (const event of client.ask(current.sessionId, modality, payload, options)) {
        if (event.event === "chunk") {
          entry.answer += event.text;
          els.answer.textContent = entry.answer;
        } else if (event.event === "done") {
          entry.status = "complete";
          entry.queryId = event.queryId;
          entry.timings = event.timings;
          renderTimings(event.timings);
          els.playButton.disabled = false;
          setStatus("Answer complete.");
        } else {
          entry.status = "failed";
          setStatus(`The ${event.stage} stage failed: ${event.message}`);
        }
      }
    } catch (err) {
      if (err instanceof BusyError) {
        // The server never accepted this query, so drop it from history.
        current.history.pop();
        setStatus("The session is busy with another answer; try again in a moment.");
      } else {
        entry.status = "failed";
        setStatus(`Query failed: ${errorText(err)}`);
      }
    } finally {
      streaming = false;
      els.askButton.disabled = false;
      renderHistory();
    }
  }

  async function askText(question?: string): Promise<void> {
    const text = (question ?? els.questionInput.value).trim();
    if (!text) {
      setStatus("Type a question first.");
      return;
    }
    await runQuery("text", text, text);
  }

  async function pressTalk(): Promise<void> {
    if (recorder.recording || streaming) return;
    try {
      await recorder.start();
      els.talkButton.classList.add("recording");
      setStatus("Recording… release to ask.");
    } catch (err) {
      setStatus(`Microphone unavailable: ${errorText(err)}`);
    }
  }

  async function releaseTalk(): Promise<void> {
    if (!recorder.recording) return;
    els.talkButton.classList.remove("recording");
    const clip = await recorder.stop();
    await runQuery("audio", clip, "(spoken question)");
  }

  async function playAnswerAudio(): Promise<void> {
    const current = session;
    const finished = current?.history.filter((e) => e.queryId !== null).at(-1);
    if (!current || !finished?.queryId) {
      setStatus("No finished answer to play.");
      return;
    }
    setStatus("Fetching audio…");
    try {
      const audio = await client.fetchAnswerAudio(current.sessionId, finished.queryId);
      setStatus(`Audio ready (${audio.contentType}, ${audio.bytes.byteLength} bytes).`);
      const url = makeObjectUrl(new Blob([audio.bytes], { type: audio.contentType }));
      if (url && typeof Audio !== "undefined") {
        // Autoplay may be blocked; the status line above already confirms the fetch.
        try {
          void Promise.resolve(new Audio(url).play()).catch(() => undefined);
        } catch {
          // Some environments stub playback out entirely.
        }
      }
    } catch (err) {
      setStatus(`Audio fetch failed: ${errorText(err)}`);
    }
  }

  els.fileInput.addEventListener("change", () => {
    const file = els.fileInput.files?.[0];
    if (file) void setImageFile(file);
  });
  els.retryButton.addEventListener("click", () => void uploadPending());
  els.askButton.addEventListener("click", () => void askText());
  els.questionInput.addEventListener("keydown", (event) => {
    if (event.key === "Enter") {
      event.preventDefault();
      void askText();
    }
  });
  els.playButton.addEventListener("click", () => void playAnswerAudio());

  els.talkButton.addEventListener("pointerdown", () => void pressTalk());
  els.talkButton.addEventListener("pointerup", () => void releaseTalk());
  els.talkButton.addEventListener("pointerleave", () => void releaseTalk());
  els.talkButton.addEventListener("keydown", (event) => {
    if ((event.key === " " || event.key === "Enter") && !event.repeat) {
      event.preventDefault();
      void pressTalk();
    }
  });
  els.talkButton.addEventListener("keyup", (event) => {
    if (event.key === " " || event.key === "Enter") {
      event.preventDefault();
      void releaseTalk();
    }
  });

  return {
    elements: els,
    session: () => session,
    setImageFile,
    retryUpload: uploadPending,
    askText,
    pressTalk,
    releaseTalk,
    playAnswerAudio,
  };
}
