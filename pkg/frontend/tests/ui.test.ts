import { beforeEach, describe, expect, test, vi } from "vitest";

import { GatewayClient } from "../src/api.js";
import type { PushToTalkRecorder } from "../src/recorder.js";
import type { AppDeps } from "../src/ui.js";
import { mountApp } from "../src/ui.js";

interface RecordedCall {
  url: string;
  init?: RequestInit;
}

type FakeResponse = {
  ok: boolean;
  status: number;
  headers: { get(name: string): string | null };
  json(): Promise<unknown>;
  arrayBuffer(): Promise<ArrayBuffer>;
  body: ReadableStream<Uint8Array> | null;
};

function jsonResponse(status: number, payload: unknown): FakeResponse {
  return {
    ok: status >= 200 && status < 300,
    status,
    headers: { get: () => "application/json" },
    json: async () => payload,
    arrayBuffer: async () => new ArrayBuffer(0),
    body: null,
  };
}

function controlledStream(): {
  body: ReadableStream<Uint8Array>;
  push: (frame: string) => void;
  close: () => void;
} {
  let controller!: ReadableStreamDefaultController<Uint8Array>;
  const body = new ReadableStream<Uint8Array>({
    start(c) {
      controller = c;
    },
  });
  const encoder = new TextEncoder();
  return {
    body,
    push: (frame) => controller.enqueue(encoder.encode(frame)),
    close: () => controller.close(),
  };
}

function chunkFrame(seq: number, text: string): string {
  return `event: chunk\ndata: ${JSON.stringify({ seq, text })}\n\n`;
}

function doneFrame(queryId: string): string {
  const timings = {
    asr_ms: null,
    tagging_ms: 41.9,
    first_token_ms: 367.5,
    total_generation_ms: 900.04,
    tts_ms: null,
  };
  return `event: done\ndata: ${JSON.stringify({ query_id: queryId, timings })}\n\n`;
}

function errorFrame(stage: string, message: string): string {
  return `event: error\ndata: ${JSON.stringify({ stage, message })}\n\n`;
}

const RIFF_BYTES = new Uint8Array([82, 73, 70, 70, 4, 0, 0, 0]);

interface HarnessOptions {
  frames?: (call: RecordedCall, count: number) => FakeResponse;
  queries?: (call: RecordedCall) => FakeResponse;
  deps?: AppDeps;
}

function makeHarness(options: HarnessOptions = {}) {
  const calls: RecordedCall[] = [];
  let frameCount = 0;
  const stream = controlledStream();
  const fetchFn = (async (url: RequestInfo | URL, init?: RequestInit) => {
    const call = { url: String(url), init };
    calls.push(call);
    const path = String(url);
    if (path.endsWith("/v1/sessions")) {
      return jsonResponse(200, { session_id: "s-1" }) as unknown as Response;
    }
    if (path.includes("/frames")) {
      frameCount += 1;
      const make =
        options.frames ??
        (() => jsonResponse(200, { frame_id: `f-${frameCount}`, captured_at: 10.5 }));
      return make(call, frameCount) as unknown as Response;
    }
    if (path.includes("/audio")) {
      return {
        ok: true,
        status: 200,
        headers: { get: () => "audio/wav" },
        json: async () => ({}),
        arrayBuffer: async () => RIFF_BYTES.buffer.slice(0) as ArrayBuffer,
        body: null,
      } as unknown as Response;
    }
    if (path.includes("/queries")) {
      const make =
        options.queries ??
        (() =>
          ({
            ok: true,
            status: 200,
            headers: { get: () => "text/event-stream" },
            json: async () => ({}),
            arrayBuffer: async () => new ArrayBuffer(0),
            body: stream.body,
          }) as FakeResponse);
      return make(call) as unknown as Response;
    }
    throw new Error(`unexpected url: ${path}`);
  }) as typeof fetch;

  const container = document.createElement("div");
  document.body.appendChild(container);
  const client = new GatewayClient("http://gw:8080", fetchFn);
  const handles = mountApp(container, client, {
    downscale: async (blob) => ({ blob, contentType: blob.type || "image/jpeg" }),
    createObjectUrl: () => "",
    ...options.deps,
  });
  return { handles, calls, stream, container };
}

function makeImageFile(): File {
  return new File([new Uint8Array([255, 216, 1, 2])], "street.jpg", {
    type: "image/jpeg",
  });
}

function queryCalls(calls: RecordedCall[]): RecordedCall[] {
  return calls.filter((c) => c.url.includes("/queries") && !c.url.includes("/audio"));
}

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("frame upload", () => {
  test("creates a session lazily and reports the stored frame", async () => {
    const { handles, calls } = makeHarness();
    expect(handles.session()).toBeNull();
    await handles.setImageFile(makeImageFile());
    expect(handles.session()?.sessionId).toBe("s-1");
    expect(handles.session()?.frameCount).toBe(1);
    expect(handles.session()?.lastFrameId).toBe("f-1");
    expect(handles.elements.uploadStatus.textContent).toContain("frame f-1");
    const frameCall = calls.find((c) => c.url.includes("/frames"));
    expect(frameCall?.init?.headers).toEqual({ "Content-Type": "image/jpeg" });
  });

  test("shows the preview when object URLs are available", async () => {
    const { handles } = makeHarness({ deps: { createObjectUrl: () => "blob:preview" } });
    await handles.setImageFile(makeImageFile());
    expect(handles.elements.preview.hidden).toBe(false);
    expect(handles.elements.preview.getAttribute("src")).toBe("blob:preview");
  });

  test("offers a retry after a failed upload and recovers", async () => {
    let attempts = 0;
    const { handles } = makeHarness({
      frames: (_call, count) => {
        attempts = count;
        return count === 1
          ? jsonResponse(502, { code: "protocol", message: "tagger gave a bad reply" })
          : jsonResponse(200, { frame_id: "f-2", captured_at: 11.0 });
      },
    });
    await handles.setImageFile(makeImageFile());
    expect(handles.elements.uploadStatus.textContent).toContain("Upload failed");
    expect(handles.elements.retryButton.hidden).toBe(false);
    expect(handles.session()?.frameCount).toBe(0);

    await handles.retryUpload();
    expect(attempts).toBe(2);
    expect(handles.elements.retryButton.hidden).toBe(true);
    expect(handles.session()?.frameCount).toBe(1);
    expect(handles.elements.uploadStatus.textContent).toContain("frame f-2");
  });
});

describe("asking by text", () => {
  test("renders chunks incrementally and finishes with timings", async () => {
    const { handles, stream } = makeHarness();
    await handles.setImageFile(makeImageFile());

    const asking = handles.askText("Can you describe the environment around?");
    stream.push(chunkFrame(0, "A crowded "));
    await vi.waitFor(() =>
      expect(handles.elements.answer.textContent).toBe("A crowded "),
    );
    expect(handles.elements.askButton.disabled).toBe(true);
    expect(handles.elements.playButton.disabled).toBe(true);

    stream.push(chunkFrame(1, "shopping street."));
    await vi.waitFor(() =>
      expect(handles.elements.answer.textContent).toBe("A crowded shopping street."),
    );

    stream.push(doneFrame("q-1"));
    stream.close();
    await asking;

    expect(handles.elements.answer.textContent).toBe("A crowded shopping street.");
    expect(handles.elements.status.textContent).toBe("Answer complete.");
    expect(handles.elements.askButton.disabled).toBe(false);
    expect(handles.elements.playButton.disabled).toBe(false);

    const timings = Array.from(handles.elements.timings.querySelectorAll("li")).map(
      (li) => li.textContent,
    );
    expect(timings).toEqual([
      "tagging: 41.9 ms",
      "first token: 367.5 ms",
      "generation: 900.0 ms",
    ]);

    const entry = handles.session()?.history.at(-1);
    expect(entry?.status).toBe("complete");
    expect(entry?.queryId).toBe("q-1");
    expect(entry?.answer).toBe("A crowded shopping street.");
    expect(handles.elements.history.textContent).toContain("A crowded shopping street.");
  });

  test("passes the selected task hint through", async () => {
    const { handles, calls, stream } = makeHarness();
    await handles.setImageFile(makeImageFile());
    handles.elements.taskSelect.value = "risk_assessment";

    const asking = handles.askText("Is it safe ahead?");
    stream.push(doneFrame("q-1"));
    stream.close();
    await asking;

    expect(queryCalls(calls)[0]?.url).toContain("task=risk_assessment");
  });

  test("requires a question", async () => {
    const { handles, calls } = makeHarness();
    await handles.askText("   ");
    expect(handles.elements.status.textContent).toBe("Type a question first.");
    expect(calls).toHaveLength(0);
  });

  test("requires a frame before asking", async () => {
    const { handles, calls } = makeHarness();
    await handles.askText("What is ahead?");
    expect(handles.elements.status.textContent).toBe("Add a scene image before asking.");
    expect(queryCalls(calls)).toHaveLength(0);
    expect(handles.session()?.history).toHaveLength(0);
  });

  test("refuses to start a second query while one is streaming", async () => {
    const { handles, calls, stream } = makeHarness();
    await handles.setImageFile(makeImageFile());

    const asking = handles.askText("First question");
    stream.push(chunkFrame(0, "First "));
    await vi.waitFor(() => expect(handles.elements.answer.textContent).toBe("First "));

    await handles.askText("Second question");
    expect(handles.elements.status.textContent).toBe(
      "An answer is still streaming; wait for it to finish.",
    );
    expect(queryCalls(calls)).toHaveLength(1);
    expect(handles.session()?.history).toHaveLength(1);

    stream.push(doneFrame("q-1"));
    stream.close();
    await asking;
    expect(handles.elements.status.textContent).toBe("Answer complete.");
  });

  test("reports a busy rejection without recording a query", async () => {
    const { handles } = makeHarness({
      queries: () => jsonResponse(409, { code: "busy", message: "already streaming" }),
    });
    await handles.setImageFile(makeImageFile());
    await handles.askText("Anyone there?");
    expect(handles.elements.status.textContent).toContain("busy");
    expect(handles.session()?.history).toHaveLength(0);
    expect(handles.elements.askButton.disabled).toBe(false);
  });

  test("surfaces a stage error and marks the query failed", async () => {
    const { handles, stream } = makeHarness();
    await handles.setImageFile(makeImageFile());

    const asking = handles.askText("Describe the scene");
    stream.push(chunkFrame(0, "Partial "));
    stream.push(errorFrame("generation", "backend dropped the stream"));
    stream.close();
    await asking;

    expect(handles.elements.status.textContent).toBe(
      "The generation stage failed: backend dropped the stream",
    );
    const entry = handles.session()?.history.at(-1);
    expect(entry?.status).toBe("failed");
    expect(handles.elements.history.textContent).toContain("(failed)");
    expect(handles.elements.askButton.disabled).toBe(false);
  });
});

describe("push to talk", () => {
  function stubRecorder(clip: Blob): PushToTalkRecorder {
    let active = false;
    return {
      get recording() {
        return active;
      },
      start: async () => {
        active = true;
      },
      stop: async () => {
        active = false;
        return clip;
      },
    } as unknown as PushToTalkRecorder;
  }

  test("records while held and asks with the recorded audio", async () => {
    const clip = new Blob([RIFF_BYTES], { type: "audio/wav" });
    const { handles, calls, stream } = makeHarness({
      deps: { recorder: stubRecorder(clip) },
    });
    await handles.setImageFile(makeImageFile());

    await handles.pressTalk();
    expect(handles.elements.status.textContent).toBe("Recording… release to ask.");
    expect(handles.elements.talkButton.classList.contains("recording")).toBe(true);

    const releasing = handles.releaseTalk();
    stream.push(chunkFrame(0, "You are on a street."));
    stream.push(doneFrame("q-1"));
    stream.close();
    await releasing;

    const call = queryCalls(calls)[0];
    expect(call?.url).toContain("modality=audio");
    expect(call?.init?.body).toBe(clip);
    expect(handles.session()?.history.at(-1)?.question).toBe("(spoken question)");
    expect(handles.elements.talkButton.classList.contains("recording")).toBe(false);
  });

  test("is keyboard operable via space press and release", async () => {
    const clip = new Blob([RIFF_BYTES], { type: "audio/wav" });
    const { handles, calls, stream } = makeHarness({
      deps: { recorder: stubRecorder(clip) },
    });
    await handles.setImageFile(makeImageFile());

    handles.elements.talkButton.dispatchEvent(
      new KeyboardEvent("keydown", { key: " ", bubbles: true }),
    );
    await vi.waitFor(() =>
      expect(handles.elements.status.textContent).toBe("Recording… release to ask."),
    );

    handles.elements.talkButton.dispatchEvent(
      new KeyboardEvent("keyup", { key: " ", bubbles: true }),
    );
    stream.push(doneFrame("q-1"));
    stream.close();
    await vi.waitFor(() => expect(queryCalls(calls)).toHaveLength(1));
    await vi.waitFor(() =>
      expect(handles.elements.status.textContent).toBe("Answer complete."),
    );
  });

  test("reports microphone failures without crashing", async () => {
    const recorder = {
      get recording() {
        return false;
      },
      start: async () => {
        throw new Error("permission denied");
      },
      stop: async () => new Blob(),
    } as unknown as PushToTalkRecorder;
    const { handles } = makeHarness({ deps: { recorder } });
    await handles.pressTalk();
    expect(handles.elements.status.textContent).toContain("permission denied");
  });
});

describe("answer audio", () => {
  test("fetches the spoken answer and reports its type", async () => {
    const { handles, calls, stream } = makeHarness();
    await handles.setImageFile(makeImageFile());

    const asking = handles.askText("Describe the scene");
    stream.push(chunkFrame(0, "Words."));
    stream.push(doneFrame("q-7"));
    stream.close();
    await asking;

    await handles.playAnswerAudio();
    expect(handles.elements.status.textContent).toBe(
      `Audio ready (audio/wav, ${RIFF_BYTES.byteLength} bytes).`,
    );
    const audioCall = calls.find((c) => c.url.includes("/audio"));
    expect(audioCall?.url).toBe("http://gw:8080/v1/sessions/s-1/queries/q-7/audio");
  });

  test("explains when there is nothing to play", async () => {
    const { handles } = makeHarness();
    await handles.playAnswerAudio();
    expect(handles.elements.status.textContent).toBe("No finished answer to play.");
  });
});

describe("accessibility contract", () => {
  test("streams into a polite live region and uses status roles", () => {
    const { handles } = makeHarness();
    expect(handles.elements.answer.getAttribute("aria-live")).toBe("polite");
    expect(handles.elements.status.getAttribute("role")).toBe("status");
    expect(handles.elements.uploadStatus.getAttribute("role")).toBe("status");
  });

  test("labels every control", () => {
    const { container } = makeHarness();
    for (const id of ["frame-input", "question-input", "task-select"]) {
      expect(container.querySelector(`label[for="${id}"]`)).not.toBeNull();
      expect(container.querySelector(`#${id}`)).not.toBeNull();
    }
  });
});
