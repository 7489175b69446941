/** Incremental server-sent-events parsing over a fetch body stream. */

export interface SseEvent {
  event: string;
  data: unknown;
}

/**
 * Split a raw SSE buffer into complete events plus the unfinished tail.
 * Pure, so the framing rules are testable without a stream.
 */
export function drainSseBuffer(buffer: string): { events: SseEvent[]; rest: string } {
  const frames = buffer.split(/\r?\n\r?\n/);
  const rest = frames.pop() ?? "";
  const events: SseEvent[] = [];
  for (const frame of frames) {
    let event = "message";
    const dataLines: string[] = [];
    for (const line of frame.split(/\r?\n/)) {
      if (line.startsWith("event:")) {
        event = line.slice("event:".length).trim();
      } else if (line.startsWith("data:")) {
        dataLines.push(line.slice("data:".length).trim());
      }
    }
    if (dataLines.length === 0) continue;
    const raw = dataLines.join("\n");
    try {
      events.push({ event, data: JSON.parse(raw) });
    } catch {
      events.push({ event, data: raw });
    }
  }
  return { events, rest };
}

/** Yield SSE events from a response body as they arrive. */
export async function* readSseEvents(
  body: ReadableStream<Uint8Array>,
): AsyncGenerator<SseEvent, void, undefined> {
  const reader = body.getReader();
  const decoder = new TextDecoder("utf-8");
  let buffer = "";
  try {
    while (true) {
      const { value, done } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      const { events, rest } = drainSseBuffer(buffer);
      buffer = rest;
      for (const event of events) yield event;
    }
    // A last event without a trailing blank line still counts.
    const { events } = drainSseBuffer(buffer + "\n\n");
    for (const event of events) yield event;
  } finally {
    reader.releaseLock();
  }
}
