/** Push-to-talk microphone capture, encoded to WAV on release. */

import { encodeWav } from "./wav.js";

export interface RecorderDeps {
  getUserMedia?: (constraints: MediaStreamConstraints) => Promise<MediaStream>;
  createAudioContext?: () => AudioContext;
}

/**
 * Records while the talk control is held. Samples are pulled off a script
 * processor so the capture works without MediaRecorder codec support; the
 * result is always a WAV blob the gateway's transcriber accepts.
 */
export class PushToTalkRecorder {
  private stream: MediaStream | null = null;
  private context: AudioContext | null = null;
  private processor: ScriptProcessorNode | null = null;
  private source: MediaStreamAudioSourceNode | null = null;
  private chunks: Float32Array[] = [];
  private sampleRate = 0;

  constructor(private readonly deps: RecorderDeps = {}) {}

  get recording(): boolean {
    return this.context !== null;
  }

  async start(): Promise<void> {
    if (this.recording) return;
    const getUserMedia =
      this.deps.getUserMedia ??
      ((constraints) => navigator.mediaDevices.getUserMedia(constraints));
    const createContext = this.deps.createAudioContext ?? (() => new AudioContext());

    this.stream = await getUserMedia({ audio: true });
    this.context = createContext();
    this.sampleRate = this.context.sampleRate;
    this.chunks = [];

    this.source = this.context.createMediaStreamSource(this.stream);
    this.processor = this.context.createScriptProcessor(4096, 1, 1);
    this.processor.onaudioprocess = (event) => {
      this.chunks.push(new Float32Array(event.inputBuffer.getChannelData(0)));
    };
    this.source.connect(this.processor);
    this.processor.connect(this.context.destination);
  }

  /** Stop capture and return the recording as a WAV blob. */
  async stop(): Promise<Blob> {
    const context = this.context;
    if (!context) throw new Error("not recording");

    this.processor?.disconnect();
    this.source?.disconnect();
    this.stream?.getTracks().forEach((track) => track.stop());
    await context.close();

    const total = this.chunks.reduce((n, chunk) => n + chunk.length, 0);
    const samples = new Float32Array(total);
    let offset = 0;
    for (const chunk of this.chunks) {
      samples.set(chunk, offset);
      offset += chunk.length;
    }

    const wav = encodeWav(samples, this.sampleRate);
    this.stream = null;
    this.context = null;
    this.processor = null;
    this.source = null;
    this.chunks = [];
    return new Blob([wav], { type: "audio/wav" });
  }
}
