// Session client: wraps a line-oriented transport, correlates request/reply
// by ref, and fans output events out to a listener while tracking per-rig
// state so a renderer can always ask "what is rig X doing right now".

import {
  AssetsEvent,
  ClientMessage,
  OutputEvent,
  PROTOCOL_VERSION,
  ServiceEvent,
  SourceLayout,
  TrainConfig,
  TrainedEvent,
  encodeMessage,
  parseEvent,
} from "./protocol.js";

export interface Transport {
  send(line: string): void;
  close(): void;
}

// Pointer gestures are 2-D; the d-scaled default confidence floor is too
// tight there, so every browser-side train uses this explicit floor.
export const POINTER_TRAIN_CONFIG: TrainConfig = {
  sigma_mode: "increment_scaled",
  sigma_value: 4.0,
  loglik_floor: -1.5,
};

interface Pending {
  resolve: (ev: ServiceEvent) => void;
  reject: (err: Error) => void;
}

export class ProtocolError extends Error {
  constructor(public code: string, message: string) {
    super(message);
    this.name = "ProtocolError";
  }
}

export class SessionClient {
  private nextRef = 1;
  private pending = new Map<number, Pending>();
  readonly rigState = new Map<string, OutputEvent>();
  onOutput: ((ev: OutputEvent) => void) | null = null;
  onError: ((code: string, message: string) => void) | null = null;

  constructor(private transport: Transport) {}

  /** Route one raw event line from the transport. */
  handleLine(line: string): void {
    const trimmed = line.trim();
    if (!trimmed) return;
    const ev = parseEvent(trimmed);
    if (ev.type === "output") {
      this.rigState.set(ev.rig_id, ev);
      this.onOutput?.(ev);
      return;
    }
    const ref = ev.ref;
    const waiter = ref !== null && ref !== undefined ? this.pending.get(ref) : undefined;
    if (ev.type === "error") {
      if (waiter && ref !== null) {
        this.pending.delete(ref as number);
        waiter.reject(new ProtocolError(ev.code, ev.message));
      } else {
        this.onError?.(ev.code, ev.message);
      }
      return;
    }
    if (waiter) {
      this.pending.delete(ref as number);
      waiter.resolve(ev);
    }
  }

  /** Reject everything in flight, e.g. when the socket drops. */
  fail(reason: string): void {
    const waiters = [...this.pending.values()];
    this.pending.clear();
    for (const w of waiters) w.reject(new Error(reason));
  }

  private request(build: (ref: number) => ClientMessage): Promise<ServiceEvent> {
    const ref = this.nextRef++;
    const msg = build(ref);
    return new Promise<ServiceEvent>((resolve, reject) => {
      this.pending.set(ref, { resolve, reject });
      try {
        this.transport.send(encodeMessage(msg));
      } catch (err) {
        this.pending.delete(ref);
        reject(err instanceof Error ? err : new Error(String(err)));
      }
    });
  }

  async hello(): Promise<void> {
    await this.request((ref) => ({
      type: "hello",
      ref,
      protocol_version: PROTOCOL_VERSION,
    }));
  }

  async listAssets(): Promise<AssetsEvent> {
    return (await this.request((ref) => ({ type: "list_assets", ref }))) as AssetsEvent;
  }

  async setWindow(p: number): Promise<void> {
    await this.request((ref) => ({ type: "set_window", ref, p }));
  }

  async beginCapture(
    templateId: string,
    d: number,
    rate: number,
    layout: SourceLayout = [["default", d]],
  ): Promise<void> {
    await this.request((ref) => ({
      type: "begin_capture",
      ref,
      template_id: templateId,
      d,
      rate,
      source_layout: layout,
    }));
  }

  async endCapture(): Promise<void> {
    await this.request((ref) => ({ type: "end_capture", ref }));
  }

  async train(
    templateId: string,
    config: TrainConfig = POINTER_TRAIN_CONFIG,
  ): Promise<TrainedEvent> {
    return (await this.request((ref) => ({
      type: "train",
      ref,
      template_id: templateId,
      config,
    }))) as TrainedEvent;
  }

  async bind(rigId: string, modelId: string, clipId?: string): Promise<void> {
    await this.request((ref) => ({
      type: "bind",
      ref,
      rig_id: rigId,
      model_id: modelId,
      ...(clipId !== undefined ? { clip_id: clipId } : {}),
    }));
  }

  async startPerform(rigIds: string[]): Promise<void> {
    this.rigState.clear();
    await this.request((ref) => ({ type: "start_perform", ref, rig_ids: rigIds }));
  }

  async stopPerform(): Promise<void> {
    await this.request((ref) => ({ type: "stop_perform", ref }));
  }

  /** Fire-and-forget: frames are answered by output events, not acks. */
  sendFrame(t: number, values: number[]): void {
    this.transport.send(encodeMessage({ type: "frame", t, values }));
  }

  close(): void {
    this.fail("client closed");
    this.transport.close();
  }
}
