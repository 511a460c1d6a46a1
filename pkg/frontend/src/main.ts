// Browser app: record pointer gestures, train follower models on the
// service, bind them to demo clips, then perform — the service streams back
// which gesture it believes is happening and how far along it is, and the
// puppet canvas scrubs the bound clip to match.

import { POINTER_TRAIN_CONFIG, SessionClient, Transport } from "./client.js";
import { GestureRecorder, prepare } from "./gesture.js";
import { AssetSummary, BindingOutput, OutputEvent } from "./protocol.js";
import {
  faceShapes,
  poseRecord,
  progressFraction,
  stickFigure,
} from "./puppets.js";

const CAPTURE_RATE = 60; // frames/second for both capture and perform
const RIG_ID = "stage";

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
}

class WebSocketTransport implements Transport {
  constructor(private ws: WebSocket) {}
  send(line: string): void {
    this.ws.send(line);
  }
  close(): void {
    this.ws.close();
  }
}

interface TrainedGesture {
  id: string;
  states: number;
  clipId: string | null;
}

class App {
  client!: SessionClient;
  recorder = new GestureRecorder();
  recording = false;
  performing = false;
  gestures: TrainedGesture[] = [];
  assets: AssetSummary | null = null;
  gestureCount = 0;
  pointer = { x: 0.5, y: 0.5 };
  performTimer: number | null = null;
  performT = 0;

  gestureCanvas = $("gesture-canvas") as HTMLCanvasElement;
  puppetCanvas = $("puppet-canvas") as HTMLCanvasElement;
  statusEl = $("status");
  metersEl = $("meters");
  activeEl = $("active-label");
  progressEl = $("progress-bar") as HTMLProgressElement;

  async start(): Promise<void> {
    const proto = location.protocol === "https:" ? "wss" : "ws";
    const ws = new WebSocket(`${proto}://${location.host}/ws`);
    await new Promise<void>((resolve, reject) => {
      ws.onopen = () => resolve();
      ws.onerror = () => reject(new Error("websocket failed"));
    });
    this.client = new SessionClient(new WebSocketTransport(ws));
    ws.onmessage = (ev) => this.client.handleLine(String(ev.data));
    ws.onclose = () => {
      this.client.fail("disconnected");
      this.setStatus("disconnected — reload to reconnect", true);
    };
    this.client.onOutput = (ev) => this.renderOutput(ev);
    this.client.onError = (code, msg) => this.setStatus(`${code}: ${msg}`, true);
    await this.client.hello();
    this.assets = await this.client.listAssets();
    this.populateClips();
    this.wireControls();
    this.setStatus("connected — record a gesture to begin");
  }

  setStatus(text: string, isError = false): void {
    this.statusEl.textContent = text;
    this.statusEl.classList.toggle("error", isError);
  }

  populateClips(): void {
    const select = $("clip-select") as HTMLSelectElement;
    select.innerHTML = "";
    const none = document.createElement("option");
    none.value = "";
    none.textContent = "(no clip)";
    select.appendChild(none);
    for (const clip of this.assets?.clips ?? []) {
      const opt = document.createElement("option");
      opt.value = clip.id;
      opt.textContent = clip.id;
      select.appendChild(opt);
    }
    if (select.options.length > 1) select.selectedIndex = 1;
  }

  wireControls(): void {
    const canvas = this.gestureCanvas;
    canvas.addEventListener("pointerdown", (e) => {
      if (this.performing) return;
      this.recording = true;
      this.recorder.clear();
      canvas.setPointerCapture(e.pointerId);
      this.addSample(e);
    });
    canvas.addEventListener("pointermove", (e) => {
      const rect = canvas.getBoundingClientRect();
      this.pointer = {
        x: (e.clientX - rect.left) / rect.width,
        y: (e.clientY - rect.top) / rect.height,
      };
      if (this.recording) this.addSample(e);
    });
    canvas.addEventListener("pointerup", () => {
      if (!this.recording) return;
      this.recording = false;
      this.drawGesture();
      void this.trainGesture();
    });
    ($("perform-btn") as HTMLButtonElement).addEventListener("click", () => {
      void (this.performing ? this.stopPerform() : this.startPerform());
    });
    ($("clear-btn") as HTMLButtonElement).addEventListener("click", () => {
      this.gestures = [];
      this.renderMeters([]);
      this.setStatus("gesture list cleared (models remain on the service)");
    });
  }

  addSample(e: PointerEvent): void {
    const rect = this.gestureCanvas.getBoundingClientRect();
    this.recorder.add(
      e.timeStamp / 1000,
      (e.clientX - rect.left) / rect.width,
      (e.clientY - rect.top) / rect.height,
    );
    this.drawGesture();
  }

  drawGesture(): void {
    const ctx = this.gestureCanvas.getContext("2d")!;
    const { width, height } = this.gestureCanvas;
    ctx.clearRect(0, 0, width, height);
    ctx.strokeStyle = this.recording ? "#e0a030" : "#4488cc";
    ctx.lineWidth = 3;
    ctx.beginPath();
    this.recorder.samples.forEach((s, i) => {
      const x = s.x * width;
      const y = s.y * height;
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  }

  async trainGesture(): Promise<void> {
    if (this.recorder.duration < 0.3) {
      this.setStatus("gesture too short — draw for at least 0.3 s", true);
      return;
    }
    const frames = prepare(this.recorder.samples, CAPTURE_RATE);
    const id = `gesture-${++this.gestureCount}`;
    this.setStatus(`training ${id} (${frames.length} frames)…`);
    try {
      await this.client.beginCapture(id, 2, CAPTURE_RATE);
      for (const f of frames) this.client.sendFrame(f.t, [f.x, f.y]);
      await this.client.endCapture();
      const trained = await this.client.train(id, POINTER_TRAIN_CONFIG);
      const clipId = ($("clip-select") as HTMLSelectElement).value || null;
      await this.client.bind(RIG_ID, id, clipId ?? undefined);
      this.gestures.push({ id, states: trained.N, clipId });
      this.setStatus(`trained ${id}: ${trained.N} states` +
        (clipId ? `, bound to ${clipId}` : ""));
      this.renderMeters([]);
    } catch (err) {
      this.setStatus(`train failed: ${(err as Error).message}`, true);
    }
  }

  async startPerform(): Promise<void> {
    if (this.gestures.length === 0) {
      this.setStatus("record at least one gesture first", true);
      return;
    }
    await this.client.startPerform([RIG_ID]);
    this.performing = true;
    this.performT = 0;
    ($("perform-btn") as HTMLButtonElement).textContent = "Stop";
    this.setStatus("performing — move the pointer over the gesture pad");
    this.performTimer = window.setInterval(() => {
      this.performT += 1 / CAPTURE_RATE;
      this.client.sendFrame(this.performT, [this.pointer.x, this.pointer.y]);
    }, 1000 / CAPTURE_RATE);
  }

  async stopPerform(): Promise<void> {
    if (this.performTimer !== null) window.clearInterval(this.performTimer);
    this.performTimer = null;
    this.performing = false;
    ($("perform-btn") as HTMLButtonElement).textContent = "Perform";
    await this.client.stopPerform();
    this.setStatus("stopped");
  }

  renderOutput(ev: OutputEvent): void {
    if (ev.rig_id !== RIG_ID) return;
    const active = this.gestures.find((g) => g.id === ev.active_model_id);
    this.activeEl.textContent = ev.hold ? "HOLD" : ev.active_model_id ?? "—";
    this.activeEl.classList.toggle("hold", ev.hold);
    this.progressEl.value = active
      ? progressFraction(ev.mu, active.states)
      : 0;
    this.renderMeters(ev.bindings);
    this.drawPuppet(ev, active);
  }

  renderMeters(bindings: BindingOutput[]): void {
    const byId = new Map(bindings.map((b) => [b.model_id, b]));
    this.metersEl.innerHTML = "";
    for (const g of this.gestures) {
      const b = byId.get(g.id);
      const row = document.createElement("div");
      row.className = "meter-row" + (b?.confident ? " confident" : "");
      const rate = b?.recent_rate;
      const fill = rate === null || rate === undefined
        ? 0
        : Math.min(1, Math.max(0, 1 + rate / 5)); // −5 nats .. 0 -> 0 .. 1
      row.innerHTML =
        `<span class="meter-name">${g.id}</span>` +
        `<span class="meter-track"><span class="meter-fill" ` +
        `style="width:${(fill * 100).toFixed(1)}%"></span></span>` +
        `<span class="meter-value">${rate == null ? "—" : rate.toFixed(2)}</span>`;
      this.metersEl.appendChild(row);
    }
  }

  drawPuppet(ev: OutputEvent, active: TrainedGesture | undefined): void {
    const ctx = this.puppetCanvas.getContext("2d")!;
    const { width, height } = this.puppetCanvas;
    ctx.clearRect(0, 0, width, height);
    if (!ev.pose || !active?.clipId || !this.assets) return;
    const clip = this.assets.clips.find((c) => c.id === active.clipId);
    if (!clip) return;
    const pose = poseRecord(clip.channels, ev.pose);
    const kinds = new Set(clip.channels.map((c) => c.kind));
    ctx.strokeStyle = ev.hold ? "#888" : "#222";
    ctx.lineWidth = 4;
    ctx.lineCap = "round";
    if (kinds.has("blend")) {
      const f = faceShapes(pose);
      ctx.beginPath(); // head outline
      ctx.arc(width / 2, height / 2, width * 0.35, 0, 2 * Math.PI);
      ctx.stroke();
      const eyeY = height * 0.42;
      for (const [ex, brow] of [[0.38, f.browL], [0.62, f.browR]] as const) {
        ctx.beginPath();
        ctx.arc(width * ex, eyeY, 5, 0, 2 * Math.PI);
        ctx.fill();
        ctx.beginPath();
        ctx.moveTo(width * (ex - 0.06), eyeY - 12 - brow * 14);
        ctx.lineTo(width * (ex + 0.06), eyeY - 12 - brow * 14);
        ctx.stroke();
      }
      const mouthY = height * 0.62;
      ctx.beginPath();
      ctx.ellipse(width / 2, mouthY, width * (0.08 + 0.08 * f.smile),
        4 + f.mouthOpen * height * 0.1, 0, 0, 2 * Math.PI);
      ctx.stroke();
    } else {
      const fig = stickFigure(pose);
      for (const s of fig.segments) {
        ctx.beginPath();
        ctx.moveTo(s.x1 * width, s.y1 * height);
        ctx.lineTo(s.x2 * width, s.y2 * height);
        ctx.stroke();
      }
      ctx.beginPath();
      ctx.arc(fig.head.x * width, (fig.head.y - fig.head.r) * height,
        fig.head.r * width, 0, 2 * Math.PI);
      ctx.stroke();
    }
  }
}

new App().start().catch((err) => {
  const status = document.getElementById("status");
  if (status) {
    status.textContent = `failed to connect: ${err.message}`;
    status.classList.add("error");
  }
});
