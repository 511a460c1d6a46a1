// Message and event shapes for the "mop/1" session protocol: one JSON object
// per line over any ordered text transport (WebSocket here, TCP in tests).

export const PROTOCOL_VERSION = "mop/1";

export type SourceLayout = [string, number][];

export interface TrainConfig {
  sigma_mode?: string;
  sigma_value?: number;
  prior_mode?: string;
  half_window?: number;
  loglik_floor?: number | null;
  var_threshold?: number | null;
}

export type ClientMessage =
  | { type: "hello"; ref: number; protocol_version: string }
  | { type: "list_assets"; ref: number }
  | { type: "set_window"; ref: number; p: number }
  | {
      type: "begin_capture";
      ref: number;
      template_id: string;
      d: number;
      rate: number;
      source_layout: SourceLayout;
    }
  | { type: "end_capture"; ref: number }
  | { type: "train"; ref: number; template_id: string; config?: TrainConfig }
  | { type: "bind"; ref: number; rig_id: string; model_id: string; clip_id?: string }
  | {
      type: "start_perform";
      ref: number;
      rig_ids: string[];
      source_layout?: SourceLayout;
    }
  | { type: "stop_perform"; ref: number }
  | { type: "frame"; ref?: number; t: number; source_id?: string; values: number[] };

export interface AckEvent {
  type: "ack";
  ref: number;
}

export interface ErrorEvent {
  type: "error";
  ref: number | null;
  code: string;
  message: string;
}

export interface TrainedEvent {
  type: "trained";
  ref: number;
  model_id: string;
  N: number;
  sigma2: number;
}

export interface AssetSummary {
  templates: { id: string; frames: number; dim: number; rate: number }[];
  models: {
    id: string;
    states: number;
    dim: number;
    rate: number;
    sigma2: number;
    half_window: number;
  }[];
  clips: {
    id: string;
    frames: number;
    rate: number;
    channels: { name: string; kind: string }[];
  }[];
}

export interface AssetsEvent extends AssetSummary {
  type: "assets";
  ref: number;
}

export interface BindingOutput {
  model_id: string;
  loglik_rate: number | null;
  recent_rate: number | null;
  mu: number | null;
  progress_seconds: number | null;
  var: number | null;
  confident: boolean;
}

export interface OutputEvent {
  type: "output";
  ref: number;
  rig_id: string;
  hold: boolean;
  active_model_id: string | null;
  mu: number | null;
  progress_seconds: number | null;
  loglik_rate: number | null;
  var: number | null;
  pose: number[] | null;
  bindings: BindingOutput[];
}

export type ServiceEvent =
  | AckEvent
  | ErrorEvent
  | TrainedEvent
  | AssetsEvent
  | OutputEvent;

export function encodeMessage(msg: ClientMessage): string {
  return JSON.stringify(msg);
}

export function parseEvent(line: string): ServiceEvent {
  let obj: unknown;
  try {
    obj = JSON.parse(line);
  } catch (e) {
    throw new Error(`unparseable event line: ${line.slice(0, 80)}`);
  }
  if (typeof obj !== "object" || obj === null || typeof (obj as any).type !== "string") {
    throw new Error(`event without a type: ${line.slice(0, 80)}`);
  }
  return obj as ServiceEvent;
}
