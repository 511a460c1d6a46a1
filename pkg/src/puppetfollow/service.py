"""Session service: the capture -> train -> perform -> evaluate loop exposed
as a newline-delimited JSON message protocol ("mop/1").

The state machine is transport-agnostic and fully deterministic: handling a
recorded message transcript replays to a byte-identical event transcript.
Timing comes only from client-supplied frame timestamps, never wall-clock.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field

import numpy as np

from .controller import CharacterRig, advance, make_binding, merge_sources
from .core import ActionTemplate, Frame, FollowerModel, MotionClip, validate_template
from .decoder import ConfidenceGates
from .errors import FollowerError
from .training import TrainConfig, train_model

PROTOCOL_VERSION = "mop/1"

# session phases
PHASE_NEW = "new"  # before hello
PHASE_IDLE = "idle"
PHASE_CAPTURING = "capturing"
PHASE_PERFORMING = "performing"


class AssetRegistry:
    """Shared store of templates, models, and clips.

    Concurrent readers are safe; writes (train, capture) take the lock.
    """

    def __init__(self):
        self.templates: dict[str, ActionTemplate] = {}
        self.models: dict[str, FollowerModel] = {}
        self.clips: dict[str, MotionClip] = {}
        self._lock = threading.Lock()

    def put_template(self, t: ActionTemplate):
        with self._lock:
            self.templates[t.id] = t

    def put_model(self, m: FollowerModel):
        with self._lock:
            self.models[m.id] = m

    def put_clip(self, c: MotionClip):
        with self._lock:
            self.clips[c.id] = c

    def summary(self) -> dict:
        with self._lock:
            return {
                "templates": [
                    {"id": t.id, "frames": t.T, "dim": t.d, "rate": t.rate}
                    for t in self.templates.values()
                ],
                "models": [
                    {"id": m.id, "states": m.N, "dim": m.d, "rate": m.rate,
                     "sigma2": m.sigma2, "half_window": m.half_window}
                    for m in self.models.values()
                ],
                "clips": [
                    {"id": c.id, "frames": c.T, "rate": c.rate,
                     "channels": [{"name": n, "kind": k} for n, k in c.channels]}
                    for c in self.clips.values()
                ],
            }


@dataclass
class _Capture:
    template_id: str
    d: int
    rate: float
    layout: list[tuple[str, int]]
    times: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    pending_t: float | None = None
    pending: dict = field(default_factory=dict)


def _train_config_from(obj: dict) -> TrainConfig:
    cfg = TrainConfig()
    if "sigma_mode" in obj:
        cfg.sigma_mode = obj["sigma_mode"]
    if "sigma_value" in obj:
        cfg.sigma_value = float(obj["sigma_value"])
    if "prior_mode" in obj:
        cfg.prior_mode = obj["prior_mode"]
    if "half_window" in obj:
        cfg.half_window = int(obj["half_window"])
    if obj.get("loglik_floor") is not None:
        cfg.loglik_floor = float(obj["loglik_floor"])
    if obj.get("var_threshold") is not None:
        cfg.var_threshold = float(obj["var_threshold"])
    return cfg.validate()


def _num(x):
    """JSON-safe number: non-finite values become None."""
    if x is None:
        return None
    x = float(x)
    return x if np.isfinite(x) else None


class Session:
    """One client's strictly ordered message lane."""

    def __init__(self, registry: AssetRegistry):
        self.registry = registry
        self.phase = PHASE_NEW
        self.capture: _Capture | None = None
        self.rigs: dict[str, CharacterRig] = {}
        self.rig_bindings: dict[str, list[tuple[str, str]]] = {}  # rig -> (model, clip)
        self.performing: list[str] = []
        self.perform_layout: list[tuple[str, int]] | None = None
        self.window_override: int | None = None
        self.gate_overrides: dict = {}
        self._msg_index = 0
        self._pending_t: float | None = None
        self._pending: dict[str, Frame] = {}

    # -- event builders -----------------------------------------------------

    def _ack(self, ref):
        return {"type": "ack", "ref": ref}

    def _error(self, ref, code, message):
        return {"type": "error", "ref": ref, "code": code, "message": message}

    # -- dispatch -----------------------------------------------------------

    def handle(self, msg: dict) -> list[dict]:
        """Process one message, returning the ordered list of events."""
        self._msg_index += 1
        ref = msg.get("ref", self._msg_index)
        mtype = msg.get("type")
        try:
            handler = getattr(self, f"_on_{mtype}", None)
            if handler is None:
                return [self._error(ref, "unknown_message", f"unknown type {mtype!r}")]
            if mtype != "hello" and self.phase == PHASE_NEW:
                return [self._error(ref, "phase_violation", "hello required first")]
            return handler(ref, msg)
        except FollowerError as exc:
            code = type(exc).__name__.lower()
            return [self._error(ref, code, str(exc))]

    def handle_line(self, line: str) -> list[str]:
        """Wire-level entry point: one JSON line in, JSON event lines out."""
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as exc:
            events = [self._error(None, "bad_json", str(exc))]
        else:
            events = self.handle(msg)
        return [encode_event(e) for e in events]

    # -- handlers -----------------------------------------------------------

    def _on_hello(self, ref, msg):
        version = msg.get("protocol_version")
        if version != PROTOCOL_VERSION:
            return [self._error(ref, "version_mismatch",
                                f"need {PROTOCOL_VERSION}, got {version!r}")]
        if self.phase == PHASE_NEW:
            self.phase = PHASE_IDLE
        return [self._ack(ref)]

    def _on_list_assets(self, ref, msg):
        return [{"type": "assets", "ref": ref, **self.registry.summary()}]

    def _on_set_window(self, ref, msg):
        p = int(msg.get("p", 0))
        if p < 1:
            return [self._error(ref, "invariant", "window half-width must be >= 1")]
        # takes effect at the next start_perform; live decoders are untouched
        self.window_override = p
        return [self._ack(ref)]

    def _on_begin_capture(self, ref, msg):
        if self.phase != PHASE_IDLE:
            return [self._error(ref, "phase_violation",
                                f"cannot capture while {self.phase}")]
        try:
            layout = [(str(s), int(n)) for s, n in msg["source_layout"]]
            capture = _Capture(
                template_id=str(msg["template_id"]),
                d=int(msg["d"]),
                rate=float(msg["rate"]),
                layout=layout,
            )
        except (KeyError, TypeError, ValueError) as exc:
            return [self._error(ref, "bad_message", f"begin_capture: {exc}")]
        if sum(n for _, n in capture.layout) != capture.d:
            return [self._error(ref, "dimension_mismatch",
                                "source_layout does not sum to d")]
        self.capture = capture
        self.phase = PHASE_CAPTURING
        return [self._ack(ref)]

    def _on_end_capture(self, ref, msg):
        if self.phase != PHASE_CAPTURING:
            return [self._error(ref, "phase_violation", "not capturing")]
        cap = self.capture
        self.capture = None
        self.phase = PHASE_IDLE
        if cap.pending:
            return [self._error(ref, "missing_source",
                                "capture ended mid-frame: incomplete source set")]
        if len(cap.rows) < 2:
            return [self._error(ref, "degenerate_template",
                                f"captured {len(cap.rows)} frames, need >= 2")]
        template = ActionTemplate(cap.template_id, np.array(cap.times),
                                  np.array(cap.rows), cap.rate, cap.layout)
        validate_template(template)
        self.registry.put_template(template)
        return [self._ack(ref)]

    def _on_frame(self, ref, msg):
        if self.phase == PHASE_CAPTURING:
            return self._capture_frame(ref, msg)
        if self.phase == PHASE_PERFORMING:
            return self._perform_frame(ref, msg)
        return [self._error(ref, "phase_violation", "frame outside capture/perform")]

    def _on_train(self, ref, msg):
        if self.phase != PHASE_IDLE:
            return [self._error(ref, "phase_violation",
                                f"cannot train while {self.phase}")]
        template_id = msg.get("template_id")
        template = self.registry.templates.get(template_id)
        if template is None:
            return [self._error(ref, "unknown_asset",
                                f"no template {template_id!r}")]
        cfg = _train_config_from(msg.get("config", {}) or {})
        model = train_model(template, cfg)  # retraining an id replaces it
        self.registry.put_model(model)
        self.gate_overrides[model.id] = (cfg.loglik_floor, cfg.var_threshold)
        return [{"type": "trained", "ref": ref, "model_id": model.id,
                 "N": model.N, "sigma2": model.sigma2}]

    def _on_bind(self, ref, msg):
        if self.phase != PHASE_IDLE:
            return [self._error(ref, "phase_violation",
                                f"cannot bind while {self.phase}")]
        rig_id = str(msg.get("rig_id"))
        model_id = msg.get("model_id")
        clip_id = msg.get("clip_id")
        if model_id not in self.registry.models:
            return [self._error(ref, "unknown_asset", f"no model {model_id!r}")]
        if clip_id is not None and clip_id not in self.registry.clips:
            return [self._error(ref, "unknown_asset", f"no clip {clip_id!r}")]
        pairs = self.rig_bindings.setdefault(rig_id, [])
        pairs[:] = [(m, c) for m, c in pairs if m != model_id]
        pairs.append((model_id, clip_id))
        return [self._ack(ref)]

    def _on_start_perform(self, ref, msg):
        if self.phase != PHASE_IDLE:
            return [self._error(ref, "phase_violation",
                                f"cannot perform while {self.phase}")]
        rig_ids = msg.get("rig_ids") or []
        for rid in rig_ids:
            if rid not in self.rig_bindings:
                return [self._error(ref, "unknown_asset", f"no rig {rid!r}")]
        layout = msg.get("source_layout")
        self.perform_layout = ([(str(s), int(n)) for s, n in layout]
                               if layout else None)
        self.rigs = {}
        for rid in rig_ids:
            bindings = []
            for model_id, clip_id in self.rig_bindings[rid]:
                model = self.registry.models[model_id]
                if self.window_override is not None:
                    p = min(self.window_override, model.N)
                    model = FollowerModel(
                        id=model.id, states=model.states, sigma2=model.sigma2,
                        rate=model.rate, half_window=p,
                        prior_mode=model.prior_mode,
                        a_self=model.a_self, a_next=model.a_next,
                    )
                clip = self.registry.clips.get(clip_id) if clip_id else None
                floor, varth = self.gate_overrides.get(model_id, (None, None))
                gates = ConfidenceGates.for_model(model, floor, varth)
                bindings.append(make_binding(model, clip, gates))
            self.rigs[rid] = CharacterRig(rid, bindings)
        self.performing = list(rig_ids)
        self.phase = PHASE_PERFORMING
        self._pending_t = None
        self._pending = {}
        return [self._ack(ref)]

    def _on_stop_perform(self, ref, msg):
        if self.phase != PHASE_PERFORMING:
            return [self._error(ref, "phase_violation", "not performing")]
        self.phase = PHASE_IDLE
        self.rigs = {}
        self.performing = []
        return [self._ack(ref)]

    # -- frame plumbing -----------------------------------------------------

    @staticmethod
    def _frame_fields(msg):
        t = float(msg["t"])
        source = str(msg.get("source_id", "default"))
        values = np.asarray(msg["values"], dtype=np.float64)
        return t, source, values

    def _capture_frame(self, ref, msg):
        cap = self.capture
        try:
            t, source, values = self._frame_fields(msg)
        except (KeyError, TypeError, ValueError) as exc:
            return [self._error(ref, "bad_message", f"frame: {exc}")]
        declared = dict(cap.layout)
        if source not in declared:
            return [self._error(ref, "layout_mismatch",
                                f"source {source!r} not in capture layout")]
        if values.shape[0] != declared[source]:
            return [self._error(ref, "dimension_mismatch",
                                f"source {source!r}: got {values.shape[0]} dims, "
                                f"layout says {declared[source]}")]
        if cap.pending_t is not None and t != cap.pending_t:
            return [self._error(ref, "missing_source",
                                f"frame t={t} arrived before t={cap.pending_t} "
                                "completed all sources")]
        cap.pending_t = t
        cap.pending[source] = values
        if len(cap.pending) == len(cap.layout):
            row = np.concatenate([cap.pending[s] for s, _ in cap.layout])
            cap.times.append(t)
            cap.rows.append(row)
            cap.pending_t = None
            cap.pending = {}
        return [self._ack(ref)]

    def _perform_frame(self, ref, msg):
        try:
            t, source, values = self._frame_fields(msg)
        except (KeyError, TypeError, ValueError) as exc:
            return [self._error(ref, "bad_message", f"frame: {exc}")]
        if self.perform_layout is None:
            frame = Frame(t, values)
        else:
            declared = dict(self.perform_layout)
            if source not in declared:
                return [self._error(ref, "layout_mismatch",
                                    f"source {source!r} not in perform layout")]
            if self._pending_t is not None and t != self._pending_t:
                return [self._error(ref, "missing_source",
                                    f"frame t={t} arrived before t={self._pending_t} "
                                    "completed all sources")]
            self._pending_t = t
            self._pending[source] = Frame(t, values)
            if len(self._pending) < len(self.perform_layout):
                return [self._ack(ref)]
            parts = [(s, self._pending[s]) for s, _ in self.perform_layout]
            frame = merge_sources(parts, self.perform_layout)
            self._pending_t = None
            self._pending = {}

        events = []
        for rid in self.performing:
            cmd = advance(self.rigs[rid], frame)
            events.append({
                "type": "output",
                "ref": ref,
                "rig_id": rid,
                "hold": cmd.hold,
                "active_model_id": cmd.active_model_id,
                "mu": _num(cmd.progress_states),
                "progress_seconds": _num(cmd.progress_seconds),
                "loglik_rate": _num(cmd.loglik_rate),
                "var": _num(cmd.var),
                "pose": None if cmd.pose is None else [float(v) for v in cmd.pose],
                "bindings": [
                    {"model_id": o.model_id,
                     "loglik_rate": _num(o.loglik_rate),
                     "recent_rate": _num(o.recent_rate),
                     "mu": _num(o.progress_states),
                     "progress_seconds": _num(o.progress_seconds),
                     "var": _num(o.var),
                     "confident": o.confident}
                    for o in cmd.binding_outputs
                ],
            })
        return events


def encode_event(event: dict) -> str:
    """Deterministic single-line encoding of one event."""
    return json.dumps(event, sort_keys=True, separators=(",", ":"))


def replay_transcript(registry: AssetRegistry, lines) -> list[str]:
    """Feed a recorded message transcript through a fresh session; returns
    the full ordered event transcript."""
    session = Session(registry)
    out = []
    for line in lines:
        line = line.strip()
        if not line:
            continue
        out.extend(session.handle_line(line))
    return out
