"""Maps follower outputs to puppet animation.

A rig owns a set of (model, clip) bindings. Every incoming frame steps all
binding decoders; the binding with the best per-frame average log-likelihood
among the confident ones drives the puppet, with hysteresis and a minimum
dwell so near-ties never flicker. When nothing is confident the rig holds
its last pose.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .alignment import resample
from .core import Frame, FollowerModel, FollowerOutput, MotionClip
from .decoder import ConfidenceGates, Decoder
from .decoder import init as decoder_init
from .errors import AllZeroMass, LayoutMismatch, MissingSource, UnknownId

DEFAULT_HYSTERESIS = 2.0  # nats of loglik_rate a challenger must win by


@dataclass
class PuppetBinding:
    """One trained action wired to one motion clip on a puppet."""

    model: FollowerModel
    clip: MotionClip | None
    decoder: Decoder

    @property
    def id(self) -> str:
        return self.model.id


def make_binding(model: FollowerModel, clip: MotionClip | None,
                 gates: ConfidenceGates | None = None) -> PuppetBinding:
    """Pair a model with a clip, resampling the clip so the index-wise soft
    mapping state i <-> clip frame i holds."""
    if clip is not None and clip.T != model.N:
        clip = resample(clip, model.N)
    return PuppetBinding(model, clip, Decoder(model, gates))


@dataclass
class PuppetCommand:
    """One tick of puppet control emitted to the session/UI layer."""

    rig_id: str
    hold: bool
    active_model_id: str | None
    pose: np.ndarray | None
    progress_states: float | None
    progress_seconds: float | None
    loglik_rate: float | None
    var: float | None
    binding_outputs: list[FollowerOutput] = field(default_factory=list)


@dataclass
class CharacterRig:
    """A puppet with its bindings and arbitration state."""

    id: str
    bindings: list[PuppetBinding]
    hysteresis_margin: float = DEFAULT_HYSTERESIS
    min_dwell: int | None = None  # frames; default 2 * max half_window
    active: str | None = None
    last_pose: np.ndarray | None = None
    _since_switch: int = 0

    def __post_init__(self):
        if self.min_dwell is None:
            p = max((b.model.half_window for b in self.bindings), default=1)
            self.min_dwell = 2 * p

    def binding(self, model_id: str) -> PuppetBinding:
        for b in self.bindings:
            if b.id == model_id:
                return b
        raise UnknownId(f"rig {self.id!r} has no binding {model_id!r}")

    def reset(self):
        for b in self.bindings:
            b.decoder.reset()
        self.active = None
        self.last_pose = None
        self._since_switch = 0


def merge_sources(parts, layout, period: float | None = None) -> Frame:
    """Concatenate per-source frames into one combined frame.

    `parts` is an ordered list of (source_id, Frame) that must match the
    declared layout order and per-source dimensionalities exactly.
    """
    declared = [s for s, _ in layout]
    got = [s for s, _ in parts]
    missing = [s for s in declared if s not in got]
    if missing:
        raise MissingSource(f"missing source(s) this tick: {', '.join(missing)}")
    if got != declared:
        raise LayoutMismatch(f"sources {got} do not match layout order {declared}")
    pieces = []
    for (sid, frame), (_, dims) in zip(parts, layout):
        if frame.d != dims:
            raise LayoutMismatch(f"source {sid!r}: got {frame.d} dims, layout says {dims}")
        pieces.append(frame.features)
    times = [frame.t for _, frame in parts]
    if period is not None and max(times) - min(times) > period:
        raise LayoutMismatch("source timestamps spread over more than one frame period")
    return Frame(max(times), np.concatenate(pieces))


def motion_frame_at(clip: MotionClip, s: float) -> np.ndarray:
    """Clip pose at `s` seconds: linear interpolation between the two nearest
    keyframes, clamped to the clip's ends."""
    x = max(s, 0.0) * clip.rate
    if x >= clip.T - 1:
        return clip.frames[-1].copy()
    i = int(np.floor(x))
    frac = x - i
    if frac == 0.0:
        return clip.frames[i].copy()
    return (1.0 - frac) * clip.frames[i] + frac * clip.frames[i + 1]


RESEED_MARGIN = 1.0  # nats a fresh start must win by to displace a lost track


def _step_binding(binding: PuppetBinding, frame: Frame) -> FollowerOutput:
    """Feed one frame; a lost decoder resets so it can re-enter via its prior.

    An unconfident binding can also get stuck mid-template (poor but non-zero
    mass), which would blind it to its own gesture restarting. So while
    unconfident it probes a fresh init from the prior each frame and adopts
    it when the new evidence clearly beats the stale track.
    """
    try:
        out = binding.decoder.feed(frame)
    except AllZeroMass:
        binding.decoder.reset()
        return FollowerOutput(
            model_id=binding.id,
            progress_states=1.0,
            progress_seconds=0.0,
            loglik_rate=-np.inf,
            var=0.0,
            confident=False,
            recent_rate=-np.inf,
        )
    if not out.confident:
        try:
            state, probe = decoder_init(binding.model, frame, binding.decoder.gates)
        except AllZeroMass:
            return out
        if probe.recent_rate > out.recent_rate + RESEED_MARGIN:
            binding.decoder.state = state
            return probe
    return out


def choose_active(active: str | None, confident: dict[str, FollowerOutput],
                  dwell_elapsed: bool, margin: float) -> str | None:
    """Arbitration rule, pure so its properties are directly testable.

    A confident incumbent keeps the rig unless a challenger strictly beats
    it by `margin` after the dwell; without an incumbent the best confident
    binding is adopted immediately. Shifting every recent_rate by a constant
    never changes the outcome.
    """
    if active is not None and active not in confident:
        active = None  # invariant: the active binding's decoder is confident
    if not confident:
        return active
    best_id = max(confident, key=lambda mid: (confident[mid].recent_rate, mid))
    if active is None:
        return best_id
    if (best_id != active and dwell_elapsed
            and confident[best_id].recent_rate
            > confident[active].recent_rate + margin):
        return best_id
    return active


def advance(rig: CharacterRig, frame: Frame,
            frames_by_binding: dict[str, Frame] | None = None) -> PuppetCommand:
    """Step every binding on the frame, arbitrate, and emit the puppet command.

    `frames_by_binding` optionally overrides the input per binding id (used
    when different users drive disjoint binding subsets of one rig).
    """
    outs: dict[str, FollowerOutput] = {}
    for b in rig.bindings:
        f = frames_by_binding.get(b.id, frame) if frames_by_binding else frame
        outs[b.id] = _step_binding(b, f)
    rig._since_switch += 1

    confident = {mid: o for mid, o in outs.items() if o.confident}
    new_active = choose_active(rig.active, confident,
                               rig._since_switch >= rig.min_dwell,
                               rig.hysteresis_margin)
    if new_active != rig.active:
        rig._since_switch = 0
    rig.active = new_active

    if rig.active is None:
        return PuppetCommand(
            rig_id=rig.id, hold=True, active_model_id=None,
            pose=None if rig.last_pose is None else rig.last_pose.copy(),
            progress_states=None, progress_seconds=None,
            loglik_rate=None, var=None,
            binding_outputs=list(outs.values()),
        )

    out = outs[rig.active]
    binding = rig.binding(rig.active)
    pose = None
    if binding.clip is not None:
        # soft mapping is index-wise: state mu corresponds to clip frame mu
        pose = motion_frame_at(binding.clip, (out.progress_states - 1.0) / binding.clip.rate)
        rig.last_pose = pose
    return PuppetCommand(
        rig_id=rig.id, hold=False, active_model_id=rig.active,
        pose=pose, progress_states=out.progress_states,
        progress_seconds=out.progress_seconds,
        loglik_rate=out.loglik_rate, var=out.var,
        binding_outputs=list(outs.values()),
    )


@dataclass
class RigWiring:
    """How one rig is fed: which users, and whether their frames combine.

    combined=True merges the users' frames into one feature vector in
    `layout` order; otherwise each user drives the binding subset named in
    `subsets` (or all bindings, for a single user).
    """

    rig_id: str
    user_ids: list[str]
    combined: bool = False
    layout: list[tuple[str, int]] | None = None
    subsets: dict[str, list[str]] | None = None  # user_id -> binding model ids


def route(users, rigs: list[CharacterRig], wiring: list[RigWiring]) -> list[PuppetCommand]:
    """Fan user frames out to rigs per the declared wiring.

    One user on many rigs replays the same frame into each; many users on
    one rig either merge into a combined frame or drive disjoint binding
    subsets.
    """
    frames = dict(users)
    rigs_by_id = {r.id: r for r in rigs}
    commands = []
    for w in wiring:
        if w.rig_id not in rigs_by_id:
            raise UnknownId(f"unknown rig {w.rig_id!r}")
        rig = rigs_by_id[w.rig_id]
        for uid in w.user_ids:
            if uid not in frames:
                raise UnknownId(f"unknown user {uid!r}")
        if w.combined:
            layout = w.layout or [(u, frames[u].d) for u in w.user_ids]
            merged = merge_sources([(u, frames[u]) for u in w.user_ids], layout)
            commands.append(advance(rig, merged))
        elif len(w.user_ids) == 1:
            commands.append(advance(rig, frames[w.user_ids[0]]))
        else:
            if not w.subsets:
                raise LayoutMismatch(
                    f"rig {w.rig_id!r}: multiple non-combined users require subsets"
                )
            per_binding = {}
            for uid in w.user_ids:
                for mid in w.subsets.get(uid, []):
                    per_binding[mid] = frames[uid]
            any_frame = frames[w.user_ids[0]]
            commands.append(advance(rig, any_frame, frames_by_binding=per_binding))
    return commands
