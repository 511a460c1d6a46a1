"""Shared domain types and feature-vector arithmetic.

All feature data is float64 throughout. Types other than DecoderState are
treated as immutable after construction; models are safe to share across
sessions, decoder state is single-writer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateTemplate,
    DimensionError,
    InvariantError,
    NonFinite,
    NonMonotoneTime,
)

PRIOR_MODES = ("start_state", "uniform_first_window")


def _as_features(x) -> np.ndarray:
    if isinstance(x, Frame):
        return x.features
    return np.asarray(x, dtype=np.float64)


@dataclass
class Frame:
    """One timestamped feature vector from a source."""

    t: float
    features: np.ndarray

    def __post_init__(self):
        self.t = float(self.t)
        self.features = np.asarray(self.features, dtype=np.float64).reshape(-1)

    @property
    def d(self) -> int:
        return self.features.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Frame):
            return NotImplemented
        return self.t == other.t and np.array_equal(self.features, other.features)


@dataclass(eq=False)
class ActionTemplate:
    """A recorded action: T frames of d features plus its source layout.

    Stored columnar (times: (T,), features: (T, d)) for cheap numerics;
    use `frames` / `from_frames` at the boundary.
    """

    id: str
    times: np.ndarray
    features: np.ndarray
    rate: float
    source_layout: list[tuple[str, int]] = field(default_factory=list)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64).reshape(-1)
        self.features = np.atleast_2d(np.asarray(self.features, dtype=np.float64))
        self.rate = float(self.rate)
        self.source_layout = [(str(s), int(n)) for s, n in self.source_layout]
        if not self.source_layout:
            self.source_layout = [("default", self.features.shape[1])]

    @classmethod
    def from_frames(cls, id, frames, rate, source_layout=None):
        times = [f.t for f in frames]
        feats = [f.features for f in frames]
        return cls(id, np.array(times), np.array(feats), rate, source_layout or [])

    @property
    def T(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def frames(self) -> list[Frame]:
        return [Frame(t, f) for t, f in zip(self.times, self.features)]

    def __len__(self):
        return self.T

    def __eq__(self, other):
        if not isinstance(other, ActionTemplate):
            return NotImplemented
        return (
            self.id == other.id
            and self.rate == other.rate
            and self.source_layout == other.source_layout
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.features, other.features)
        )


#: Channel kinds for MotionClip tracks.
KIND_JOINT = "joint"
KIND_BLEND = "blend"


@dataclass(eq=False)
class MotionClip:
    """Pre-authored character motion: named keyframe tracks sampled at `rate`.

    `channels` is a list of (name, kind) with kind "joint" (angle track) or
    "blend" (blendshape weight, constrained to [0, 1]). Hybrid clips mix both.
    """

    id: str
    channels: list[tuple[str, str]]
    frames: np.ndarray  # (T, n_channels)
    rate: float

    def __post_init__(self):
        self.channels = [(str(n), str(k)) for n, k in self.channels]
        self.frames = np.atleast_2d(np.asarray(self.frames, dtype=np.float64))
        self.rate = float(self.rate)

    @property
    def T(self) -> int:
        return self.frames.shape[0]

    @property
    def duration(self) -> float:
        return (self.T - 1) / self.rate

    def __len__(self):
        return self.T

    def validate(self):
        if self.T < 2:
            raise InvariantError(f"clip {self.id!r}: need at least 2 frames")
        if len(self.channels) != self.frames.shape[1]:
            raise InvariantError(
                f"clip {self.id!r}: {len(self.channels)} channel names for "
                f"{self.frames.shape[1]} tracks"
            )
        if not np.all(np.isfinite(self.frames)):
            raise NonFinite(f"clip {self.id!r}: non-finite value")
        for c, (name, kind) in enumerate(self.channels):
            if kind not in (KIND_JOINT, KIND_BLEND):
                raise InvariantError(f"clip {self.id!r}: unknown channel kind {kind!r}")
            if kind == KIND_BLEND:
                col = self.frames[:, c]
                if col.min() < 0.0 or col.max() > 1.0:
                    raise InvariantError(
                        f"clip {self.id!r}: blendshape {name!r} outside [0, 1]"
                    )
        return self

    def __eq__(self, other):
        if not isinstance(other, MotionClip):
            return NotImplemented
        return (
            self.id == other.id
            and self.rate == other.rate
            and self.channels == other.channels
            and np.array_equal(self.frames, other.frames)
        )


@dataclass(eq=False)
class FollowerModel:
    """Trained follower: left-to-right chain with Gaussian emissions.

    One state per (aligned) template frame; only self and next transitions.
    Read-only after training.
    """

    id: str
    states: np.ndarray  # (N, d) state centers
    sigma2: float
    rate: float
    half_window: int
    prior: np.ndarray = None  # (N,) initial distribution
    prior_mode: str = "start_state"
    a_self: float = 0.5
    a_next: float = 0.5

    def __post_init__(self):
        self.states = np.atleast_2d(np.asarray(self.states, dtype=np.float64))
        self.sigma2 = float(self.sigma2)
        self.rate = float(self.rate)
        self.half_window = int(self.half_window)
        self.a_self = float(self.a_self)
        self.a_next = float(self.a_next)
        if self.prior is None:
            self.prior = build_prior(self.prior_mode, self.N, self.half_window)
        else:
            self.prior = np.asarray(self.prior, dtype=np.float64).reshape(-1)

    @property
    def N(self) -> int:
        return self.states.shape[0]

    @property
    def d(self) -> int:
        return self.states.shape[1]

    def validate(self):
        if self.N < 2:
            raise InvariantError(f"model {self.id!r}: N must be >= 2")
        if not np.all(np.isfinite(self.states)):
            raise NonFinite(f"model {self.id!r}: non-finite state center")
        if not self.sigma2 > 0:
            raise InvariantError(f"model {self.id!r}: sigma2 must be > 0")
        if abs(self.a_self + self.a_next - 1.0) > 1e-12:
            raise InvariantError(f"model {self.id!r}: a_self + a_next must be 1")
        if self.a_self < 0 or self.a_next < 0:
            raise InvariantError(f"model {self.id!r}: negative transition probability")
        if not (1 <= self.half_window <= self.N):
            raise InvariantError(f"model {self.id!r}: half_window outside [1, N]")
        if self.rate <= 0:
            raise InvariantError(f"model {self.id!r}: rate must be > 0")
        if self.prior.shape != (self.N,):
            raise InvariantError(f"model {self.id!r}: prior length != N")
        if np.any(self.prior < 0) or abs(self.prior.sum() - 1.0) > 1e-9:
            raise InvariantError(f"model {self.id!r}: prior is not a distribution")
        return self

    def __eq__(self, other):
        if not isinstance(other, FollowerModel):
            return NotImplemented
        return (
            self.id == other.id
            and self.sigma2 == other.sigma2
            and self.rate == other.rate
            and self.half_window == other.half_window
            and self.prior_mode == other.prior_mode
            and self.a_self == other.a_self
            and self.a_next == other.a_next
            and np.array_equal(self.states, other.states)
            and np.array_equal(self.prior, other.prior)
        )


def build_prior(mode: str, n: int, half_window: int) -> np.ndarray:
    """Initial state distribution for a left-to-right chain."""
    if mode == "start_state":
        pi = np.zeros(n)
        pi[0] = 1.0
    elif mode == "uniform_first_window":
        w = min(2 * half_window + 1, n)
        pi = np.zeros(n)
        pi[:w] = 1.0 / w
    else:
        raise InvariantError(f"unknown prior mode {mode!r}")
    return pi


@dataclass
class DecoderState:
    """Live forward distribution over the active state window.

    `alpha` holds the normalized mass for 1-based states i_inf..i_sup only;
    everything outside the window is implicitly zero.
    """

    alpha: np.ndarray
    i_inf: int
    i_sup: int
    mu: float
    var: float
    loglik: float
    step_count: int
    #: exponentially weighted recent per-frame log-likelihood (time constant
    #: 2p frames); reacts to the current input where `loglik / step_count`
    #: is diluted by history
    recent_rate: float = 0.0


@dataclass
class FollowerOutput:
    """Per-frame decoder output consumed by the controller and clients."""

    model_id: str
    progress_states: float  # first moment, 1-based state units
    progress_seconds: float
    loglik_rate: float  # accumulated loglik / frames consumed
    var: float
    confident: bool
    recent_rate: float = 0.0  # see DecoderState.recent_rate


def distance2(a, b) -> float:
    """Squared Euclidean distance between two feature vectors (or Frames)."""
    av = _as_features(a)
    bv = _as_features(b)
    if av.shape != bv.shape:
        raise DimensionError(f"dimension mismatch: {av.shape[0]} vs {bv.shape[0]}")
    diff = av - bv
    return float(diff @ diff)


def validate_template(t: ActionTemplate) -> ActionTemplate:
    """Check every ActionTemplate invariant; raise on the first violation."""
    if t.T < 2:
        raise DegenerateTemplate(f"template {t.id!r}: need at least 2 frames, got {t.T}")
    if not np.all(np.isfinite(t.features)) or not np.all(np.isfinite(t.times)):
        raise NonFinite(f"template {t.id!r}: non-finite value")
    if np.any(np.diff(t.times) <= 0):
        raise NonMonotoneTime(f"template {t.id!r}: timestamps not strictly increasing")
    if np.any(t.times < 0):
        raise NonMonotoneTime(f"template {t.id!r}: negative timestamp")
    layout_d = sum(n for _, n in t.source_layout)
    if layout_d != t.d:
        raise InvariantError(
            f"template {t.id!r}: source layout covers {layout_d} dims, features have {t.d}"
        )
    if t.rate <= 0:
        raise InvariantError(f"template {t.id!r}: rate must be > 0")
    return t
