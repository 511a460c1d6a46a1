"""Real-time action follower: per-template left-to-right HMMs that estimate
how far along a known action a live input stream is, and use that
progression to scrub motion clips on virtual puppets."""

from .core import (
    ActionTemplate,
    DecoderState,
    FollowerModel,
    FollowerOutput,
    Frame,
    MotionClip,
    distance2,
    validate_template,
)
from .alignment import align_pair, resample
from .training import TrainConfig, emission_logprob, train_model
from .decoder import (
    ConfidenceGates,
    Decoder,
    init,
    progression_seconds,
    step,
    window_bounds,
)
from .controller import (
    CharacterRig,
    PuppetBinding,
    PuppetCommand,
    RigWiring,
    advance,
    make_binding,
    merge_sources,
    motion_frame_at,
    route,
)
from .oracle import dtw_align, forward_full, gen_synthetic
from . import errors, io_formats

__version__ = "0.1.0"

__all__ = [
    "ActionTemplate", "DecoderState", "FollowerModel", "FollowerOutput",
    "Frame", "MotionClip", "distance2", "validate_template",
    "align_pair", "resample",
    "TrainConfig", "emission_logprob", "train_model",
    "ConfidenceGates", "Decoder", "init", "progression_seconds", "step",
    "window_bounds",
    "CharacterRig", "PuppetBinding", "PuppetCommand", "RigWiring", "advance",
    "make_binding", "merge_sources", "motion_frame_at", "route",
    "dtw_align", "forward_full", "gen_synthetic",
    "errors", "io_formats",
]
