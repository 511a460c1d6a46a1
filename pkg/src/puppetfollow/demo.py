"""Built-in demo clips so the browser client has puppets to drive without
authoring files first."""

from __future__ import annotations

import numpy as np

from .core import KIND_BLEND, KIND_JOINT, MotionClip


def wave_clip(T: int = 120, rate: float = 30.0) -> MotionClip:
    """Stick figure waving: arms swing, torso sways."""
    u = np.linspace(0.0, 1.0, T)
    channels = [
        ("l_shoulder", KIND_JOINT),
        ("r_shoulder", KIND_JOINT),
        ("l_elbow", KIND_JOINT),
        ("r_elbow", KIND_JOINT),
        ("torso", KIND_JOINT),
    ]
    frames = np.stack([
        0.4 + 1.6 * np.sin(2 * np.pi * 1.0 * u) * u,       # l_shoulder raises + waves
        -0.4 - 0.3 * np.sin(2 * np.pi * 0.5 * u),          # r_shoulder counter-sway
        0.8 * np.sin(2 * np.pi * 2.0 * u),                 # l_elbow flaps
        0.2 * np.sin(2 * np.pi * 1.0 * u + 1.0),
        0.15 * np.sin(2 * np.pi * 0.5 * u),
    ], axis=1)
    return MotionClip("demo-wave", channels, frames, rate).validate()


def stretch_clip(T: int = 120, rate: float = 30.0) -> MotionClip:
    """Stick figure stretching both arms up and back down."""
    u = np.linspace(0.0, 1.0, T)
    lift = np.sin(np.pi * u)  # up then down
    channels = [
        ("l_shoulder", KIND_JOINT),
        ("r_shoulder", KIND_JOINT),
        ("l_elbow", KIND_JOINT),
        ("r_elbow", KIND_JOINT),
        ("torso", KIND_JOINT),
    ]
    frames = np.stack([
        2.6 * lift,
        -2.6 * lift,
        0.3 * lift,
        -0.3 * lift,
        0.05 * np.sin(2 * np.pi * u),
    ], axis=1)
    return MotionClip("demo-stretch", channels, frames, rate).validate()


def face_clip(T: int = 120, rate: float = 30.0) -> MotionClip:
    """Blendshape-style face: mouth opens, brows raise, then a smile."""
    u = np.linspace(0.0, 1.0, T)
    channels = [
        ("mouth_open", KIND_BLEND),
        ("brow_l", KIND_BLEND),
        ("brow_r", KIND_BLEND),
        ("smile", KIND_BLEND),
    ]
    frames = np.stack([
        np.clip(np.sin(np.pi * u) ** 2, 0, 1),
        np.clip(u * 0.9, 0, 1),
        np.clip(u * 0.9, 0, 1),
        np.clip(np.maximum(0.0, u - 0.5) * 2.0, 0, 1),
    ], axis=1)
    return MotionClip("demo-face", channels, frames, rate).validate()


def demo_clips() -> list[MotionClip]:
    return [wave_clip(), stretch_clip(), face_clip()]
