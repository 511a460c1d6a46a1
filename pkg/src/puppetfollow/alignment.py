"""Duration normalization: bring an action template and a motion clip to a
common length so the index-wise soft mapping between them holds."""

from __future__ import annotations

import numpy as np

from .core import ActionTemplate, MotionClip
from .errors import DegenerateTarget


def _resample_columns(times: np.ndarray, values: np.ndarray, target_len: int):
    """Linear interpolation of each column onto a uniform time grid.

    Endpoints are preserved exactly; when target_len equals the input length
    the input is returned bit-identical (copied).
    """
    n = len(times)
    if target_len < 2:
        raise DegenerateTarget(f"target length must be >= 2, got {target_len}")
    if target_len == n:
        return times.copy(), values.copy()
    grid = np.linspace(times[0], times[-1], target_len)
    out = np.empty((target_len, values.shape[1]))
    for c in range(values.shape[1]):
        out[:, c] = np.interp(grid, times, values[:, c])
    # np.interp endpoints can pick up rounding from linspace; pin them
    out[0] = values[0]
    out[-1] = values[-1]
    return grid, out


def resample(seq, target_len: int):
    """Resample a template or clip to `target_len` frames.

    Total duration is preserved; the rate is rescaled accordingly.
    """
    if isinstance(seq, ActionTemplate):
        times, values = _resample_columns(seq.times, seq.features, target_len)
        duration = seq.times[-1] - seq.times[0]
        rate = (target_len - 1) / duration if duration > 0 else seq.rate
        if target_len == seq.T:
            rate = seq.rate
        return ActionTemplate(seq.id, times, values, rate, list(seq.source_layout))
    if isinstance(seq, MotionClip):
        times = np.arange(seq.T) / seq.rate
        _, values = _resample_columns(times, seq.frames, target_len)
        duration = (seq.T - 1) / seq.rate
        rate = (target_len - 1) / duration if target_len != seq.T else seq.rate
        return MotionClip(seq.id, list(seq.channels), values, rate)
    raise TypeError(f"cannot resample {type(seq).__name__}")


def align_pair(x: ActionTemplate, y: MotionClip):
    """Bring both sequences to T = max(len(x), len(y)) by upsampling the
    shorter one. Endpoints of both are preserved exactly."""
    target = max(x.T, y.T)
    if x.T != target:
        x = resample(x, target)
    if y.T != target:
        y = resample(y, target)
    return x, y
