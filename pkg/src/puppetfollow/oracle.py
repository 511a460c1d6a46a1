"""Independent brute-force references for tests and acceptance checks.

Nothing here imports the decoder: the full forward recursion and the DTW
alignment are written from scratch so a bug cannot be shared with the code
they verify.
"""

from __future__ import annotations

import numpy as np

from .core import ActionTemplate, Frame, FollowerModel
from .errors import AllZeroMass, DimensionError


def forward_full(model: FollowerModel, observations):
    """Unwindowed, renormalized forward recursion over all N states.

    Returns one (alpha, mu, var, loglik) tuple per observation, with alpha a
    length-N array summing to 1 and loglik the accumulated log of the
    pre-normalization sums.
    """
    n = model.N
    idx = np.arange(1, n + 1, dtype=np.float64)
    results = []
    alpha = None
    loglik = 0.0
    for o in observations:
        ov = o.features if isinstance(o, Frame) else np.asarray(o, dtype=np.float64)
        if ov.shape[0] != model.d:
            raise DimensionError(f"dimension mismatch: {ov.shape[0]} vs {model.d}")
        diff = model.states - ov
        b = np.exp(-np.sum(diff * diff, axis=1) / (2.0 * model.sigma2))
        if alpha is None:
            a = model.prior * b
        else:
            pred = model.a_self * alpha
            pred[1:] += model.a_next * alpha[:-1]
            a = pred * b
        s = a.sum()
        if s <= 0.0:
            raise AllZeroMass("all forward probabilities underflowed")
        alpha = a / s
        loglik += float(np.log(s))
        mu = float(idx @ alpha)
        var = float(((idx - mu) ** 2) @ alpha)
        results.append((alpha.copy(), mu, var, loglik))
    return results


def dtw_align(template: np.ndarray, obs: np.ndarray):
    """Classic DTW with squared Euclidean local cost and steps
    {(1,0), (0,1), (1,1)}.

    Returns (path, cost) where path is a monotone list of 1-based (i, j)
    pairs from (1, 1) to (N, M).
    """
    x = np.asarray(template, dtype=np.float64)
    y = np.asarray(obs, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if y.ndim == 1:
        y = y[:, None]
    if x.shape[1] != y.shape[1]:
        raise DimensionError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    n, m = x.shape[0], y.shape[0]

    # local cost matrix, vectorized
    local = (
        np.sum(x * x, axis=1)[:, None]
        - 2.0 * (x @ y.T)
        + np.sum(y * y, axis=1)[None, :]
    )
    np.maximum(local, 0.0, out=local)

    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, n + 1):
        row = acc[i]
        prev = acc[i - 1]
        lrow = local[i - 1]
        for j in range(1, m + 1):
            row[j] = lrow[j - 1] + min(prev[j], row[j - 1], prev[j - 1])

    # traceback
    path = []
    i, j = n, m
    while True:
        path.append((i, j))
        if i == 1 and j == 1:
            break
        candidates = []
        if i > 1 and j > 1:
            candidates.append((acc[i - 1, j - 1], (i - 1, j - 1)))
        if i > 1:
            candidates.append((acc[i - 1, j], (i - 1, j)))
        if j > 1:
            candidates.append((acc[i, j - 1], (i, j - 1)))
        i, j = min(candidates, key=lambda c: c[0])[1]
    path.reverse()
    return path, float(acc[n, m])


def gen_synthetic(kind: str, T: int, d: int, noise_sigma: float = 0.0,
                  speed: float = 1.0, seed: int = 0, rate: float = 30.0,
                  id: str | None = None) -> ActionTemplate:
    """Deterministic synthetic gesture templates standing in for sensor capture.

    kind "lissajous": per-dimension sinusoids with seeded frequencies/phases;
    "ramp": monotone lines; "random_walk": cumulative seeded noise. `speed`
    rescales the traversed parameter range, not the frame count.
    """
    if T < 2:
        raise ValueError("T must be >= 2")
    if d < 1:
        raise ValueError("d must be >= 1")
    rng = np.random.default_rng(seed)
    u = np.linspace(0.0, 1.0, T)[:, None] * speed  # (T, 1) curve parameter

    if kind == "lissajous":
        freqs = 0.5 + 2.5 * rng.random(d)
        phases = 2.0 * np.pi * rng.random(d)
        amps = 0.5 + rng.random(d)
        feats = amps * np.sin(2.0 * np.pi * freqs * u + phases)
    elif kind == "ramp":
        slopes = 0.5 + rng.random(d)
        offsets = rng.standard_normal(d)
        feats = offsets + slopes * u
    elif kind == "random_walk":
        steps = rng.standard_normal((T, d)) / np.sqrt(T)
        steps[0] = 0.0
        feats = np.cumsum(steps * speed, axis=0)
    else:
        raise ValueError(f"unknown synthetic kind {kind!r}")

    if noise_sigma > 0.0:
        feats = feats + noise_sigma * rng.standard_normal((T, d))

    name = id or f"{kind}-{seed}"
    times = np.arange(T) / rate
    return ActionTemplate(name, times, feats, rate, [("synthetic", d)])
