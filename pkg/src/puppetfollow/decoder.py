"""Streaming forward decoding on a sliding state window.

Per frame: propagate the (self, next) chain over the reachable window,
weight by the Gaussian emissions, renormalize, read out the progression
mean / variance, then re-center the window on the rounded mean. The
pre-normalization sums accumulate into a log-likelihood so long streams
never underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DecoderState, FollowerModel, FollowerOutput, Frame
from .errors import AllZeroMass, DimensionError
from .training import emission_logprobs


@dataclass
class ConfidenceGates:
    """Thresholds deciding whether a decoder output is trustworthy."""

    loglik_floor: float
    var_threshold: float

    @classmethod
    def for_model(cls, model: FollowerModel,
                  loglik_floor=None, var_threshold=None) -> "ConfidenceGates":
        """Scale-aware defaults.

        The per-frame log-likelihood of an on-template stream sits near 0
        while an unrelated stream pays roughly the full d-dimensional
        distance, so the floor scales with d. The variance gate trips when
        the window distribution is close to uniform (tracking lost).
        """
        w = 2 * model.half_window + 1
        if loglik_floor is None:
            loglik_floor = -0.25 * model.d
        if var_threshold is None:
            var_threshold = (w * w) / 12.0
        return cls(loglik_floor, var_threshold)


def window_bounds(mu: float, p: int, n: int, paper_literal: bool = False):
    """1-based inclusive window [i_inf, i_sup] centered on the rounded mean.

    The tail case uses a symmetric 2p+1 window ending at N; `paper_literal`
    reproduces the published fixed-size (N-2, N) tail instead.
    """
    c = int(mu + 0.5)  # ties round toward the larger index (mu >= 1 > 0)
    c = max(1, min(c, n))
    if c <= p:
        return 1, min(2 * p + 1, n)
    if c <= n - p:
        return c - p, c + p
    if paper_literal:
        return max(n - 2, 1), n
    return max(n - 2 * p, 1), n


# shared 1-based state index vector, grown on demand so the per-step readout
# never reallocates it
_IDX = np.arange(1.0, 1025.0)


def _indices(i_inf: int, length: int) -> np.ndarray:
    global _IDX
    if i_inf - 1 + length > len(_IDX):
        _IDX = np.arange(1.0, i_inf + length + 1024.0)
    return _IDX[i_inf - 1 : i_inf - 1 + length]


def window_moments(alpha: np.ndarray, i_inf: int):
    """Mean and variance of a normalized distribution stored from state i_inf."""
    idx = _indices(i_inf, len(alpha))
    mu = float(idx @ alpha)
    var = float(((idx - mu) ** 2) @ alpha)
    return mu, max(var, 0.0)


def outputs(alpha: np.ndarray, i_inf: int, i_sup: int, loglik: float, steps: int):
    """Progression readout from a window distribution: (loglik_rate, mu, var)."""
    mu, var = window_moments(alpha, i_inf)
    return loglik / max(steps, 1), mu, var


def progression_seconds(mu: float, model: FollowerModel) -> float:
    """Convert a progression index (states) to seconds of the template."""
    return mu / model.rate


def _make_output(model, state, gates) -> FollowerOutput:
    rate = state.loglik / state.step_count
    confident = (state.var <= gates.var_threshold
                 and state.recent_rate >= gates.loglik_floor)
    return FollowerOutput(
        model_id=model.id,
        progress_states=state.mu,
        progress_seconds=progression_seconds(state.mu, model),
        loglik_rate=rate,
        var=state.var,
        confident=confident,
        recent_rate=state.recent_rate,
    )


def _truncate(alpha: np.ndarray, lo: int, new_lo: int, new_hi: int) -> np.ndarray:
    """Re-window `alpha` (stored from state lo) onto [new_lo, new_hi]."""
    hi = lo + len(alpha) - 1
    if new_lo >= lo and new_hi <= hi:  # pure shrink: the per-step common case
        out = alpha[new_lo - lo : new_hi - lo + 1]
        s = out.sum()
        if s <= 0.0:
            raise AllZeroMass("window truncation removed all probability mass")
        return out / s
    out = np.zeros(new_hi - new_lo + 1)
    src_lo = max(lo, new_lo)
    src_hi = min(hi, new_hi)
    if src_lo <= src_hi:
        out[src_lo - new_lo : src_hi - new_lo + 1] = alpha[src_lo - lo : src_hi - lo + 1]
    s = out.sum()
    if s <= 0.0:
        raise AllZeroMass("window truncation removed all probability mass")
    return out / s


def init(model: FollowerModel, o, gates: ConfidenceGates | None = None,
         paper_literal: bool = False):
    """First observation: alpha_1(i) = pi_i * b_i(o_1), renormalized."""
    gates = gates or ConfidenceGates.for_model(model)
    nz = np.nonzero(model.prior)[0]
    lo, hi = int(nz[0]) + 1, int(nz[-1]) + 1
    logb = emission_logprobs(model, o, lo, hi)
    alpha = model.prior[lo - 1 : hi] * np.exp(logb)
    s = alpha.sum()
    if s <= 0.0:
        raise AllZeroMass("first observation is incompatibly far from every state")
    alpha /= s
    mu, var = window_moments(alpha, lo)
    i_inf, i_sup = window_bounds(mu, model.half_window, model.N, paper_literal)
    alpha = _truncate(alpha, lo, i_inf, i_sup)
    logs = float(np.log(s))
    state = DecoderState(alpha, i_inf, i_sup, mu, var, logs, 1, recent_rate=logs)
    return state, _make_output(model, state, gates)


def step(state: DecoderState, model: FollowerModel, o,
         gates: ConfidenceGates | None = None, paper_literal: bool = False):
    """One forward-recursion step on the sliding window."""
    gates = gates or ConfidenceGates.for_model(model)
    states = model.states
    n, p = len(states), model.half_window
    lo, hi = state.i_inf, state.i_sup
    new_hi = min(hi + 1, n)  # states reachable through the next transition
    width = new_hi - lo + 1

    pred = np.zeros(width)
    pred[: hi - lo + 1] = model.a_self * state.alpha
    pred[1 : hi - lo + 2] += model.a_next * state.alpha[: width - 1]

    # inlined emission_logprobs: this is the per-frame hot path
    ov = o.features if isinstance(o, Frame) else np.asarray(o, dtype=np.float64)
    if ov.shape[0] != states.shape[1]:
        raise DimensionError(f"dimension mismatch: {ov.shape[0]} vs {states.shape[1]}")
    diff = states[lo - 1 : new_hi] - ov
    logb = np.einsum("ij,ij->i", diff, diff)
    logb *= -1.0 / (2.0 * model.sigma2)

    alpha = pred * np.exp(logb, out=logb)
    s = float(alpha.sum())
    if s <= 0.0:
        raise AllZeroMass("observation is incompatibly far from the active window")
    # moments over the un-normalized mass (the /s folds into each readout;
    # _truncate renormalizes the stored alpha either way)
    idx = _indices(lo, width)
    mu = float(idx @ alpha) / s
    var = max(float(((idx - mu) ** 2) @ alpha) / s, 0.0)
    i_inf, i_sup = window_bounds(mu, p, n, paper_literal)
    alpha = _truncate(alpha, lo, i_inf, i_sup)
    logs = math.log(s)
    gamma = 1.0 / (2.0 * p)
    new_state = DecoderState(
        alpha, i_inf, i_sup, mu, var,
        state.loglik + logs, state.step_count + 1,
        recent_rate=(1.0 - gamma) * state.recent_rate + gamma * logs,
    )
    return new_state, _make_output(model, new_state, gates)


class Decoder:
    """Convenience wrapper owning one DecoderState for one live session."""

    def __init__(self, model: FollowerModel, gates: ConfidenceGates | None = None,
                 paper_literal: bool = False):
        self.model = model
        self.gates = gates or ConfidenceGates.for_model(model)
        self.paper_literal = paper_literal
        self.state: DecoderState | None = None

    def feed(self, o) -> FollowerOutput:
        """Consume one frame; initializes on the first call."""
        if self.state is None:
            self.state, out = init(self.model, o, self.gates, self.paper_literal)
        else:
            self.state, out = step(self.state, self.model, o, self.gates,
                                   self.paper_literal)
        return out

    def reset(self):
        self.state = None
