"""Model construction: one chain state per template frame, fixed 0.5/0.5
transitions, shared-variance Gaussian emissions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    ActionTemplate,
    FollowerModel,
    Frame,
    PRIOR_MODES,
    distance2,
    validate_template,
)
from .errors import DimensionError, InvariantError

SIGMA_FIXED = "fixed"
SIGMA_TEMPLATE_SCALED = "template_scaled"
SIGMA_INCREMENT_SCALED = "increment_scaled"


@dataclass
class TrainConfig:
    """Knobs for model construction and confidence gating.

    sigma_mode "fixed" uses sigma_value as-is; "template_scaled" multiplies
    the template's mean per-dimension variance by sigma_value;
    "increment_scaled" multiplies the mean squared frame-to-frame increment
    instead, which tracks much tighter on slow templates whose global
    variance dwarfs the per-frame motion. loglik_floor
    and var_threshold of None mean "derive from the model" (see
    decoder.ConfidenceGates.for_model).
    """

    sigma_mode: str = SIGMA_TEMPLATE_SCALED
    sigma_value: float = 1.0
    prior_mode: str = "start_state"
    half_window: int = 10
    loglik_floor: float | None = None
    var_threshold: float | None = None

    def validate(self):
        if self.sigma_mode not in (SIGMA_FIXED, SIGMA_TEMPLATE_SCALED,
                                   SIGMA_INCREMENT_SCALED):
            raise InvariantError(f"unknown sigma mode {self.sigma_mode!r}")
        if self.sigma_value <= 0:
            raise InvariantError("sigma value must be > 0")
        if self.prior_mode not in PRIOR_MODES:
            raise InvariantError(f"unknown prior mode {self.prior_mode!r}")
        if self.half_window < 1:
            raise InvariantError("half_window must be >= 1")
        return self


def template_variance(template: ActionTemplate) -> float:
    """Mean per-dimension variance of the template features."""
    return float(np.mean(np.var(template.features, axis=0)))


def template_increment_variance(template: ActionTemplate) -> float:
    """Mean squared frame-to-frame feature increment."""
    return float(np.mean(np.diff(template.features, axis=0) ** 2))


def train_model(template: ActionTemplate, cfg: TrainConfig | None = None) -> FollowerModel:
    """Build a FollowerModel directly from one template.

    N equals the template length, states are the template frames verbatim,
    transitions are the fixed 0.5 self / 0.5 next pair. Deterministic: same
    template and config give a bit-identical model. O(T*d).
    """
    cfg = (cfg or TrainConfig()).validate()
    validate_template(template)

    if cfg.sigma_mode == SIGMA_FIXED:
        sigma2 = cfg.sigma_value
    elif cfg.sigma_mode == SIGMA_INCREMENT_SCALED:
        sigma2 = cfg.sigma_value * template_increment_variance(template)
    else:
        sigma2 = cfg.sigma_value * template_variance(template)
        if sigma2 <= 0:
            raise InvariantError(
                f"template {template.id!r} has zero variance; "
                "use a fixed sigma for constant templates"
            )

    p = min(cfg.half_window, template.T)
    return FollowerModel(
        id=template.id,
        states=template.features.copy(),
        sigma2=sigma2,
        rate=template.rate,
        half_window=p,
        prior_mode=cfg.prior_mode,
    ).validate()


def emission_logprob(model: FollowerModel, j: int, o) -> float:
    """Log of the un-normalized per-frame Gaussian emission at state j (1-based).

    Always <= 0; equals 0 exactly when the observation sits on the state center.
    """
    if not 1 <= j <= model.N:
        raise IndexError(f"state index {j} outside [1, {model.N}]")
    return -distance2(o, model.states[j - 1]) / (2.0 * model.sigma2)


def emission_logprobs(model: FollowerModel, o, lo: int, hi: int) -> np.ndarray:
    """Vectorized emission_logprob for 1-based states lo..hi inclusive."""
    ov = o.features if isinstance(o, Frame) else np.asarray(o, dtype=np.float64)
    if ov.shape[0] != model.d:
        raise DimensionError(f"dimension mismatch: {ov.shape[0]} vs {model.d}")
    diff = model.states[lo - 1 : hi] - ov
    return -np.einsum("ij,ij->i", diff, diff) / (2.0 * model.sigma2)
