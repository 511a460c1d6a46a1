"""Follow-run reporting: per-frame delimited table, summary statistics, and
matplotlib figures rendered next to the report."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .controller import CharacterRig, advance, make_binding
from .core import ActionTemplate, Frame
from .decoder import ConfidenceGates

HOLD = "-"


@dataclass
class FollowResult:
    """Everything one follow run produced."""

    times: np.ndarray
    active: list[str]  # active model id per frame, HOLD when none
    mu: dict[str, np.ndarray]  # per model: progression trajectory
    loglik_rate: dict[str, np.ndarray]
    var: dict[str, np.ndarray]
    slopes: dict[str, float] = field(default_factory=dict)
    histogram: dict[str, int] = field(default_factory=dict)


def slope_fit(mu: np.ndarray) -> float:
    """Least-squares slope of a progression trajectory vs. frame index."""
    t = np.arange(len(mu), dtype=np.float64)
    if len(mu) < 2:
        return 0.0
    t0 = t - t.mean()
    denom = float(t0 @ t0)
    return float(t0 @ (mu - mu.mean())) / denom if denom else 0.0


def run_follow(models, template: ActionTemplate,
               loglik_floor: float | None = None,
               var_threshold: float | None = None,
               hysteresis: float | None = None) -> FollowResult:
    """Replay an input sequence against a bank of models."""
    bindings = [
        make_binding(m, None, ConfidenceGates.for_model(m, loglik_floor, var_threshold))
        for m in models
    ]
    rig = CharacterRig("follow", bindings)
    if hysteresis is not None:
        rig.hysteresis_margin = hysteresis

    ids = [m.id for m in models]
    active = []
    mu = {i: [] for i in ids}
    llr = {i: [] for i in ids}
    var = {i: [] for i in ids}
    for t, feats in zip(template.times, template.features):
        cmd = advance(rig, Frame(t, feats))
        active.append(cmd.active_model_id or HOLD)
        for out in cmd.binding_outputs:
            mu[out.model_id].append(out.progress_states)
            llr[out.model_id].append(out.loglik_rate)
            var[out.model_id].append(out.var)

    result = FollowResult(
        times=template.times.copy(),
        active=active,
        mu={i: np.array(v) for i, v in mu.items()},
        loglik_rate={i: np.array(v) for i, v in llr.items()},
        var={i: np.array(v) for i, v in var.items()},
    )
    for i in ids:
        result.slopes[i] = slope_fit(result.mu[i])
    for a in active:
        result.histogram[a] = result.histogram.get(a, 0) + 1
    return result


def format_report(result: FollowResult, models) -> str:
    """Line-oriented report: one row per frame, `#` summary block at the end.

    Rows reuse the sequence-body layout (whitespace-separated values) so the
    numeric columns can be re-ingested for plotting.
    """
    def _f(x) -> str:
        return repr(float(x))  # plain-float repr even for numpy scalars

    by_id = {m.id: m for m in models}
    lines = ["# columns: t active mu mu_over_f loglik_rate var"]
    for k, t in enumerate(result.times):
        a = result.active[k]
        ref = models[0].id if a == HOLD else a
        label = HOLD if a == HOLD else a
        m = result.mu[ref][k]
        lines.append(
            f"{_f(t)} {label} {_f(m)} {_f(m / by_id[ref].rate)} "
            f"{_f(result.loglik_rate[ref][k])} {_f(result.var[ref][k])}"
        )
    lines.append("# summary")
    for mid in sorted(result.slopes):
        lines.append(f"# slope {mid} {result.slopes[mid]!r}")
    for mid in sorted(result.histogram):
        lines.append(f"# active {mid} {result.histogram[mid]}")
    return "\n".join(lines) + "\n"


def render_figures(result: FollowResult, out_prefix: str) -> list[str]:
    """Render progression / likelihood / variance figures as PNGs.

    Returns the written paths; figures land alongside the delimited report.
    """
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    paths = []
    frames = np.arange(len(result.times))

    fig, ax = plt.subplots(figsize=(8, 4.5))
    for mid, mu in sorted(result.mu.items()):
        ax.plot(frames, mu, label=f"{mid} (slope {result.slopes[mid]:.3f})")
    ax.set_xlabel("input frame")
    ax.set_ylabel("progression index (states)")
    ax.set_title("progression vs. input frame")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = out_prefix + ".progression.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    paths.append(path)

    fig, axes = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    for mid in sorted(result.loglik_rate):
        axes[0].plot(frames, result.loglik_rate[mid], label=mid)
        axes[1].plot(frames, result.var[mid], label=mid)
    axes[0].set_ylabel("avg log-likelihood / frame")
    axes[1].set_ylabel("progression variance")
    axes[1].set_xlabel("input frame")
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    path = out_prefix + ".confidence.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    paths.append(path)
    return paths


def report_prefix(report_path: str) -> str:
    base, ext = os.path.splitext(report_path)
    return base if ext else report_path
