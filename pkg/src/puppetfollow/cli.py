"""Command-line entry point: synth / train / follow / bench / serve.

Exit codes: 0 success, 2 input error (missing/unparseable files, bad flags),
3 data mismatch (dimensions), 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import io_formats
from .core import ActionTemplate
from .decoder import Decoder
from .errors import (
    DimensionError,
    FollowerError,
    InvariantError,
    ParseError,
    VersionError,
)
from .oracle import gen_synthetic
from .report import format_report, render_figures, report_prefix, run_follow
from .training import (
    SIGMA_FIXED,
    SIGMA_INCREMENT_SCALED,
    SIGMA_TEMPLATE_SCALED,
    TrainConfig,
    train_model,
)

EXIT_INPUT = 2
EXIT_MISMATCH = 3
EXIT_INTERNAL = 4


def _read_sequence(path):
    if path == "-":
        return io_formats.load_sequence(sys.stdin.read())
    return io_formats.read_sequence(path)


def _parse_sigma(spec: str):
    """--sigma fixed:0.5, template_scaled:1.0, or increment_scaled:4.0"""
    mode, _, value = spec.partition(":")
    if mode not in (SIGMA_FIXED, SIGMA_TEMPLATE_SCALED, SIGMA_INCREMENT_SCALED):
        raise argparse.ArgumentTypeError(f"unknown sigma mode {mode!r}")
    try:
        return mode, float(value) if value else 1.0
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad sigma value {value!r}") from None


def cmd_train(args) -> int:
    template = _read_sequence(args.template)
    if not isinstance(template, ActionTemplate):
        raise ParseError(f"{args.template} is not an action sequence")
    mode, value = args.sigma
    cfg = TrainConfig(sigma_mode=mode, sigma_value=value,
                      prior_mode=args.prior, half_window=args.window)
    model = train_model(template, cfg)
    out = args.out or (template.id + ".model")
    io_formats.write_model(model, out)
    print(f"N {model.N}")
    print(f"d {model.d}")
    print(f"sigma2 {model.sigma2!r}")
    print(f"p {model.half_window}")
    print(f"wrote {out}")
    return 0


def cmd_follow(args) -> int:
    models = [io_formats.read_model(p) for p in args.models]
    seq = _read_sequence(args.input)
    if not isinstance(seq, ActionTemplate):
        raise ParseError(f"{args.input} is not an action sequence")
    for m in models:
        if m.d != seq.d:
            raise DimensionError(
                f"model {m.id!r} has d={m.d}, input has d={seq.d}")
    result = run_follow(models, seq,
                        loglik_floor=args.loglik_floor,
                        var_threshold=args.var_threshold,
                        hysteresis=args.hysteresis)
    text = format_report(result, models)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text)
        if not args.no_figures:
            for p in render_figures(result, report_prefix(args.report)):
                print(f"wrote {p}")
        print(f"wrote {args.report}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_bench(args) -> int:
    print(f"states {args.states}")
    print(f"dims {args.dims}")
    print(f"window {args.window}")
    print(f"frames {args.frames}")
    if args.frames <= 0:
        return 0
    rng = np.random.default_rng(args.seed)
    template = gen_synthetic("lissajous", args.states, args.dims, seed=args.seed)
    cfg = TrainConfig(half_window=args.window)
    model = train_model(template, cfg)

    # ramp through the template, then sit on the final state; keeps the
    # forward mass alive however many steps we take
    feats = template.features
    noise = 0.01 * rng.standard_normal((args.frames, args.dims))
    obs = np.empty((args.frames, args.dims))
    for i in range(args.frames):
        obs[i] = feats[min(i, args.states - 1)] + noise[i]

    dec = Decoder(model)
    dec.feed(obs[0])
    laps = np.empty(args.frames - 1)
    for i in range(1, args.frames):
        t0 = time.perf_counter()
        dec.feed(obs[i])
        laps[i - 1] = time.perf_counter() - t0

    ms = laps * 1e3
    print(f"mean_ms {ms.mean()!r}")
    print(f"p50_ms {np.percentile(ms, 50)!r}")
    print(f"p95_ms {np.percentile(ms, 95)!r}")
    print(f"p99_ms {np.percentile(ms, 99)!r}")
    print(f"steps_per_s {1.0 / laps.mean()!r}")
    return 0


def cmd_synth(args) -> int:
    template = gen_synthetic(args.kind, args.frames, args.dims,
                             noise_sigma=args.noise, speed=args.speed,
                             seed=args.seed, rate=args.rate, id=args.id)
    io_formats.write_sequence(template, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_serve(args) -> int:
    import asyncio

    from .net import create_http_app, load_assets, load_demo_assets, run_tcp_server
    from .service import AssetRegistry

    registry = AssetRegistry()
    if args.assets:
        load_assets(registry, args.assets)
    if args.demo:
        load_demo_assets(registry)

    if args.http:
        import uvicorn

        app = create_http_app(registry, args.frontend)
        uvicorn.run(app, host=args.host, port=args.http, log_level="warning")
        return 0

    print(f"listening on {args.host}:{args.port}")
    asyncio.run(run_tcp_server(registry, args.host, args.port))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="puppetfollow",
        description="Train per-action follower models and drive puppets with them.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="build a model file from an action sequence")
    p.add_argument("template", help="action SequenceFile path, or - for stdin")
    p.add_argument("--out", help="model output path (default <id>.model)")
    p.add_argument("--sigma", type=_parse_sigma, default=(SIGMA_TEMPLATE_SCALED, 1.0),
                   help="fixed:VALUE, template_scaled:FACTOR, or increment_scaled:FACTOR")
    p.add_argument("--prior", default="start_state",
                   choices=("start_state", "uniform_first_window"))
    p.add_argument("--window", type=int, default=10, help="half-window p in states")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("follow", help="replay an input stream against model(s)")
    p.add_argument("models", nargs="+", help="model file paths")
    p.add_argument("input", help="input SequenceFile path, or - for stdin")
    p.add_argument("--report", help="write the table here instead of stdout")
    p.add_argument("--no-figures", action="store_true",
                   help="skip PNG figures next to the report")
    p.add_argument("--loglik-floor", type=float, default=None)
    p.add_argument("--var-threshold", type=float, default=None)
    p.add_argument("--hysteresis", type=float, default=None)
    p.set_defaults(func=cmd_follow)

    p = sub.add_parser("bench", help="time the per-frame decoder step")
    p.add_argument("--states", type=int, default=600)
    p.add_argument("--dims", type=int, default=60)
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--frames", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("synth", help="generate a synthetic action sequence")
    p.add_argument("kind", choices=("lissajous", "ramp", "random_walk"))
    p.add_argument("out", help="output SequenceFile path")
    p.add_argument("--frames", type=int, default=120)
    p.add_argument("--dims", type=int, default=2)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--speed", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rate", type=float, default=30.0)
    p.add_argument("--id", default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="run the session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=7733, help="TCP protocol port")
    p.add_argument("--http", type=int, default=None,
                   help="serve WebSocket bridge + UI on this port instead")
    p.add_argument("--frontend", default=None, help="built browser client directory")
    p.add_argument("--assets", default=None, help="directory of .seq/.model files")
    p.add_argument("--demo", action="store_true", help="preload demo clips")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: no such file: {exc.filename}", file=sys.stderr)
        return EXIT_INPUT
    except (ParseError, VersionError, InvariantError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DimensionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except FollowerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
