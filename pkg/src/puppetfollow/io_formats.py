"""Line-oriented on-disk formats for sequences (templates/clips) and models.

Both formats are plain text: a version line, `key value` header lines, a
`---` separator, then one whitespace-separated record per line. Floats are
written with repr() (shortest decimal that round-trips a double), so
load(save(x)) == x bit-exactly.
"""

from __future__ import annotations

import re

import numpy as np

from .core import (
    ActionTemplate,
    FollowerModel,
    MotionClip,
    validate_template,
)
from .errors import InvariantError, ParseError, VersionError

SEQUENCE_MAGIC = "sequence/1"
MODEL_MAGIC = "model/1"

_ID_RE = re.compile(r"^[A-Za-z0-9_.\-]+$")


def _check_id(name: str) -> str:
    if not _ID_RE.match(name):
        raise InvariantError(f"id {name!r} must match [A-Za-z0-9_.-]+")
    return name


def _fmt(x: float) -> str:
    return repr(float(x))


def _parse_header(lines, expected_magic, required_keys):
    """Consume version line + header up to '---'; returns (dict, body_start)."""
    if not lines:
        raise ParseError("empty file", line=1)
    magic = lines[0].strip()
    if magic != expected_magic:
        raise VersionError(f"unrecognized format version {magic!r}")
    header = {}
    i = 1
    while i < len(lines):
        line = lines[i].strip()
        i += 1
        if line == "---":
            break
        if not line:
            continue
        if " " not in line:
            raise ParseError(f"malformed header line {line!r}", line=i)
        key, value = line.split(" ", 1)
        header[key] = value.strip()
    else:
        raise ParseError("missing '---' separator", line=len(lines))
    for key in required_keys:
        if key not in header:
            raise ParseError(f"missing header field {key!r}", line=i)
    return header, i


def _parse_float(value, key, line):
    try:
        return float(value)
    except ValueError:
        raise ParseError(f"field {key!r}: not a number: {value!r}", line=line) from None


def _parse_int(value, key, line):
    try:
        return int(value)
    except ValueError:
        raise ParseError(f"field {key!r}: not an integer: {value!r}", line=line) from None


def _parse_records(lines, start, d, expect_time):
    records = []
    times = []
    for offset, raw in enumerate(lines[start:]):
        lineno = start + offset + 1
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        want = d + 1 if expect_time else d
        if len(fields) != want:
            raise ParseError(f"expected {want} fields, got {len(fields)}", line=lineno)
        try:
            values = [float(f) for f in fields]
        except ValueError:
            raise ParseError(f"non-numeric value in record", line=lineno) from None
        if expect_time:
            times.append(values[0])
            records.append(values[1:])
        else:
            records.append(values)
    return (np.array(times), np.array(records)) if expect_time else np.array(records)


# ---------------------------------------------------------------- sequences

def save_sequence(seq) -> str:
    """Serialize an ActionTemplate or MotionClip."""
    lines = [SEQUENCE_MAGIC]
    if isinstance(seq, ActionTemplate):
        validate_template(seq)
        lines.append(f"id {_check_id(seq.id)}")
        lines.append("kind action")
        lines.append(f"rate {_fmt(seq.rate)}")
        lines.append(f"dim {seq.d}")
        layout = ",".join(f"{_check_id(s)}:{n}" for s, n in seq.source_layout)
        lines.append(f"layout {layout}")
        lines.append("---")
        for t, row in zip(seq.times, seq.features):
            lines.append(" ".join([_fmt(t)] + [_fmt(v) for v in row]))
    elif isinstance(seq, MotionClip):
        seq.validate()
        lines.append(f"id {_check_id(seq.id)}")
        lines.append("kind motion")
        lines.append(f"rate {_fmt(seq.rate)}")
        lines.append(f"dim {len(seq.channels)}")
        channels = ",".join(f"{k}:{_check_id(n)}" for n, k in seq.channels)
        lines.append(f"channels {channels}")
        lines.append("---")
        for i, row in enumerate(seq.frames):
            t = i / seq.rate
            lines.append(" ".join([_fmt(t)] + [_fmt(v) for v in row]))
    else:
        raise TypeError(f"cannot serialize {type(seq).__name__}")
    return "\n".join(lines) + "\n"


def load_sequence(text: str):
    """Parse a SequenceFile into an ActionTemplate or MotionClip."""
    lines = text.splitlines()
    header, body_start = _parse_header(lines, SEQUENCE_MAGIC, ("id", "kind", "rate", "dim"))
    kind = header["kind"]
    d = _parse_int(header["dim"], "dim", body_start)
    rate = _parse_float(header["rate"], "rate", body_start)
    if kind == "action":
        layout = []
        for part in header.get("layout", "").split(","):
            if not part:
                continue
            if ":" not in part:
                raise ParseError(f"malformed layout entry {part!r}", line=body_start)
            sid, dims = part.rsplit(":", 1)
            layout.append((sid, _parse_int(dims, "layout", body_start)))
        times, features = _parse_records(lines, body_start, d, expect_time=True)
        if len(times) < 2:
            raise ParseError("sequence body needs at least 2 records", line=len(lines))
        seq = ActionTemplate(header["id"], times, features, rate, layout)
        return validate_template(seq)
    if kind == "motion":
        channels = []
        for part in header.get("channels", "").split(","):
            if not part:
                continue
            if ":" not in part:
                raise ParseError(f"malformed channel entry {part!r}", line=body_start)
            ckind, name = part.split(":", 1)
            channels.append((name, ckind))
        times, frames = _parse_records(lines, body_start, d, expect_time=True)
        if len(frames) < 2:
            raise ParseError("sequence body needs at least 2 records", line=len(lines))
        return MotionClip(header["id"], channels, frames, rate).validate()
    raise ParseError(f"unknown sequence kind {kind!r}", line=body_start)


# ------------------------------------------------------------------- models

def save_model(model: FollowerModel) -> str:
    model.validate()
    lines = [
        MODEL_MAGIC,
        f"id {_check_id(model.id)}",
        f"n {model.N}",
        f"d {model.d}",
        f"rate {_fmt(model.rate)}",
        f"sigma2 {_fmt(model.sigma2)}",
        f"a_self {_fmt(model.a_self)}",
        f"a_next {_fmt(model.a_next)}",
        f"p {model.half_window}",
        f"prior_mode {model.prior_mode}",
        "---",
    ]
    for row in model.states:
        lines.append(" ".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def load_model(text: str) -> FollowerModel:
    lines = text.splitlines()
    required = ("id", "n", "d", "rate", "sigma2", "a_self", "a_next", "p", "prior_mode")
    header, body_start = _parse_header(lines, MODEL_MAGIC, required)
    n = _parse_int(header["n"], "n", body_start)
    d = _parse_int(header["d"], "d", body_start)
    states = _parse_records(lines, body_start, d, expect_time=False)
    if len(states) != n:
        raise ParseError(f"header says n={n} but body has {len(states)} records",
                         line=len(lines))
    model = FollowerModel(
        id=header["id"],
        states=states,
        sigma2=_parse_float(header["sigma2"], "sigma2", body_start),
        rate=_parse_float(header["rate"], "rate", body_start),
        half_window=_parse_int(header["p"], "p", body_start),
        prior_mode=header["prior_mode"],
        a_self=_parse_float(header["a_self"], "a_self", body_start),
        a_next=_parse_float(header["a_next"], "a_next", body_start),
    )
    return model.validate()


# -------------------------------------------------------------- file helpers

def read_any(path):
    """Load a sequence or model file by sniffing its version line."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    first = text.split("\n", 1)[0].strip()
    if first == SEQUENCE_MAGIC:
        return load_sequence(text)
    if first == MODEL_MAGIC:
        return load_model(text)
    raise VersionError(f"unrecognized format version {first!r}")


def write_sequence(seq, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(save_sequence(seq))


def read_sequence(path):
    with open(path, "r", encoding="utf-8") as fh:
        return load_sequence(fh.read())


def write_model(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(save_model(model))


def read_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        return load_model(fh.read())
