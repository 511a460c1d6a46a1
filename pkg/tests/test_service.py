import json

import numpy as np
import pytest

from puppetfollow.demo import demo_clips
from puppetfollow.oracle import gen_synthetic
from puppetfollow.service import (
    PROTOCOL_VERSION,
    AssetRegistry,
    Session,
    encode_event,
    replay_transcript,
)


def hello():
    return {"type": "hello", "ref": 1, "protocol_version": PROTOCOL_VERSION}


def session():
    s = Session(AssetRegistry())
    assert s.handle(hello()) == [{"type": "ack", "ref": 1}]
    return s


def capture_template(s, template_id="tpl", T=50, d=2, rate=30.0, seed=0):
    t = gen_synthetic("lissajous", T, d, seed=seed)
    assert s.handle({"type": "begin_capture", "ref": 2, "template_id": template_id,
                     "d": d, "rate": rate,
                     "source_layout": [["u", d]]})[0]["type"] == "ack"
    for k, row in enumerate(t.features):
        ev = s.handle({"type": "frame", "t": k / rate, "source_id": "u",
                       "values": list(row)})
        assert ev[0]["type"] == "ack"
    assert s.handle({"type": "end_capture", "ref": 3})[0]["type"] == "ack"
    return t


# ------------------------------------------------------------------ phases

def test_hello_required_first():
    s = Session(AssetRegistry())
    ev = s.handle({"type": "list_assets", "ref": 1})
    assert ev[0]["type"] == "error" and ev[0]["code"] == "phase_violation"


def test_hello_version_mismatch():
    s = Session(AssetRegistry())
    ev = s.handle({"type": "hello", "ref": 1, "protocol_version": "mop/2"})
    assert ev[0]["code"] == "version_mismatch"


def test_unknown_message_type():
    s = session()
    ev = s.handle({"type": "frobnicate", "ref": 9})
    assert ev[0]["code"] == "unknown_message"


def test_bad_json_line():
    s = session()
    lines = s.handle_line("{not json")
    assert json.loads(lines[0])["code"] == "bad_json"


def test_frame_outside_capture_or_perform():
    s = session()
    ev = s.handle({"type": "frame", "t": 0.0, "values": [1.0]})
    assert ev[0]["code"] == "phase_violation"


# ----------------------------------------------------------- capture/train

def test_capture_then_train():
    s = session()
    capture_template(s, T=50, d=2)
    ev = s.handle({"type": "train", "ref": 4, "template_id": "tpl",
                   "config": {"sigma_mode": "increment_scaled", "sigma_value": 4.0}})
    assert ev == [{"type": "trained", "ref": 4, "model_id": "tpl",
                   "N": 50, "sigma2": ev[0]["sigma2"]}]
    assert s.registry.models["tpl"].N == 50


def test_capture_multi_source_merges_in_layout_order():
    s = session()
    assert s.handle({"type": "begin_capture", "ref": 2, "template_id": "duo",
                     "d": 3, "rate": 10.0,
                     "source_layout": [["a", 2], ["b", 1]]})[0]["type"] == "ack"
    for k in range(3):
        s.handle({"type": "frame", "t": k / 10.0, "source_id": "b",
                  "values": [float(k)]})
        s.handle({"type": "frame", "t": k / 10.0, "source_id": "a",
                  "values": [10.0 + k, 20.0 + k]})
    assert s.handle({"type": "end_capture", "ref": 3})[0]["type"] == "ack"
    t = s.registry.templates["duo"]
    assert np.array_equal(t.features[0], [10.0, 20.0, 0.0])
    assert t.source_layout == [("a", 2), ("b", 1)]


def test_capture_wrong_source_rejected():
    s = session()
    s.handle({"type": "begin_capture", "ref": 2, "template_id": "x", "d": 1,
              "rate": 10.0, "source_layout": [["u", 1]]})
    ev = s.handle({"type": "frame", "t": 0.0, "source_id": "ghost", "values": [1.0]})
    assert ev[0]["code"] == "layout_mismatch"


def test_capture_incomplete_frame_set_rejected_at_end():
    s = session()
    s.handle({"type": "begin_capture", "ref": 2, "template_id": "x", "d": 2,
              "rate": 10.0, "source_layout": [["a", 1], ["b", 1]]})
    s.handle({"type": "frame", "t": 0.0, "source_id": "a", "values": [1.0]})
    ev = s.handle({"type": "end_capture", "ref": 3})
    assert ev[0]["code"] == "missing_source"


def test_capture_too_short():
    s = session()
    s.handle({"type": "begin_capture", "ref": 2, "template_id": "x", "d": 1,
              "rate": 10.0, "source_layout": [["u", 1]]})
    s.handle({"type": "frame", "t": 0.0, "source_id": "u", "values": [1.0]})
    ev = s.handle({"type": "end_capture", "ref": 3})
    assert ev[0]["code"] == "degenerate_template"


def test_train_unknown_template():
    s = session()
    ev = s.handle({"type": "train", "ref": 4, "template_id": "nope"})
    assert ev[0]["code"] == "unknown_asset"


# ---------------------------------------------------------- bind / perform

def perform_session(T=80, d=4):
    s = session()
    capture_template(s, T=T, d=d, seed=3)
    s.handle({"type": "train", "ref": 4, "template_id": "tpl",
              "config": {"sigma_mode": "increment_scaled", "sigma_value": 4.0}})
    assert s.handle({"type": "bind", "ref": 5, "rig_id": "rig",
                     "model_id": "tpl"})[0]["type"] == "ack"
    assert s.handle({"type": "start_perform", "ref": 6,
                     "rig_ids": ["rig"]})[0]["type"] == "ack"
    return s


def test_perform_replay_tracks_progress():
    s = perform_session()
    t = s.registry.templates["tpl"]
    last = None
    for k, row in enumerate(t.features):
        evs = s.handle({"type": "frame", "t": k / 30.0, "values": list(row)})
        assert len(evs) == 1 and evs[0]["type"] == "output"
        last = evs[0]
    assert last["rig_id"] == "rig"
    assert not last["hold"]
    assert last["active_model_id"] == "tpl"
    assert abs(last["mu"] - t.T) <= 3.0
    assert last["bindings"][0]["confident"] is True


def test_perform_with_clip_emits_pose():
    s = session()
    capture_template(s, T=60, d=4, seed=3)
    s.handle({"type": "train", "ref": 4, "template_id": "tpl",
              "config": {"sigma_mode": "increment_scaled", "sigma_value": 4.0}})
    for clip in demo_clips():
        s.registry.put_clip(clip)
    clip_id = demo_clips()[0].id
    s.handle({"type": "bind", "ref": 5, "rig_id": "rig", "model_id": "tpl",
              "clip_id": clip_id})
    s.handle({"type": "start_perform", "ref": 6, "rig_ids": ["rig"]})
    t = s.registry.templates["tpl"]
    for k, row in enumerate(t.features):
        evs = s.handle({"type": "frame", "t": k / 30.0, "values": list(row)})
    assert evs[0]["pose"] is not None
    assert len(evs[0]["pose"]) == len(demo_clips()[0].channels)


def test_bind_unknown_model():
    s = session()
    ev = s.handle({"type": "bind", "ref": 5, "rig_id": "rig", "model_id": "ghost"})
    assert ev[0]["code"] == "unknown_asset"


def test_start_perform_unknown_rig():
    s = session()
    ev = s.handle({"type": "start_perform", "ref": 6, "rig_ids": ["ghost"]})
    assert ev[0]["code"] == "unknown_asset"


def test_set_window_applies_at_next_start_perform():
    s = perform_session()
    # live decoder keeps its training-time window
    assert s.rigs["rig"].bindings[0].model.half_window == 10
    assert s.handle({"type": "set_window", "ref": 7, "p": 4})[0]["type"] == "ack"
    assert s.rigs["rig"].bindings[0].model.half_window == 10
    s.handle({"type": "stop_perform", "ref": 8})
    s.handle({"type": "start_perform", "ref": 9, "rig_ids": ["rig"]})
    assert s.rigs["rig"].bindings[0].model.half_window == 4


def test_set_window_rejects_nonpositive():
    s = session()
    ev = s.handle({"type": "set_window", "ref": 7, "p": 0})
    assert ev[0]["type"] == "error"


def test_perform_multi_source_layout():
    s = session()
    capture_template(s, T=60, d=4, seed=3)
    s.handle({"type": "train", "ref": 4, "template_id": "tpl",
              "config": {"sigma_mode": "increment_scaled", "sigma_value": 4.0}})
    s.handle({"type": "bind", "ref": 5, "rig_id": "rig", "model_id": "tpl"})
    s.handle({"type": "start_perform", "ref": 6, "rig_ids": ["rig"],
              "source_layout": [["a", 2], ["b", 2]]})
    t = s.registry.templates["tpl"]
    outputs = 0
    for k, row in enumerate(t.features):
        ev_a = s.handle({"type": "frame", "t": k / 30.0, "source_id": "a",
                         "values": list(row[:2])})
        assert ev_a[0]["type"] == "ack"  # half a frame: no output yet
        ev_b = s.handle({"type": "frame", "t": k / 30.0, "source_id": "b",
                         "values": list(row[2:])})
        assert ev_b[0]["type"] == "output"
        outputs += 1
    assert outputs == t.T
    assert abs(ev_b[0]["mu"] - t.T) <= 3.0


def test_stop_perform_returns_to_idle():
    s = perform_session()
    assert s.handle({"type": "stop_perform", "ref": 7})[0]["type"] == "ack"
    ev = s.handle({"type": "frame", "t": 0.0, "values": [0.0] * 4})
    assert ev[0]["code"] == "phase_violation"


def test_list_assets_summary():
    s = session()
    capture_template(s, T=50, d=2)
    s.handle({"type": "train", "ref": 4, "template_id": "tpl"})
    ev = s.handle({"type": "list_assets", "ref": 5})[0]
    assert ev["type"] == "assets"
    assert [t["id"] for t in ev["templates"]] == ["tpl"]
    assert ev["models"][0]["states"] == 50


# ------------------------------------------------------------- determinism

def build_transcript():
    t = gen_synthetic("lissajous", 40, 3, seed=9)
    msgs = [hello(),
            {"type": "begin_capture", "ref": 2, "template_id": "tpl", "d": 3,
             "rate": 30.0, "source_layout": [["u", 3]]}]
    for k, row in enumerate(t.features):
        msgs.append({"type": "frame", "t": k / 30.0, "source_id": "u",
                     "values": list(row)})
    msgs += [{"type": "end_capture", "ref": 3},
             {"type": "train", "ref": 4, "template_id": "tpl",
              "config": {"sigma_mode": "increment_scaled", "sigma_value": 4.0}},
             {"type": "bind", "ref": 5, "rig_id": "rig", "model_id": "tpl"},
             {"type": "start_perform", "ref": 6, "rig_ids": ["rig"]}]
    for k, row in enumerate(t.features):
        msgs.append({"type": "frame", "t": k / 30.0, "values": list(row)})
    msgs.append({"type": "stop_perform", "ref": 7})
    return [json.dumps(m) for m in msgs]


def test_transcript_replay_byte_identical():
    lines = build_transcript()
    out1 = replay_transcript(AssetRegistry(), lines)
    out2 = replay_transcript(AssetRegistry(), lines)
    assert out1 == out2
    assert "\n".join(out1) == "\n".join(out2)


def test_encode_event_is_canonical():
    assert encode_event({"b": 1, "a": [1.5, None]}) == '{"a":[1.5,null],"b":1}'


def test_output_numbers_json_safe():
    # a lost binding reports recent_rate=-inf internally; on the wire it is null
    s = perform_session()
    evs = s.handle({"type": "frame", "t": 0.0, "values": [1e6] * 4})
    b = evs[0]["bindings"][0]
    assert b["recent_rate"] is None
    json.dumps(evs[0])  # must be serializable
