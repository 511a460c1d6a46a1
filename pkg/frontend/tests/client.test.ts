import { describe, expect, it } from "vitest";
import { ProtocolError, SessionClient, Transport } from "../src/client.js";
import { OutputEvent } from "../src/protocol.js";

class MockTransport implements Transport {
  sent: string[] = [];
  closed = false;
  send(line: string): void {
    this.sent.push(line);
  }
  close(): void {
    this.closed = true;
  }
  lastMessage(): any {
    return JSON.parse(this.sent[this.sent.length - 1]);
  }
}

function setup() {
  const transport = new MockTransport();
  const client = new SessionClient(transport);
  return { transport, client };
}

describe("SessionClient", () => {
  it("resolves hello on a matching ack", async () => {
    const { transport, client } = setup();
    const p = client.hello();
    const msg = transport.lastMessage();
    expect(msg).toEqual({ type: "hello", ref: 1, protocol_version: "mop/1" });
    client.handleLine(JSON.stringify({ type: "ack", ref: 1 }));
    await expect(p).resolves.toBeUndefined();
  });

  it("rejects a pending request on a matching error", async () => {
    const { transport, client } = setup();
    const p = client.train("nope");
    const ref = transport.lastMessage().ref;
    client.handleLine(
      JSON.stringify({ type: "error", ref, code: "unknown_asset", message: "no template" }),
    );
    await expect(p).rejects.toMatchObject({
      name: "ProtocolError",
      code: "unknown_asset",
    });
  });

  it("correlates out-of-order replies by ref", async () => {
    const { client } = setup();
    const p1 = client.setWindow(5); // ref 1
    const p2 = client.bind("rig", "model"); // ref 2
    client.handleLine(JSON.stringify({ type: "ack", ref: 2 }));
    client.handleLine(JSON.stringify({ type: "ack", ref: 1 }));
    await expect(p2).resolves.toBeUndefined();
    await expect(p1).resolves.toBeUndefined();
  });

  it("returns the trained event payload", async () => {
    const { transport, client } = setup();
    const p = client.train("g1");
    const sent = transport.lastMessage();
    expect(sent.config).toMatchObject({
      sigma_mode: "increment_scaled",
      sigma_value: 4.0,
      loglik_floor: -1.5,
    });
    client.handleLine(
      JSON.stringify({ type: "trained", ref: sent.ref, model_id: "g1", N: 80, sigma2: 0.01 }),
    );
    await expect(p).resolves.toMatchObject({ model_id: "g1", N: 80 });
  });

  it("routes output events to the listener and caches per-rig state", () => {
    const { client } = setup();
    const seen: OutputEvent[] = [];
    client.onOutput = (ev) => seen.push(ev);
    const out = {
      type: "output", ref: 9, rig_id: "stage", hold: false,
      active_model_id: "g1", mu: 12.5, progress_seconds: 0.2,
      loglik_rate: -0.1, var: 1.0, pose: [0.1], bindings: [],
    };
    client.handleLine(JSON.stringify(out));
    expect(seen.length).toBe(1);
    expect(client.rigState.get("stage")?.mu).toBe(12.5);
    client.handleLine(JSON.stringify({ ...out, mu: 13.5 }));
    expect(client.rigState.get("stage")?.mu).toBe(13.5);
    expect(seen.length).toBe(2);
  });

  it("forwards unmatched errors to onError instead of throwing", () => {
    const { client } = setup();
    const errs: string[] = [];
    client.onError = (code) => errs.push(code);
    client.handleLine(
      JSON.stringify({ type: "error", ref: null, code: "bad_json", message: "x" }),
    );
    expect(errs).toEqual(["bad_json"]);
  });

  it("ignores blank lines and unsolicited acks", () => {
    const { client } = setup();
    client.handleLine("");
    client.handleLine("   ");
    client.handleLine(JSON.stringify({ type: "ack", ref: 999 }));
  });

  it("sends frames without ref and without creating waiters", () => {
    const { transport, client } = setup();
    client.sendFrame(0.5, [0.1, 0.2]);
    expect(transport.lastMessage()).toEqual({
      type: "frame",
      t: 0.5,
      values: [0.1, 0.2],
    });
  });

  it("fail() rejects everything in flight", async () => {
    const { client } = setup();
    const p1 = client.hello();
    const p2 = client.listAssets();
    client.fail("socket dropped");
    await expect(p1).rejects.toThrow("socket dropped");
    await expect(p2).rejects.toThrow("socket dropped");
  });

  it("close() closes the transport", () => {
    const { transport, client } = setup();
    client.close();
    expect(transport.closed).toBe(true);
  });

  it("omits clip_id from bind when not given", () => {
    const { transport, client } = setup();
    void client.bind("rig", "m1");
    expect("clip_id" in transport.lastMessage()).toBe(false);
    void client.bind("rig", "m1", "c1");
    expect(transport.lastMessage().clip_id).toBe("c1");
  });

  it("exposes ProtocolError with its code", () => {
    const err = new ProtocolError("phase_violation", "nope");
    expect(err.code).toBe("phase_violation");
    expect(err.message).toBe("nope");
  });
});
