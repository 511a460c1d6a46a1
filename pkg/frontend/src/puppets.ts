// Pure puppet geometry: turn a pose vector (per-channel values from an
// output event) into drawable primitives. Kept free of canvas/DOM types so
// it unit-tests without a browser.

export interface ChannelInfo {
  name: string;
  kind: string;
}

export type Pose = Record<string, number>;

/** Zip channel metadata with a pose vector into a name -> value record. */
export function poseRecord(channels: ChannelInfo[], pose: number[]): Pose {
  if (channels.length !== pose.length) {
    throw new Error(
      `pose has ${pose.length} values for ${channels.length} channels`,
    );
  }
  const rec: Pose = {};
  channels.forEach((c, i) => {
    rec[c.name] = pose[i];
  });
  return rec;
}

export interface Segment {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

function limb(x: number, y: number, angle: number, len: number): [Segment, number, number] {
  const x2 = x + len * Math.sin(angle);
  const y2 = y - len * Math.cos(angle);
  return [{ x1: x, y1: y, x2, y2 }, x2, y2];
}

/**
 * Stick figure in a unit box (origin top-left, y down), driven by joint
 * angles in radians: l_shoulder / r_shoulder swing the upper arms out from
 * straight-down, l_elbow / r_elbow bend the forearms relative to the upper
 * arms, torso leans the whole upper body. Missing channels default to 0.
 */
export function stickFigure(pose: Pose): { segments: Segment[]; head: { x: number; y: number; r: number } } {
  const lean = pose["torso"] ?? 0;
  const hipX = 0.5;
  const hipY = 0.78;
  const torsoLen = 0.3;
  const neckX = hipX + torsoLen * Math.sin(lean);
  const neckY = hipY - torsoLen * Math.cos(lean);
  const segments: Segment[] = [
    { x1: hipX, y1: hipY, x2: neckX, y2: neckY }, // spine
    { x1: hipX, y1: hipY, x2: hipX - 0.1, y2: 0.98 }, // legs
    { x1: hipX, y1: hipY, x2: hipX + 0.1, y2: 0.98 },
  ];
  const upper = 0.16;
  const fore = 0.14;
  // arms hang from the neck; positive shoulder angle raises the left arm
  // outward (screen-left) and the right arm mirrors with its own channel
  const lAngle = Math.PI - (pose["l_shoulder"] ?? 0) - lean;
  const [lUp, lex, ley] = limb(neckX, neckY, lAngle, upper);
  const [lFore] = limb(lex, ley, lAngle - (pose["l_elbow"] ?? 0), fore);
  const rAngle = Math.PI + (pose["r_shoulder"] ?? 0) - lean;
  const [rUp, rex, rey] = limb(neckX, neckY, rAngle, upper);
  const [rFore] = limb(rex, rey, rAngle + (pose["r_elbow"] ?? 0), fore);
  segments.push(lUp, lFore, rUp, rFore);
  const headR = 0.07;
  return {
    segments,
    head: {
      x: neckX + (headR + 0.01) * Math.sin(lean),
      y: neckY - (headR + 0.01) * Math.cos(lean),
      r: headR,
    },
  };
}

export interface FaceShapes {
  mouthOpen: number; // 0..1
  browL: number;
  browR: number;
  smile: number;
}

function clamp01(v: number): number {
  return Math.min(1, Math.max(0, v));
}

/** Blendshape face: each channel clamped to [0, 1]; missing channels are 0. */
export function faceShapes(pose: Pose): FaceShapes {
  return {
    mouthOpen: clamp01(pose["mouth_open"] ?? 0),
    browL: clamp01(pose["brow_l"] ?? 0),
    browR: clamp01(pose["brow_r"] ?? 0),
    smile: clamp01(pose["smile"] ?? 0),
  };
}

/** Fraction of the template completed, clamped to [0, 1]; states are 1-based. */
export function progressFraction(mu: number | null, states: number): number {
  if (mu === null || states <= 1) return 0;
  return clamp01((mu - 1) / (states - 1));
}
