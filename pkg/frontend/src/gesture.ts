// Pointer-gesture capture utilities: collect raw (t, x, y) samples from
// pointer events, normalize into the unit square, and resample to a fixed
// rate so training sees evenly spaced frames regardless of event jitter.

export interface Sample {
  t: number; // seconds
  x: number;
  y: number;
}

export class GestureRecorder {
  readonly samples: Sample[] = [];

  add(t: number, x: number, y: number): void {
    const last = this.samples[this.samples.length - 1];
    if (last && t <= last.t) return; // drop out-of-order / duplicate timestamps
    this.samples.push({ t, x, y });
  }

  clear(): void {
    this.samples.length = 0;
  }

  get duration(): number {
    if (this.samples.length < 2) return 0;
    return this.samples[this.samples.length - 1].t - this.samples[0].t;
  }
}

/** Scale samples so x and y jointly fit [0, 1], preserving aspect ratio.
 *  A degenerate (motionless) gesture maps to the center. */
export function normalize(samples: Sample[]): Sample[] {
  if (samples.length === 0) return [];
  let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
  for (const s of samples) {
    minX = Math.min(minX, s.x);
    maxX = Math.max(maxX, s.x);
    minY = Math.min(minY, s.y);
    maxY = Math.max(maxY, s.y);
  }
  const span = Math.max(maxX - minX, maxY - minY);
  if (span === 0) {
    return samples.map((s) => ({ t: s.t, x: 0.5, y: 0.5 }));
  }
  const cx = (minX + maxX) / 2;
  const cy = (minY + maxY) / 2;
  return samples.map((s) => ({
    t: s.t,
    x: 0.5 + (s.x - cx) / span,
    y: 0.5 + (s.y - cy) / span,
  }));
}

/** Linear resample to a fixed rate starting at t = 0. Needs >= 2 samples. */
export function resample(samples: Sample[], rate: number): Sample[] {
  if (samples.length < 2) {
    throw new Error(`resample needs >= 2 samples, got ${samples.length}`);
  }
  if (!(rate > 0)) throw new Error(`rate must be > 0, got ${rate}`);
  const t0 = samples[0].t;
  const duration = samples[samples.length - 1].t - t0;
  const n = Math.max(2, Math.floor(duration * rate) + 1);
  const out: Sample[] = [];
  let j = 0;
  for (let i = 0; i < n; i++) {
    const t = Math.min((i / rate), duration);
    const abs = t0 + t;
    while (j < samples.length - 2 && samples[j + 1].t < abs) j++;
    const a = samples[j];
    const b = samples[j + 1];
    const frac = b.t === a.t ? 0 : Math.min(1, Math.max(0, (abs - a.t) / (b.t - a.t)));
    out.push({
      t,
      x: a.x + frac * (b.x - a.x),
      y: a.y + frac * (b.y - a.y),
    });
  }
  return out;
}

/** Full pipeline: raw pointer samples -> normalized fixed-rate frames. */
export function prepare(samples: Sample[], rate: number): Sample[] {
  return resample(normalize(samples), rate);
}
