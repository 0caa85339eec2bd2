/**
 * Frame-level low-level descriptors used by the surrogate backends.
 *
 * Cheap time-domain measures only: energies, zero crossings, the lag-1
 * autocorrelation coefficient (a spectral-tilt proxy), and autocorrelation
 * pitch with a voicing decision. A production backend replaces all of this.
 */

export const F0_MIN = 60;
export const F0_MAX = 500;
export const VOICING_THRESHOLD = 0.45;

export interface FrameStats {
  rms: number;
  logRms: number;
  zcr: number;
  r1: number;       // lag-1 autocorrelation in [-1, 1]
  diffRms: number;  // RMS of the first difference (flux proxy)
  f0Hz: number;     // 0 when unvoiced
  f0Peak: number;   // normalized autocorrelation peak height
  voiced: boolean;
}

export function pitchOfFrame(frame: Float32Array, rate: number): { f0: number; peak: number; voiced: boolean } {
  const n = frame.length;
  let mean = 0;
  for (let i = 0; i < n; i++) mean += frame[i];
  mean /= n;
  let energy = 0;
  for (let i = 0; i < n; i++) {
    const v = frame[i] - mean;
    energy += v * v;
  }
  if (energy < 1e-12) {
    return { f0: 0, peak: 0, voiced: false };
  }
  const lagMin = Math.floor(rate / F0_MAX);
  const lagMax = Math.min(Math.floor(rate / F0_MIN), n - 2);
  let bestLag = 0;
  let bestR = -Infinity;
  for (let lag = lagMin; lag <= lagMax; lag++) {
    let num = 0;
    let headE = 0;
    let tailE = 0;
    for (let i = 0; i + lag < n; i++) {
      const a = frame[i] - mean;
      const b = frame[i + lag] - mean;
      num += a * b;
      headE += a * a;
      tailE += b * b;
    }
    const denom = Math.sqrt(headE * tailE);
    const r = denom > 1e-12 ? num / denom : 0;
    if (r > bestR) {
      bestR = r;
      bestLag = lag;
    }
  }
  const voiced = bestR >= VOICING_THRESHOLD;
  return { f0: voiced ? rate / bestLag : 0, peak: Math.max(bestR, 0), voiced };
}

export function statsOfFrame(frame: Float32Array, rate: number): FrameStats {
  const n = frame.length;
  let sumSq = 0;
  let crossings = 0;
  let diffSq = 0;
  let r1num = 0;
  for (let i = 0; i < n; i++) {
    sumSq += frame[i] * frame[i];
    if (i > 0) {
      if ((frame[i] >= 0) !== (frame[i - 1] >= 0)) crossings += 1;
      const d = frame[i] - frame[i - 1];
      diffSq += d * d;
      r1num += frame[i] * frame[i - 1];
    }
  }
  const rms = Math.sqrt(sumSq / n);
  const { f0, peak, voiced } = pitchOfFrame(frame, rate);
  return {
    rms,
    logRms: Math.log(Math.max(rms, 1e-10)),
    zcr: crossings / (n - 1),
    r1: sumSq > 1e-20 ? r1num / sumSq : 0,
    diffRms: Math.sqrt(diffSq / Math.max(n - 1, 1)),
    f0Hz: f0,
    f0Peak: peak,
    voiced,
  };
}

export function hzToSemitone(f0: number): number {
  // semitones above 27.5 Hz, the reference set's pitch scale
  return f0 > 0 ? 12 * Math.log2(f0 / 27.5) : 0;
}

export function mean(xs: number[]): number {
  return xs.length ? xs.reduce((a, b) => a + b, 0) / xs.length : 0;
}

export function std(xs: number[]): number {
  if (!xs.length) return 0;
  const m = mean(xs);
  return Math.sqrt(mean(xs.map((x) => (x - m) * (x - m))));
}

export function percentile(xs: number[], q: number): number {
  if (!xs.length) return 0;
  const sorted = [...xs].sort((a, b) => a - b);
  const pos = (q / 100) * (sorted.length - 1);
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo);
}
