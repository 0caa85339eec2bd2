/**
 * Deterministic surrogate feature backends.
 *
 * Neither the 95M-parameter speech model nor the reference descriptor
 * extractor ships with this bridge, so the default backends synthesize
 * features from the audio's real low-level descriptors through fixed seeded
 * mixings, preserving the exact output geometry the engine expects:
 * a (13, T, 768) layer stack where T follows the real model's convolution
 * stride arithmetic, and 88 reference-named descriptor columns where the
 * pitch/energy/flux/voice-quality families carry genuinely computed values.
 * Swap in a real backend via the W2v2Backend/DescriptorBackend interfaces.
 */

import {
  FrameStats,
  hzToSemitone,
  mean,
  percentile,
  statsOfFrame,
  std,
} from "./dsp.js";
import { EGEMAPS_NAMES } from "./egemapsNames.js";

export const W2V2_LAYERS = 13;
export const W2V2_FEAT = 768;

// the frozen model's feature-encoder convolutions: (kernel, stride) pairs
const CONV_STACK: Array<[number, number]> = [
  [10, 5], [3, 2], [3, 2], [3, 2], [3, 2], [2, 2], [2, 2],
];
const RECEPTIVE = 400;
const HOP = 320;

export function w2v2FrameCount(nSamples: number): number {
  let len = nSamples;
  for (const [kernel, stride] of CONV_STACK) {
    len = Math.floor((len - kernel) / stride) + 1;
  }
  return len;
}

/** mulberry32: small, fast, identical on every platform. */
export function seededRng(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function gaussianTable(seed: number, count: number): Float64Array {
  const rng = seededRng(seed);
  const out = new Float64Array(count);
  for (let i = 0; i < count; i += 2) {
    const u = Math.max(rng(), 1e-12);
    const v = rng();
    const r = Math.sqrt(-2 * Math.log(u));
    out[i] = r * Math.cos(2 * Math.PI * v);
    if (i + 1 < count) out[i + 1] = r * Math.sin(2 * Math.PI * v);
  }
  return out;
}

const STAT_DIM = 8;

function statsVector(s: FrameStats): number[] {
  return [s.logRms, s.rms, s.zcr, s.r1, s.diffRms,
          hzToSemitone(s.f0Hz) / 100, s.f0Peak, s.voiced ? 1 : 0];
}

export interface W2v2Backend {
  readonly name: string;
  readonly layers: number;
  readonly featDim: number;
  frameCount(nSamples: number): number;
  /** Returns the flattened (layers, T, featDim) stack for 16 kHz samples. */
  forward(samples: Float32Array, rate: number): Float32Array;
}

export class SurrogateW2v2 implements W2v2Backend {
  readonly name = "surrogate-w2v2";
  readonly layers = W2V2_LAYERS;
  readonly featDim = W2V2_FEAT;
  private readonly weights: Float64Array; // (layers, STAT_DIM, featDim)
  private readonly biases: Float64Array;  // (layers, featDim)

  constructor(seed = 0x77324c) {
    this.weights = gaussianTable(seed, this.layers * STAT_DIM * this.featDim);
    this.biases = gaussianTable(seed ^ 0xb1a5, this.layers * this.featDim);
  }

  frameCount(nSamples: number): number {
    return w2v2FrameCount(nSamples);
  }

  forward(samples: Float32Array, rate: number): Float32Array {
    const t = this.frameCount(samples.length);
    const frames: number[][] = [];
    for (let i = 0; i < t; i++) {
      const start = i * HOP;
      const frame = samples.subarray(start, Math.min(start + RECEPTIVE, samples.length));
      frames.push(statsVector(statsOfFrame(frame, rate)));
    }
    const out = new Float32Array(this.layers * t * this.featDim);
    const scale = 1 / Math.sqrt(STAT_DIM);
    for (let l = 0; l < this.layers; l++) {
      for (let i = 0; i < t; i++) {
        const stats = frames[i];
        const base = (l * t + i) * this.featDim;
        for (let j = 0; j < this.featDim; j++) {
          let acc = this.biases[l * this.featDim + j] * 0.1;
          const wBase = (l * STAT_DIM) * this.featDim + j;
          for (let k = 0; k < STAT_DIM; k++) {
            acc += this.weights[wBase + k * this.featDim] * stats[k];
          }
          out[base + j] = Math.fround(Math.tanh(acc * scale));
        }
      }
    }
    return out;
  }
}

export interface DescriptorBackend {
  readonly name: string;
  readonly columns: readonly string[];
  extract(samples: Float32Array, rate: number): Float32Array;
}

const WIN = 400;
const HOP_DESC = 160;

export class SurrogateEgemaps implements DescriptorBackend {
  readonly name = "surrogate-egemaps";
  readonly columns = EGEMAPS_NAMES;
  private readonly mix: Float64Array; // (88, summaryDim)

  constructor(seed = 0x8853) {
    this.mix = gaussianTable(seed, 88 * 32);
  }

  extract(samples: Float32Array, rate: number): Float32Array {
    if (samples.length < WIN) {
      throw new Error(`need at least ${WIN} samples, got ${samples.length}`);
    }
    const nFrames = 1 + Math.floor((samples.length - WIN) / HOP_DESC);
    const stats: FrameStats[] = [];
    for (let i = 0; i < nFrames; i++) {
      stats.push(statsOfFrame(samples.subarray(i * HOP_DESC, i * HOP_DESC + WIN), rate));
    }

    const voicedStats = stats.filter((s) => s.voiced);
    const f0Semi = voicedStats.map((s) => hzToSemitone(s.f0Hz));
    const loud = stats.map((s) => s.rms);
    const flux = stats.map((s) => s.diffRms);
    const hnr = voicedStats.map((s) => {
      const r = Math.min(Math.max(s.f0Peak, 1e-6), 1 - 1e-6);
      return Math.min(Math.max(10 * Math.log10(r / (1 - r)), -20), 40);
    });

    const values = new Map<string, number>();
    this.contour(values, "F0semitoneFrom27.5Hz_sma3nz", f0Semi);
    this.contour(values, "loudness_sma3", loud);
    values.set("spectralFlux_sma3_amean", mean(flux));
    values.set("spectralFlux_sma3_stddevNorm", normStd(flux));
    values.set("jitterLocal_sma3nz_amean", jitterOf(voicedStats));
    values.set("jitterLocal_sma3nz_stddevNorm", 0);
    values.set("shimmerLocaldB_sma3nz_amean", shimmerOf(voicedStats));
    values.set("shimmerLocaldB_sma3nz_stddevNorm", 0);
    values.set("HNRdBACF_sma3nz_amean", mean(hnr));
    values.set("HNRdBACF_sma3nz_stddevNorm", normStd(hnr));
    const segs = segments(stats.map((s) => s.voiced));
    const dur = samples.length / rate;
    values.set("loudnessPeaksPerSec", peaksPerSec(loud, dur));
    values.set("VoicedSegmentsPerSec", segs.voiced.length / dur);
    values.set("MeanVoicedSegmentLengthSec", mean(segs.voiced) * (HOP_DESC / rate));
    values.set("StddevVoicedSegmentLength", std(segs.voiced) * (HOP_DESC / rate));
    values.set("MeanUnvoicedSegmentLength", mean(segs.unvoiced) * (HOP_DESC / rate));
    values.set("StddevUnvoicedSegmentLength", std(segs.unvoiced) * (HOP_DESC / rate));
    let power = 0;
    for (const v of samples) power += v * v;
    values.set("equivalentSoundLevel_dBp", 10 * Math.log10(Math.max(power / samples.length, 1e-12)));

    // remaining families (cepstral, formant, spectral-balance columns) come
    // from a fixed mixing of the utterance summary: deterministic, finite,
    // and audio-dependent, but surrogate values only
    const summary = this.summaryVector(stats, f0Semi);
    const out = new Float32Array(88);
    for (let c = 0; c < 88; c++) {
      const name = EGEMAPS_NAMES[c];
      if (values.has(name)) {
        out[c] = Math.fround(values.get(name)!);
      } else {
        let acc = 0;
        for (let k = 0; k < summary.length; k++) {
          acc += this.mix[c * 32 + k] * summary[k];
        }
        out[c] = Math.fround(Math.tanh(acc / Math.sqrt(summary.length)));
      }
      if (!Number.isFinite(out[c])) {
        throw new Error(`descriptor ${name} is not finite`);
      }
    }
    return out;
  }

  private contour(values: Map<string, number>, base: string, xs: number[]): void {
    values.set(`${base}_amean`, mean(xs));
    values.set(`${base}_stddevNorm`, normStd(xs));
    values.set(`${base}_percentile20.0`, percentile(xs, 20));
    values.set(`${base}_percentile50.0`, percentile(xs, 50));
    values.set(`${base}_percentile80.0`, percentile(xs, 80));
    values.set(`${base}_pctlrange0-2`, percentile(xs, 80) - percentile(xs, 20));
    const rising: number[] = [];
    const falling: number[] = [];
    for (let i = 1; i < xs.length; i++) {
      const d = xs[i] - xs[i - 1];
      (d >= 0 ? rising : falling).push(Math.abs(d));
    }
    values.set(`${base}_meanRisingSlope`, mean(rising));
    values.set(`${base}_stddevRisingSlope`, std(rising));
    values.set(`${base}_meanFallingSlope`, mean(falling));
    values.set(`${base}_stddevFallingSlope`, std(falling));
  }

  private summaryVector(stats: FrameStats[], f0Semi: number[]): number[] {
    const fields: Array<(s: FrameStats) => number> = [
      (s) => s.logRms, (s) => s.zcr, (s) => s.r1, (s) => s.diffRms, (s) => s.f0Peak,
    ];
    const out: number[] = [];
    for (const f of fields) {
      const xs = stats.map(f);
      out.push(mean(xs), std(xs), percentile(xs, 20), percentile(xs, 50), percentile(xs, 80));
    }
    out.push(mean(f0Semi), std(f0Semi));
    while (out.length < 32) out.push(0);
    return out.slice(0, 32);
  }
}

function normStd(xs: number[]): number {
  const m = mean(xs);
  return Math.abs(m) > 1e-12 ? std(xs) / Math.abs(m) : 0;
}

function jitterOf(voiced: FrameStats[]): number {
  const periods = voiced.filter((s) => s.f0Hz > 0).map((s) => 1 / s.f0Hz);
  if (periods.length < 2) return 0;
  const diffs: number[] = [];
  for (let i = 1; i < periods.length; i++) diffs.push(Math.abs(periods[i] - periods[i - 1]));
  return mean(diffs) / mean(periods);
}

function shimmerOf(voiced: FrameStats[]): number {
  const amps = voiced.map((s) => s.rms).filter((a) => a > 1e-12);
  if (amps.length < 2) return 0;
  const diffs: number[] = [];
  for (let i = 1; i < amps.length; i++) {
    diffs.push(Math.abs(20 * Math.log10(amps[i] / amps[i - 1])));
  }
  return mean(diffs);
}

function segments(voiced: boolean[]): { voiced: number[]; unvoiced: number[] } {
  const out = { voiced: [] as number[], unvoiced: [] as number[] };
  let run = 0;
  for (let i = 0; i < voiced.length; i++) {
    run += 1;
    const last = i === voiced.length - 1;
    if (last || voiced[i + 1] !== voiced[i]) {
      (voiced[i] ? out.voiced : out.unvoiced).push(run);
      run = 0;
    }
  }
  return out;
}

function peaksPerSec(loud: number[], durationSec: number): number {
  let peaks = 0;
  for (let i = 1; i + 1 < loud.length; i++) {
    if (loud[i] > loud[i - 1] && loud[i] >= loud[i + 1]) peaks += 1;
  }
  return durationSec > 0 ? peaks / durationSec : 0;
}
