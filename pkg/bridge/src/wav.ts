/**
 * Minimal PCM WAV reader plus the engine's fixed-length padding policy.
 *
 * Accepts 16-bit integer and 32-bit float PCM, averages channels to mono,
 * and resamples to 16 kHz. Resampling uses linear interpolation: the bridge
 * only prepares inputs for a feature backend, and a production backend owns
 * its own resampler.
 */

import { readFileSync } from "node:fs";

export const TARGET_RATE = 16000;
export const TARGET_SECONDS = 15;

export interface Wave {
  samples: Float32Array;
  sampleRate: number;
}

export function readWav(path: string): Wave {
  const blob = readFileSync(path);
  if (blob.length < 44 || blob.toString("ascii", 0, 4) !== "RIFF" ||
      blob.toString("ascii", 8, 12) !== "WAVE") {
    throw new Error(`${path}: not a RIFF/WAVE file`);
  }
  let offset = 12;
  let format = 0;
  let channels = 0;
  let rate = 0;
  let bits = 0;
  let data: Buffer | null = null;
  while (offset + 8 <= blob.length) {
    const id = blob.toString("ascii", offset, offset + 4);
    const size = blob.readUInt32LE(offset + 4);
    const body = offset + 8;
    if (id === "fmt ") {
      format = blob.readUInt16LE(body);
      channels = blob.readUInt16LE(body + 2);
      rate = blob.readUInt32LE(body + 4);
      bits = blob.readUInt16LE(body + 14);
    } else if (id === "data") {
      data = blob.subarray(body, body + size);
    }
    offset = body + size + (size % 2);
  }
  if (data === null || rate === 0 || channels === 0) {
    throw new Error(`${path}: missing fmt or data chunk`);
  }

  let mono: Float32Array;
  if (format === 1 && bits === 16) {
    const frames = Math.floor(data.length / (2 * channels));
    mono = new Float32Array(frames);
    for (let i = 0; i < frames; i++) {
      let acc = 0;
      for (let c = 0; c < channels; c++) {
        acc += data.readInt16LE((i * channels + c) * 2);
      }
      mono[i] = acc / channels / 32768;
    }
  } else if (format === 3 && bits === 32) {
    const frames = Math.floor(data.length / (4 * channels));
    mono = new Float32Array(frames);
    for (let i = 0; i < frames; i++) {
      let acc = 0;
      for (let c = 0; c < channels; c++) {
        acc += data.readFloatLE((i * channels + c) * 4);
      }
      mono[i] = acc / channels;
    }
  } else {
    throw new Error(`${path}: unsupported encoding (format ${format}, ${bits}-bit)`);
  }

  if (rate !== TARGET_RATE) {
    mono = resampleLinear(mono, rate, TARGET_RATE);
    rate = TARGET_RATE;
  }
  return { samples: mono, sampleRate: rate };
}

function resampleLinear(x: Float32Array, from: number, to: number): Float32Array {
  const outLen = Math.round((x.length * to) / from);
  const out = new Float32Array(outLen);
  const step = from / to;
  for (let i = 0; i < outLen; i++) {
    const pos = i * step;
    const lo = Math.floor(pos);
    const hi = Math.min(lo + 1, x.length - 1);
    const frac = pos - lo;
    out[i] = x[lo] * (1 - frac) + x[hi] * frac;
  }
  return out;
}

/** Exactly targetSeconds of audio: truncate the tail or zero-pad the tail. */
export function padOrTrim(wave: Wave, targetSeconds: number = TARGET_SECONDS): Wave {
  const n = Math.round(targetSeconds * wave.sampleRate);
  if (wave.samples.length === n) {
    return wave;
  }
  const out = new Float32Array(n);
  out.set(wave.samples.subarray(0, Math.min(n, wave.samples.length)));
  return { samples: out, sampleRate: wave.sampleRate };
}
