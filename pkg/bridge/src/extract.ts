/**
 * Export pipelines: WAV directory in, MVF/CSV plus manifest fragments out.
 *
 * Per-file failures are logged and skipped; the run continues and reports
 * the failing ids. Fragments use the engine's text form: a `view` header
 * line followed by `id|view=relative/path` lines.
 */

import { readdirSync, writeFileSync } from "node:fs";
import { basename, join } from "node:path";

import { mvfWrite } from "./mvf.js";
import { DescriptorBackend, SurrogateEgemaps, SurrogateW2v2, W2v2Backend } from "./surrogate.js";
import { padOrTrim, readWav, TARGET_SECONDS } from "./wav.js";

export interface ExtractReport {
  written: Array<{ id: string; path: string }>;
  failed: Array<{ id: string; error: string }>;
  fragmentPath: string | null;
}

export function listWavs(wavDir: string): Array<{ id: string; path: string }> {
  return readdirSync(wavDir)
    .filter((f) => f.toLowerCase().endsWith(".wav"))
    .sort()
    .map((f) => ({ id: basename(f, ".wav"), path: join(wavDir, f) }));
}

function writeFragment(path: string, view: string, dims: number[],
                       entries: Array<{ id: string; rel: string }>): void {
  const lines = [`view ${view} ${dims.length} ${dims.join(" ")}`];
  for (const e of entries) {
    lines.push(`${e.id}|${view}=${e.rel}`);
  }
  writeFileSync(path, lines.join("\n") + "\n");
}

export function extractW2v2(wavDir: string, outDir: string,
                            backend: W2v2Backend = new SurrogateW2v2(),
                            log: (msg: string) => void = console.error): ExtractReport {
  const wavs = listWavs(wavDir);
  const written: Array<{ id: string; path: string }> = [];
  const failed: Array<{ id: string; error: string }> = [];
  const entries: Array<{ id: string; rel: string }> = [];
  let dims: number[] | null = null;

  for (const { id, path } of wavs) {
    try {
      const wave = padOrTrim(readWav(path), TARGET_SECONDS);
      const t = backend.frameCount(wave.samples.length);
      const stack = backend.forward(wave.samples, wave.sampleRate);
      dims = [backend.layers, t, backend.featDim];
      const rel = `${id}.w2v2.mvf`;
      mvfWrite(join(outDir, rel), dims, stack);
      written.push({ id, path: join(outDir, rel) });
      entries.push({ id, rel });
    } catch (err) {
      failed.push({ id, error: String(err) });
      log(`w2v2 extraction failed for ${id}: ${err}`);
    }
  }

  const fragmentPath = join(outDir, "fragment.w2v2.txt");
  if (entries.length > 0 && dims !== null) {
    writeFragment(fragmentPath, "w2v2", dims, entries);
  } else {
    writeFileSync(fragmentPath, "");
    log(`warning: no usable .wav files under ${wavDir}`);
  }
  if (failed.length) {
    log(`failed ids: ${failed.map((f) => f.id).join(", ")}`);
  }
  return { written, failed, fragmentPath };
}

function csvNumber(v: number): string {
  // full float32 precision so the CSV parses back to the exact MVF value
  return String(Math.fround(v));
}

export function extractEgemaps(wavDir: string, outDir: string,
                               backend: DescriptorBackend = new SurrogateEgemaps(),
                               log: (msg: string) => void = console.error): ExtractReport {
  const wavs = listWavs(wavDir);
  const written: Array<{ id: string; path: string }> = [];
  const failed: Array<{ id: string; error: string }> = [];
  const entries: Array<{ id: string; rel: string }> = [];
  const csvRows: string[] = [];

  for (const { id, path } of wavs) {
    try {
      const wave = readWav(path);
      const values = backend.extract(wave.samples, wave.sampleRate);
      if (values.length !== backend.columns.length) {
        throw new Error(`backend emitted ${values.length} values for ${backend.columns.length} columns`);
      }
      const rel = `${id}.egemaps.mvf`;
      mvfWrite(join(outDir, rel), [values.length], values);
      written.push({ id, path: join(outDir, rel) });
      entries.push({ id, rel });
      csvRows.push([id, ...Array.from(values, csvNumber)].join(","));
    } catch (err) {
      failed.push({ id, error: String(err) });
      log(`descriptor extraction failed for ${id}: ${err}`);
    }
  }

  const fragmentPath = join(outDir, "fragment.egemaps.txt");
  if (entries.length > 0) {
    writeFragment(fragmentPath, "egemaps", [backend.columns.length], entries);
    const header = ["id", ...backend.columns].join(",");
    writeFileSync(join(outDir, "egemaps.csv"), [header, ...csvRows].join("\n") + "\n");
  } else {
    writeFileSync(fragmentPath, "");
    log(`warning: no usable .wav files under ${wavDir}`);
  }
  if (failed.length) {
    log(`failed ids: ${failed.map((f) => f.id).join(", ")}`);
  }
  return { written, failed, fragmentPath };
}
