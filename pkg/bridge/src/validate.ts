/**
 * Post-export validation: every id listed in a manifest or fragment must
 * have a readable MVF with the cataloged dims and finite values.
 */

import { existsSync, readFileSync } from "node:fs";
import { dirname, join } from "node:path";

import { mvfRead } from "./mvf.js";

export interface ViewCatalog {
  [view: string]: number[];
}

export interface ManifestEntry {
  id: string;
  viewPaths: { [view: string]: string };
}

export interface ValidationReport {
  ok: boolean;
  utterances: number;
  views: string[];
  violations: string[];
}

/** Parses both full manifests (id|session|speaker|label|view=path;...) and
 * fragments (id|view=path). */
export function parseManifest(path: string): { catalog: ViewCatalog; entries: ManifestEntry[] } {
  const catalog: ViewCatalog = {};
  const entries = new Map<string, ManifestEntry>();
  for (const raw of readFileSync(path, "utf8").split("\n")) {
    const line = raw.trim();
    if (!line || line.startsWith("#")) continue;
    if (line.startsWith("view ")) {
      const parts = line.split(/\s+/);
      catalog[parts[1]] = parts.slice(3).map(Number);
      continue;
    }
    if (line.startsWith("labels ")) continue;
    const fields = line.split("|");
    const id = fields[0];
    const viewField = fields[fields.length - 1];
    const entry = entries.get(id) ?? { id, viewPaths: {} };
    for (const chunk of viewField.split(";")) {
      if (!chunk.includes("=")) continue;
      const eq = chunk.indexOf("=");
      entry.viewPaths[chunk.slice(0, eq)] = chunk.slice(eq + 1);
    }
    entries.set(id, entry);
  }
  return { catalog, entries: [...entries.values()] };
}

export function validateExport(manifestPath: string): ValidationReport {
  const root = dirname(manifestPath);
  const { catalog, entries } = parseManifest(manifestPath);
  const violations: string[] = [];
  const views = Object.keys(catalog).sort();

  if (views.length === 0) {
    violations.push(`${manifestPath}: no view declarations`);
  }
  for (const entry of entries) {
    for (const view of views) {
      const rel = entry.viewPaths[view];
      if (rel === undefined) {
        violations.push(`${entry.id}: view ${view} missing from record`);
        continue;
      }
      const path = join(root, rel);
      if (!existsSync(path)) {
        violations.push(`${entry.id}: file missing: ${path}`);
        continue;
      }
      try {
        const tensor = mvfRead(path);
        const want = catalog[view];
        if (tensor.dims.length !== want.length ||
            tensor.dims.some((d, i) => d !== want[i])) {
          violations.push(
            `${entry.id}: ${view} dims ${tensor.dims.join("x")} != catalog ${want.join("x")}`);
        } else if (!tensor.data.every(Number.isFinite)) {
          violations.push(`${entry.id}: ${view} contains non-finite values`);
        }
      } catch (err) {
        violations.push(`${entry.id}: ${err}`);
      }
    }
  }
  return {
    ok: violations.length === 0,
    utterances: entries.length,
    views,
    violations,
  };
}
