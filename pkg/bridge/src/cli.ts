#!/usr/bin/env node
/**
 * pairview-bridge: export speech features for the pairview engine.
 *
 *   pairview-bridge extract-w2v2    --wav-dir DIR --out DIR [--seed N]
 *   pairview-bridge extract-egemaps --wav-dir DIR --out DIR [--seed N]
 *   pairview-bridge validate        --manifest FILE
 *
 * Exit codes: 0 success, 1 failure (including any validation violation),
 * 2 usage errors.
 */

import { mkdirSync } from "node:fs";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";

import { extractEgemaps, extractW2v2 } from "./extract.js";
import { SurrogateEgemaps, SurrogateW2v2 } from "./surrogate.js";
import { validateExport } from "./validate.js";

function usage(): number {
  console.error("usage: pairview-bridge <extract-w2v2|extract-egemaps|validate> [options]");
  return 2;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  if (!command) return usage();

  try {
    if (command === "extract-w2v2" || command === "extract-egemaps") {
      const { values } = parseArgs({
        args: rest,
        options: {
          "wav-dir": { type: "string" },
          out: { type: "string" },
          seed: { type: "string" },
        },
      });
      if (!values["wav-dir"] || !values.out) {
        console.error(`${command}: --wav-dir and --out are required`);
        return 2;
      }
      mkdirSync(values.out, { recursive: true });
      const seed = values.seed !== undefined ? Number(values.seed) : undefined;
      const report = command === "extract-w2v2"
        ? extractW2v2(values["wav-dir"], values.out,
                      seed !== undefined ? new SurrogateW2v2(seed) : undefined)
        : extractEgemaps(values["wav-dir"], values.out,
                         seed !== undefined ? new SurrogateEgemaps(seed) : undefined);
      console.log(`wrote ${report.written.length} files, ${report.failed.length} failures -> ${values.out}`);
      return 0;
    }

    if (command === "validate") {
      const { values } = parseArgs({
        args: rest,
        options: { manifest: { type: "string" } },
      });
      if (!values.manifest) {
        console.error("validate: --manifest is required");
        return 2;
      }
      const report = validateExport(values.manifest);
      if (report.ok) {
        console.log(`OK, ${report.utterances} utterances, ${report.views.length} views`);
        return 0;
      }
      for (const v of report.violations) {
        console.error(v);
      }
      console.error(`${report.violations.length} violations`);
      return 1;
    }

    return usage();
  } catch (err) {
    if (err instanceof TypeError && String(err).includes("Unknown option")) {
      console.error(String(err));
      return 2;
    }
    console.error(String(err));
    return 1;
  }
}

if (process.argv[1] !== undefined &&
    import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
