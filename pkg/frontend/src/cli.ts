#!/usr/bin/env node
/**
 * figures <spec.json> [more-specs.json ...]
 *
 * Each spec file holds one figure description or a list of them; paths
 * inside a spec are resolved relative to the spec file's directory.
 */

import { readFileSync } from "node:fs";
import { dirname, resolve } from "node:path";
import { fileURLToPath } from "node:url";

import { FigureSpec, renderToFile } from "./figures.js";

function resolvePaths(spec: FigureSpec, base: string): FigureSpec {
  const fix = (p?: string) => (p === undefined ? undefined : resolve(base, p));
  return {
    ...spec,
    out: fix(spec.out)!,
    sweep_csv: fix(spec.sweep_csv),
    scaling_csv: fix(spec.scaling_csv),
    diagnostics_csv: fix(spec.diagnostics_csv),
    snapshots: spec.snapshots?.map((s) => ({ ...s, json: fix(s.json)!, bin: fix(s.bin)! })),
  };
}

export function main(argv: string[]): number {
  if (argv.length === 0 || argv.includes("--help")) {
    console.error("usage: figures <spec.json> [more-specs.json ...]");
    return argv.length === 0 ? 2 : 0;
  }
  let failures = 0;
  for (const path of argv) {
    let specs: FigureSpec[];
    try {
      const parsed = JSON.parse(readFileSync(path, "utf-8"));
      specs = Array.isArray(parsed) ? parsed : [parsed];
    } catch (err) {
      console.error(`error reading ${path}: ${(err as Error).message}`);
      failures += 1;
      continue;
    }
    const base = dirname(resolve(path));
    for (const spec of specs) {
      try {
        const out = renderToFile(resolvePaths(spec, base));
        console.log(`wrote ${out}`);
      } catch (err) {
        console.error(`error rendering ${spec.kind ?? "figure"}: ${(err as Error).message}`);
        failures += 1;
      }
    }
  }
  return failures === 0 ? 0 : 1;
}

const invokedDirectly =
  process.argv[1] !== undefined && fileURLToPath(import.meta.url) === resolve(process.argv[1]);
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
