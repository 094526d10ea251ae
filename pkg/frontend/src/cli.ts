/**
 * plots --kind <rank-hist|geomean|md-curve|fa-curve|spectrum>
 *       --in <csv> [--in <csv> ...] --out <svg> [--linear-y]
 */

import * as fs from "fs";
import * as path from "path";
import { FigureKind, FigureSpec, render } from "./figures";

const KINDS: FigureKind[] = ["rank-hist", "geomean", "md-curve", "fa-curve", "spectrum"];

export function parseArgs(argv: string[]): FigureSpec {
  let kind: string | undefined;
  const inputs: string[] = [];
  let output: string | undefined;
  let logY: boolean | undefined;
  for (let i = 0; i < argv.length; i += 1) {
    const arg = argv[i];
    if (arg === "--kind") kind = argv[++i];
    else if (arg === "--in") inputs.push(argv[++i]);
    else if (arg === "--out") output = argv[++i];
    else if (arg === "--linear-y") logY = false;
    else if (arg === "--log-y") logY = true;
    else throw new Error(`unknown argument: ${arg}`);
  }
  if (!kind || !KINDS.includes(kind as FigureKind)) {
    throw new Error(`--kind must be one of ${KINDS.join("|")}`);
  }
  if (inputs.length === 0) throw new Error("at least one --in CSV is required");
  if (!output) throw new Error("--out is required");
  return { kind: kind as FigureKind, inputs, output, logY };
}

export function main(argv: string[]): number {
  let spec: FigureSpec;
  try {
    spec = parseArgs(argv);
  } catch (err) {
    console.error((err as Error).message);
    return 2;
  }
  try {
    const svg = render(spec);
    fs.mkdirSync(path.dirname(path.resolve(spec.output)), { recursive: true });
    fs.writeFileSync(spec.output, svg);
    console.log(`wrote ${spec.output}`);
    return 0;
  } catch (err) {
    console.error((err as Error).message);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
