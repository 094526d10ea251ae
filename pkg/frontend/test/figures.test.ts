import * as fs from "fs";
import * as os from "os";
import * as path from "path";
import { describe, expect, it } from "vitest";

import { SchemaMismatch } from "../src/csv";
import { RATE_FLOOR, render } from "../src/figures";
import { main, parseArgs } from "../src/cli";

const GOLDEN = path.join(__dirname, "..", "golden");
const mdFa = path.join(GOLDEN, "md_fa.csv");
const mdFaEmpty = path.join(GOLDEN, "md_fa_empty.csv");
const pep = path.join(GOLDEN, "pep.csv");
const spectrum = path.join(GOLDEN, "spectrum.csv");

function countMatches(text: string, pattern: RegExp): number {
  return (text.match(pattern) ?? []).length;
}

describe("md/fa curves", () => {
  it("draws one line per (strategy, genie) pair", () => {
    const svg = render({ kind: "md-curve", inputs: [mdFa], output: "unused" });
    expect(countMatches(svg, /<polyline class="series"/g)).toBe(4);
    expect(svg).toContain("sweep (genie)");
    expect(svg).toContain("random (genie)");
    expect(svg).toContain("P_MD");
  });

  it("clamps zero rates to the log floor", () => {
    const svg = render({ kind: "md-curve", inputs: [mdFa], output: "unused" });
    // the sweep L=48 zero rate must sit exactly on the 1e-4 axis floor,
    // which is the bottom of the plot region (y = 445)
    const lines = svg.match(/<polyline class="series"[^>]*points="([^"]*)"/g)!;
    const allPoints = lines.join(" ");
    expect(allPoints).toContain(",445.00");
    expect(svg).toContain("1e-4");
  });

  it("supports a linear axis when asked", () => {
    const svg = render({ kind: "fa-curve", inputs: [mdFa], output: "unused", logY: false });
    expect(countMatches(svg, /<polyline class="series"/g)).toBe(4);
    expect(svg).toContain("P_FA");
  });

  it("renders a warning on an empty file and the cli exits 0", () => {
    const svg = render({ kind: "md-curve", inputs: [mdFaEmpty], output: "unused" });
    expect(svg).toContain('class="warning"');
    const out = path.join(os.tmpdir(), "beamacq-plots-empty.svg");
    const rc = main(["--kind", "md-curve", "--in", mdFaEmpty, "--out", out]);
    expect(rc).toBe(0);
    expect(fs.readFileSync(out, "utf8")).toContain('class="warning"');
  });
});

describe("rank histogram", () => {
  it("draws grouped bars per (strategy, L)", () => {
    const svg = render({ kind: "rank-hist", inputs: [pep], output: "unused" });
    // 4 groups x 2 rank values
    expect(countMatches(svg, /<rect class="bar"/g)).toBe(8);
    expect(svg).toContain("sweep L=6");
    expect(svg).toContain("random L=36");
  });
});

describe("geomean distribution", () => {
  it("draws one CDF per (strategy, L)", () => {
    const svg = render({ kind: "geomean", inputs: [pep], output: "unused" });
    expect(countMatches(svg, /<polyline class="series"/g)).toBe(4);
    expect(svg).toContain("fraction of distortions");
  });
});

describe("spectrum", () => {
  it("draws the pseudo-spectrum trace", () => {
    const svg = render({ kind: "spectrum", inputs: [spectrum], output: "unused" });
    expect(countMatches(svg, /<polyline class="series"/g)).toBe(1);
    expect(svg).toContain("delay (s)");
  });
});

describe("schema validation", () => {
  it("names the missing column", () => {
    expect(() => render({ kind: "md-curve", inputs: [pep], output: "unused" }))
      .toThrowError(SchemaMismatch);
    try {
      render({ kind: "md-curve", inputs: [pep], output: "unused" });
    } catch (err) {
      expect((err as SchemaMismatch).column).toBe("genie");
    }
    const rc = main(["--kind", "md-curve", "--in", pep, "--out",
      path.join(os.tmpdir(), "never.svg")]);
    expect(rc).toBe(1);
  });
});

describe("determinism and cli", () => {
  it("renders byte-identical output for identical inputs", () => {
    const spec = { kind: "rank-hist" as const, inputs: [pep], output: "unused" };
    expect(render(spec)).toBe(render(spec));
  });

  it("parses arguments and rejects bad ones", () => {
    const spec = parseArgs(["--kind", "spectrum", "--in", spectrum, "--out", "x.svg"]);
    expect(spec.kind).toBe("spectrum");
    expect(spec.inputs).toEqual([spectrum]);
    expect(main(["--kind", "nope", "--in", spectrum, "--out", "x.svg"])).toBe(2);
    expect(main(["--kind", "spectrum", "--out", "x.svg"])).toBe(2);
  });

  it("writes the file through the cli", () => {
    const out = path.join(os.tmpdir(), "beamacq-plots-cli.svg");
    const rc = main(["--kind", "geomean", "--in", pep, "--out", out]);
    expect(rc).toBe(0);
    expect(fs.existsSync(out)).toBe(true);
  });
});
