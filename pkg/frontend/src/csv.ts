/**
 * Minimal CSV reading for the campaign output schemas.
 *
 * The producer writes plain comma-separated values without quoting or
 * embedded separators, so a split-based parser is exact here.
 */

import * as fs from "fs";

export class SchemaMismatch extends Error {
  constructor(public readonly column: string, detail: string) {
    super(`schema mismatch on column "${column}": ${detail}`);
    this.name = "SchemaMismatch";
  }
}

export interface Table {
  header: string[];
  rows: string[][];
}

export function readCsv(path: string): Table {
  const text = fs.readFileSync(path, "utf8");
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaMismatch("<header>", `${path} is empty`);
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((line) => line.split(","));
  return { header, rows };
}

/** Validate the header and return rows as objects keyed by column name. */
export function requireColumns(
  table: Table,
  expected: string[],
  path: string,
): Record<string, string>[] {
  for (const column of expected) {
    if (!table.header.includes(column)) {
      throw new SchemaMismatch(column, `missing from ${path} (found: ${table.header.join(",")})`);
    }
  }
  const index = new Map(table.header.map((name, i) => [name, i]));
  return table.rows.map((row) => {
    const record: Record<string, string> = {};
    for (const column of expected) {
      record[column] = row[index.get(column)!] ?? "";
    }
    return record;
  });
}

/** Read several CSVs with one schema and concatenate their rows. */
export function readAll(paths: string[], expected: string[]): Record<string, string>[] {
  const out: Record<string, string>[] = [];
  for (const path of paths) {
    out.push(...requireColumns(readCsv(path), expected, path));
  }
  return out;
}
