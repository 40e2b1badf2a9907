/**
 * Strict reader for the sweep CSV contract written by the distdetect CLI.
 *
 * Header row first, comma separated, LF endings, UTF-8. Every row carries
 * the full 13 fields; anything that deviates is an error with a line number,
 * never a silently dropped row.
 */

export const CSV_FIELDS = [
  "experiment",
  "test_kind",
  "grid_value",
  "n",
  "m",
  "d",
  "rho",
  "type1",
  "type2",
  "tpr",
  "stderr_tpr",
  "replications",
  "seed",
] as const;

export interface SweepRow {
  experiment: string;
  testKind: string;
  gridValue: number;
  n: number;
  m: number;
  d: number;
  rho: number;
  type1: number;
  type2: number;
  tpr: number;
  stderrTpr: number;
  replications: number;
  seed: number;
}

function numeric(raw: string, field: string, line: number): number {
  const value = Number(raw);
  if (raw.trim() === "" || !Number.isFinite(value)) {
    throw new Error(`line ${line}: field ${field} is not a finite number: "${raw}"`);
  }
  return value;
}

function integer(raw: string, field: string, line: number): number {
  const value = numeric(raw, field, line);
  if (!Number.isInteger(value)) {
    throw new Error(`line ${line}: field ${field} must be an integer: "${raw}"`);
  }
  return value;
}

function probability(raw: string, field: string, line: number): number {
  const value = numeric(raw, field, line);
  if (value < 0 || value > 1) {
    throw new Error(`line ${line}: field ${field} must lie in [0, 1]: "${raw}"`);
  }
  return value;
}

export function parseSweepCsv(text: string): SweepRow[] {
  const lines = text.split("\n");
  // a trailing newline is part of the contract; tolerate its empty remainder
  while (lines.length > 0 && lines[lines.length - 1] === "") {
    lines.pop();
  }
  if (lines.length === 0) {
    throw new Error("empty CSV: no header row");
  }
  const header = lines[0];
  const expected = CSV_FIELDS.join(",");
  if (header !== expected) {
    throw new Error(`header mismatch: expected "${expected}", got "${header}"`);
  }
  const rows: SweepRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const line = lines[i] ?? "";
    const lineNo = i + 1;
    const parts = line.split(",");
    if (parts.length !== CSV_FIELDS.length) {
      throw new Error(
        `line ${lineNo}: expected ${CSV_FIELDS.length} fields, got ${parts.length}`,
      );
    }
    const [experiment, testKind] = parts as [string, string, ...string[]];
    if (experiment === "" || testKind === "") {
      throw new Error(`line ${lineNo}: experiment and test_kind must be non-empty`);
    }
    rows.push({
      experiment,
      testKind,
      gridValue: numeric(parts[2]!, "grid_value", lineNo),
      n: integer(parts[3]!, "n", lineNo),
      m: integer(parts[4]!, "m", lineNo),
      d: integer(parts[5]!, "d", lineNo),
      rho: numeric(parts[6]!, "rho", lineNo),
      type1: probability(parts[7]!, "type1", lineNo),
      type2: probability(parts[8]!, "type2", lineNo),
      tpr: probability(parts[9]!, "tpr", lineNo),
      stderrTpr: numeric(parts[10]!, "stderr_tpr", lineNo),
      replications: integer(parts[11]!, "replications", lineNo),
      seed: integer(parts[12]!, "seed", lineNo),
    });
  }
  return rows;
}

/** Distinct test kinds present, in first-seen order. */
export function kindsIn(rows: SweepRow[]): string[] {
  const seen: string[] = [];
  for (const row of rows) {
    if (!seen.includes(row.testKind)) {
      seen.push(row.testKind);
    }
  }
  return seen;
}
