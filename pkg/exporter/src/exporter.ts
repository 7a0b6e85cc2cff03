/**
 * Batch exporter: reads a CSV of (id, smiles), writes the structural key
 * table and the descriptor table in exactly the layout the prediction
 * pipeline ingests, plus a skip report for rejected rows.
 *
 * CLI: export --in molecules.csv --maccs maccs.csv --mordred mordred.csv
 *      [--skip-invalid] [--report report.json]
 */

import { readFileSync, writeFileSync } from "node:fs";
import { parseCsv, writeCsv } from "./csv.js";
import { MORDRED_COLUMNS, computeDescriptors } from "./descriptors.js";
import { KEY_COUNT, computeKeys } from "./keys.js";
import { SmilesError, parseSmiles } from "./mol.js";

export interface ExportRequest {
  inputPath: string;
  maccsPath: string;
  mordredPath: string;
  skipInvalid: boolean;
  reportPath?: string;
}

export interface SkipReport {
  rows: number;
  exported: number;
  skipped: { id: string; smiles: string; reason: string }[];
}

export class ExportError extends Error {}

export function exportDescriptors(req: ExportRequest): SkipReport {
  let text: string;
  try {
    text = readFileSync(req.inputPath, "utf-8");
  } catch (err) {
    throw new ExportError(`cannot read input ${req.inputPath}: ${err}`);
  }
  const rows = parseCsv(text);
  if (rows.length === 0) {
    throw new ExportError(`${req.inputPath}: empty input`);
  }
  const header = rows[0];
  const idCol = header.indexOf("id");
  const smilesCol = header.indexOf("smiles");
  if (idCol === -1 || smilesCol === -1) {
    throw new ExportError(
      `${req.inputPath}: header must contain 'id' and 'smiles' columns`);
  }

  const report: SkipReport = { rows: rows.length - 1, exported: 0, skipped: [] };
  const keyRows: (string | number)[][] = [];
  const descriptorRows: (string | number)[][] = [];
  for (let r = 1; r < rows.length; r++) {
    const id = rows[r][idCol];
    const smiles = rows[r][smilesCol];
    try {
      const graph = parseSmiles(smiles);
      keyRows.push([id, ...computeKeys(graph)]);
      const descriptors = computeDescriptors(graph);
      for (const column of MORDRED_COLUMNS) {
        if (!Number.isFinite(descriptors[column])) {
          throw new SmilesError(`descriptor ${column} is not finite`);
        }
      }
      descriptorRows.push([id, ...MORDRED_COLUMNS.map((c) => descriptors[c])]);
      report.exported += 1;
    } catch (err) {
      if (!(err instanceof SmilesError) || !req.skipInvalid) {
        throw new ExportError(`row ${r + 1} (id ${JSON.stringify(id)}): ${
          err instanceof Error ? err.message : err}`);
      }
      report.skipped.push({ id, smiles, reason: err.message });
    }
  }
  if (report.exported === 0) {
    throw new ExportError(`${req.inputPath}: no valid rows to export`);
  }

  const keyHeader = ["id",
    ...Array.from({ length: KEY_COUNT }, (_, b) => `maccs_${b + 1}`)];
  writeFileSync(req.maccsPath, writeCsv(keyHeader, keyRows));
  writeFileSync(req.mordredPath,
    writeCsv(["id", ...MORDRED_COLUMNS], descriptorRows));
  if (req.reportPath) {
    writeFileSync(req.reportPath, JSON.stringify(report, null, 2) + "\n");
  }
  return report;
}

function parseArgs(argv: string[]): ExportRequest {
  const args = new Map<string, string>();
  let skipInvalid = false;
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === "--skip-invalid") {
      skipInvalid = true;
    } else if (argv[i].startsWith("--")) {
      args.set(argv[i].slice(2), argv[i + 1] ?? "");
      i += 1;
    }
  }
  const input = args.get("in");
  const maccs = args.get("maccs");
  const mordred = args.get("mordred");
  if (!input || !maccs || !mordred) {
    throw new ExportError(
      "usage: export --in molecules.csv --maccs maccs.csv " +
      "--mordred mordred.csv [--skip-invalid] [--report report.json]");
  }
  return {
    inputPath: input,
    maccsPath: maccs,
    mordredPath: mordred,
    skipInvalid,
    reportPath: args.get("report"),
  };
}

export function main(argv: string[]): number {
  try {
    const report = exportDescriptors(parseArgs(argv));
    console.log(
      `exported ${report.exported}/${report.rows} rows` +
      (report.skipped.length ? `, skipped ${report.skipped.length}` : ""));
    for (const skip of report.skipped) {
      console.log(`  skipped ${skip.id}: ${skip.reason}`);
    }
    return 0;
  } catch (err) {
    console.error(err instanceof Error ? err.message : String(err));
    return 1;
  }
}

const entryPoint = process.argv[1] ?? "";
if (entryPoint.endsWith("exporter.js") || entryPoint.endsWith("exporter.ts")) {
  process.exit(main(process.argv.slice(2)));
}
