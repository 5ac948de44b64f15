/** File-level batch annotation: question extraction, JSONL export. */

import * as fs from "node:fs";
import { AnnotationRecord, annotateTexts, headerLine } from "./annotate";

/**
 * Pull question texts out of an input file.
 *
 * JSONL input (.jsonl/.ndjson, or any file whose lines parse as objects)
 * reads the "question" or "text" field per line; anything else is treated as
 * plain text, one question per line. Malformed JSONL lines are skipped with
 * a warning rather than aborting the batch.
 */
export function readQuestions(path: string, warn: (msg: string) => void = console.error): string[] {
  const raw = fs.readFileSync(path, "utf8");
  const lines = raw.split(/\r?\n/).filter((line) => line.trim().length > 0);
  const jsonish = path.endsWith(".jsonl") || path.endsWith(".ndjson") || lines.every((l) => l.trim().startsWith("{"));
  if (!jsonish) return lines.map((line) => line.trim());

  const questions: string[] = [];
  lines.forEach((line, index) => {
    let parsed: unknown;
    try {
      parsed = JSON.parse(line);
    } catch {
      warn(`line ${index + 1}: not valid JSON, skipped`);
      return;
    }
    if (typeof parsed !== "object" || parsed === null) {
      warn(`line ${index + 1}: not an object, skipped`);
      return;
    }
    const record = parsed as Record<string, unknown>;
    const text = record.question ?? record.text;
    if (typeof text !== "string" || text.trim().length === 0) {
      warn(`line ${index + 1}: no "question" or "text" field, skipped`);
      return;
    }
    questions.push(text);
  });
  return questions;
}

export function recordsToJsonl(records: AnnotationRecord[]): string {
  const lines = [JSON.stringify(headerLine())];
  for (const record of records) {
    lines.push(JSON.stringify(record));
  }
  return lines.join("\n") + "\n";
}

/** Annotate every unique question in a file; returns the record count. */
export function annotateFile(
  inPath: string,
  outPath: string,
  warn: (msg: string) => void = console.error,
): number {
  const questions = readQuestions(inPath, warn);
  const records = annotateTexts(questions);
  fs.writeFileSync(outPath, recordsToJsonl(records), "utf8");
  return records.length;
}
