#!/usr/bin/env node
/**
 * annotate --in questions.jsonl --out annotations.jsonl [--model <name>]
 *
 * Exports one annotation record per unique input text, preceded by a header
 * line recording the pinned tagger/model versions.
 */

import { MODEL_NAME } from "./annotate";
import { annotateFile } from "./io";

function parseArgs(argv: string[]): Map<string, string> {
  const args = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) {
      throw new Error(`unexpected argument: ${arg}`);
    }
    const value = argv[i + 1];
    if (value === undefined || value.startsWith("--")) {
      throw new Error(`missing value for ${arg}`);
    }
    args.set(arg.slice(2), value);
    i++;
  }
  return args;
}

function main(): number {
  let args: Map<string, string>;
  try {
    args = parseArgs(process.argv.slice(2));
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    console.error("usage: annotate --in questions.jsonl --out annotations.jsonl [--model <name>]");
    return 1;
  }
  const inPath = args.get("in");
  const outPath = args.get("out");
  if (!inPath || !outPath) {
    console.error("usage: annotate --in questions.jsonl --out annotations.jsonl [--model <name>]");
    return 1;
  }
  const requestedModel = args.get("model") ?? MODEL_NAME;
  if (requestedModel !== MODEL_NAME) {
    // Only the bundled model ships with this tool; anything else is unloadable.
    console.error(`cannot load model ${requestedModel}; available: ${MODEL_NAME}`);
    return 1;
  }
  try {
    const count = annotateFile(inPath, outPath);
    console.log(`wrote ${count} annotation record(s) to ${outPath}`);
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

process.exitCode = main();
