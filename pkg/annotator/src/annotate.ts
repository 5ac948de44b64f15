/**
 * Question annotation: tokenization and POS tagging from wink-nlp's English
 * model, plus deterministic dependency-head assignment.
 *
 * No dependency parser is published for this runtime, so heads come from a
 * fixed rule layer over the tagger output. The exported records satisfy the
 * annotation contract consumed downstream: 0-based head indices, the root
 * pointing at itself, heads forming a tree.
 */

import { createHash } from "node:crypto";
import { createRequire } from "node:module";
import winkNLP, { ItemToken } from "wink-nlp";
import model from "wink-eng-lite-web-model";

const require_ = createRequire(__dirname + "/");

export const MODEL_NAME = "wink-eng-lite-web-model";
export const MODEL_VERSION: string = require_("wink-eng-lite-web-model/package.json").version;
export const TAGGER_NAME = "wink-nlp";
export const TAGGER_VERSION: string = require_("wink-nlp/package.json").version;

const nlp = winkNLP(model, ["sbd", "pos"]);
const its = nlp.its;

export interface AnnotatedToken {
  text: string;
  pos: string;
  head: number;
}

export interface AnnotationRecord {
  text_digest: string;
  text: string;
  tokens: AnnotatedToken[];
}

export interface AnnotationHeader {
  model: string;
  version: string;
}

export function textDigest(text: string): string {
  return createHash("sha256").update(text, "utf8").digest("hex");
}

/** Tokenize and POS-tag one text with the pinned model. */
export function tagText(text: string): Array<{ text: string; pos: string }> {
  const doc = nlp.readDoc(text);
  const tagged: Array<{ text: string; pos: string }> = [];
  doc.tokens().each((token: ItemToken) => {
    tagged.push({ text: String(token.out(its.value)), pos: String(token.out(its.pos)) });
  });
  return tagged;
}

const NOMINAL = new Set(["NOUN", "PROPN"]);
const PREDICATE = new Set(["VERB", "AUX"]);

function pickRoot(tags: string[]): number {
  for (const wanted of ["VERB", "AUX", "NOUN", "PROPN"]) {
    const index = tags.indexOf(wanted);
    if (index >= 0) return index;
  }
  return 0;
}

function nextIndex(tags: string[], from: number, classes: Set<string>): number {
  for (let j = from + 1; j < tags.length; j++) {
    if (classes.has(tags[j])) return j;
  }
  return -1;
}

function previousIndex(tags: string[], from: number, classes: Set<string>): number {
  for (let j = from - 1; j >= 0; j--) {
    if (classes.has(tags[j])) return j;
  }
  return -1;
}

/**
 * Deterministic head assignment over POS tags.
 *
 * Root: first VERB, else first AUX, else first noun, else token 0.
 * Determiners, adjectives and numerals lean on the next nominal; adpositions
 * on the nominal they introduce; adverbs on the nearest preceding predicate
 * or adjective; nominals and pronouns on the nearest preceding predicate;
 * everything else (and any fallback) on the root. Forward edges only target
 * nominals and nominals only point backward to predicates or the root, so
 * the links always form a tree.
 */
export function assignHeads(tags: string[]): number[] {
  const n = tags.length;
  const root = pickRoot(tags);
  const heads: number[] = new Array(n).fill(root);
  const ADV_HOSTS = new Set(["VERB", "AUX", "ADJ"]);

  for (let i = 0; i < n; i++) {
    if (i === root) {
      heads[i] = i;
      continue;
    }
    const tag = tags[i];
    let head = -1;
    if (tag === "DET" || tag === "ADJ" || tag === "NUM") {
      head = nextIndex(tags, i, NOMINAL);
      if (head < 0) head = previousIndex(tags, i, NOMINAL);
    } else if (tag === "ADP" || tag === "PART") {
      head = nextIndex(tags, i, NOMINAL);
    } else if (tag === "ADV") {
      head = previousIndex(tags, i, ADV_HOSTS);
    } else if (NOMINAL.has(tag) || tag === "PRON") {
      head = previousIndex(tags, i, PREDICATE);
    }
    heads[i] = head >= 0 && head !== i ? head : root;
  }
  return heads;
}

export function annotateText(text: string): AnnotationRecord {
  const tagged = tagText(text);
  if (tagged.length === 0) {
    throw new Error(`no tokens in text: ${JSON.stringify(text)}`);
  }
  const heads = assignHeads(tagged.map((t) => t.pos));
  const record: AnnotationRecord = {
    text_digest: textDigest(text),
    text,
    tokens: tagged.map((t, i) => ({ text: t.text, pos: t.pos, head: heads[i] })),
  };
  validateRecord(record);
  return record;
}

const UNIVERSAL_TAGS = new Set([
  "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
  "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
]);

/** Assert the annotation contract; throws with a reason on violation. */
export function validateRecord(record: AnnotationRecord): void {
  if (record.text_digest !== textDigest(record.text)) {
    throw new Error("text_digest does not match text");
  }
  const n = record.tokens.length;
  if (n === 0) throw new Error("record has no tokens");
  const roots: number[] = [];
  record.tokens.forEach((token, i) => {
    if (!Number.isInteger(token.head) || token.head < 0 || token.head >= n) {
      throw new Error(`token ${i}: head ${token.head} out of range`);
    }
    if (!UNIVERSAL_TAGS.has(token.pos)) {
      throw new Error(`token ${i}: ${token.pos} is not a universal POS tag`);
    }
    if (token.head === i) roots.push(i);
  });
  if (roots.length !== 1) {
    throw new Error(`expected exactly one root, found ${roots.length}`);
  }
  const root = roots[0];
  for (let i = 0; i < n; i++) {
    const seen = new Set<number>();
    let j = i;
    while (j !== root) {
      if (seen.has(j)) throw new Error(`cycle through token ${i}`);
      seen.add(j);
      j = record.tokens[j].head;
    }
  }
}

/** Annotate unique texts in first-seen order (duplicates collapse by digest). */
export function annotateTexts(texts: string[]): AnnotationRecord[] {
  const seen = new Set<string>();
  const records: AnnotationRecord[] = [];
  for (const text of texts) {
    const digest = textDigest(text);
    if (seen.has(digest)) continue;
    seen.add(digest);
    records.push(annotateText(text));
  }
  return records;
}

export function headerLine(): AnnotationHeader {
  return {
    model: `${TAGGER_NAME}/${MODEL_NAME}`,
    version: `${TAGGER_VERSION}/${MODEL_VERSION}`,
  };
}
