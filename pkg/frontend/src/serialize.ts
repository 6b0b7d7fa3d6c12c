/** Canonical JSON export/import and request construction.
 *
 * Exports use sorted keys and no whitespace, matching the server's
 * serializer, so export -> import round-trips are exact and the downloaded
 * result payload can be re-saved untouched.
 */
import { EditorState, fromBlockingDoc, toBlockingDoc } from "./state.js";
import {
  BlockingDoc,
  GenerationRequestDoc,
  RefinementDoc,
  StrategyDoc,
} from "./types.js";

/** JSON.stringify with recursively sorted object keys. */
export function canonicalJson(value: unknown): string {
  return JSON.stringify(sortValue(value));
}

function sortValue(value: unknown): unknown {
  if (Array.isArray(value)) return value.map(sortValue);
  if (value && typeof value === "object") {
    const src = value as Record<string, unknown>;
    const out: Record<string, unknown> = {};
    for (const key of Object.keys(src).sort()) {
      out[key] = sortValue(src[key]);
    }
    return out;
  }
  return value;
}

export function exportBlocking(state: EditorState): string {
  return canonicalJson(toBlockingDoc(state));
}

export function importBlocking(text: string): EditorState {
  const doc = JSON.parse(text) as BlockingDoc;
  return fromBlockingDoc(doc);
}

/** Build the generation request exactly as the server expects it; the seed
 * and every config field pass through unmodified. */
export function buildRequest(
  state: EditorState,
  seed: number,
  strategy: StrategyDoc = { name: "detailing", params: {} },
  refinement?: RefinementDoc,
): GenerationRequestDoc {
  const doc: GenerationRequestDoc = {
    blocking: toBlockingDoc(state),
    strategy,
    seed,
  };
  if (refinement !== undefined) doc.refinement = refinement;
  return doc;
}
