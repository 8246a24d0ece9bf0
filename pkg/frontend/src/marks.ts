// Three-state toggle model for the clarification tree: each non-root node is
// unset, yes, or no. The marks payload contains exactly the toggled nodes;
// untouched nodes are omitted so the server treats them as unmarked.

import type { TreeJson } from "./api";

export type ToggleState = "unset" | "yes" | "no";

/** index -> toggle; absence means unset. */
export type Toggles = Record<number, "yes" | "no">;

export function cycleToggle(state: ToggleState): ToggleState {
  if (state === "unset") return "yes";
  if (state === "yes") return "no";
  return "unset";
}

export function toggleState(toggles: Toggles, index: number): ToggleState {
  return toggles[index] ?? "unset";
}

/** Returns a new toggle map; setting "unset" removes the entry. */
export function setToggle(toggles: Toggles, index: number, state: ToggleState): Toggles {
  if (index === 1) return toggles; // the root query is never markable
  const next: Toggles = { ...toggles };
  if (state === "unset") {
    delete next[index];
  } else {
    next[index] = state;
  }
  return next;
}

/** Payload for POST /marks: exactly the toggled non-root nodes. */
export function buildMarksPayload(toggles: Toggles): Record<string, string> {
  const payload: Record<string, string> = {};
  for (const key of Object.keys(toggles)
    .map(Number)
    .sort((a, b) => a - b)) {
    if (key !== 1) payload[String(key)] = toggles[key];
  }
  return payload;
}

/** Client-side mirror of the server's partition: which node indices will be
 * recorded as affirmed and negated for a toggle set. */
export function partition(
  tree: TreeJson,
  toggles: Toggles
): { affirmed: number[]; negated: number[] } {
  const known = new Set(tree.nodes.map((n) => n.index));
  const affirmed: number[] = [];
  const negated: number[] = [];
  for (const key of Object.keys(toggles)
    .map(Number)
    .sort((a, b) => a - b)) {
    if (key === 1 || !known.has(key)) continue;
    (toggles[key] === "yes" ? affirmed : negated).push(key);
  }
  return { affirmed, negated };
}
