// Pure view model: the rendered session is a function of the server event
// stream plus local (unsent) toggles. No client-invented content.

import type { EventRecord, TreeJson } from "./api";
import { toggleState, type Toggles, type ToggleState } from "./marks";

export type Phase =
  | "Reception"
  | "Consultation"
  | "AwaitingMarks"
  | "ReportGeneration"
  | "BossReview"
  | "Closed";

export type ChatBubble = {
  speaker: "user" | "lawyer";
  text: string;
  clarified: boolean;
};

export type TreeNodeView = {
  index: number;
  layer: number;
  parentIndex: number | null;
  text: string;
  toggle: ToggleState;
};

export type ClarifiedSummary = {
  affirmed: number[];
  negated: number[];
};

export type SessionView = {
  sessionId: string;
  phase: Phase;
  domain: { id: number; name: string } | null;
  messages: ChatBubble[];
  tree: { K: number; H: number; nodes: TreeNodeView[] } | null;
  clarified: ClarifiedSummary | null;
  report: Record<string, string> | null;
  sendDisabled: boolean;
};

const SEND_DISABLED_PHASES: Phase[] = [
  "AwaitingMarks",
  "ReportGeneration",
  "BossReview",
  "Closed",
];

function emptyView(): SessionView {
  return {
    sessionId: "",
    phase: "Reception",
    domain: null,
    messages: [],
    tree: null,
    clarified: null,
    report: null,
    sendDisabled: false,
  };
}

function renderTree(tree: TreeJson, toggles: Toggles): SessionView["tree"] {
  return {
    K: tree.K,
    H: tree.H,
    nodes: tree.nodes.map((n) => ({
      index: n.index,
      layer: n.layer,
      parentIndex: n.parent_index,
      text: n.text,
      toggle: n.index === 1 ? "unset" : toggleState(toggles, n.index),
    })),
  };
}

function applyEvent(view: SessionView, record: EventRecord, toggles: Toggles): void {
  const p = record.payload as any;
  switch (record.event_type) {
    case "SessionCreated":
      view.sessionId = p.session_id;
      view.phase = p.config?.receptionist_enabled === false ? "Consultation" : "Reception";
      break;
    case "DomainAssigned":
      view.domain = { id: p.domain_id, name: p.domain_name };
      view.phase = "Consultation";
      break;
    case "UserTurnAdded":
      view.messages.push({ speaker: "user", text: p.text, clarified: Boolean(p.clarification_used) });
      break;
    case "LawyerTurnAdded":
      view.messages.push({ speaker: "lawyer", text: p.text, clarified: Boolean(p.clarification_used) });
      break;
    case "ClarificationRequested":
      view.tree = renderTree(p.tree as TreeJson, toggles);
      view.phase = "AwaitingMarks";
      break;
    case "MarksSubmitted":
      // tree panel collapses into a clarified-facts summary
      view.tree = null;
      view.clarified = {
        affirmed: (p.affirmed_indices ?? []) as number[],
        negated: (p.negated_indices ?? []) as number[],
      };
      view.phase = "Consultation";
      break;
    case "CloseRequested":
      view.phase = "ReportGeneration";
      break;
    case "ReportReady":
      view.report = p.report as Record<string, string>;
      view.phase = "BossReview";
      break;
    case "Approved":
      view.phase = "Closed";
      break;
    default:
      // unknown event types are ignored; the server owns the vocabulary
      break;
  }
}

/**
 * Fold an event stream into a SessionView.
 *
 * Events are applied in seq order starting from 0; duplicates render once and
 * out-of-order arrivals are buffered until the gap fills. Events past an
 * unfilled gap are reported in `pendingSeqs` so callers can resync from the
 * snapshot endpoint.
 */
export function renderSession(
  events: EventRecord[],
  toggles: Toggles = {}
): SessionView & { pendingSeqs: number[] } {
  const bySeq = new Map<number, EventRecord>();
  for (const event of events) {
    if (!bySeq.has(event.seq)) bySeq.set(event.seq, event);
  }
  const view = emptyView();
  let next = 0;
  while (bySeq.has(next)) {
    applyEvent(view, bySeq.get(next)!, toggles);
    bySeq.delete(next);
    next += 1;
  }
  const pendingSeqs = [...bySeq.keys()].sort((a, b) => a - b);
  return {
    ...view,
    sendDisabled: SEND_DISABLED_PHASES.includes(view.phase),
    pendingSeqs,
  };
}
