// Browser entry point: wires the pure view model to the DOM. The session id
// lives in the URL hash; the server event log is the only source of truth.

import { ConsultApi, type EventRecord } from "./api";
import { buildMarksPayload, setToggle, toggleState, cycleToggle, type Toggles } from "./marks";
import { renderReport, reportText } from "./report";
import { renderSession, type SessionView } from "./view";

const api = new ConsultApi(window.location.origin);

let events: EventRecord[] = [];
let toggles: Toggles = {};
let sessionId = window.location.hash.replace(/^#/, "");

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function render(view: SessionView): void {
  const root = document.getElementById("app");
  if (!root) return;
  root.textContent = "";

  const header = el("div", "header");
  header.append(el("span", "phase-badge", view.phase));
  if (view.domain) header.append(el("span", "domain-badge", view.domain.name));
  root.append(header);

  const chat = el("div", "chat");
  for (const bubble of view.messages) {
    const cls = bubble.clarified ? `bubble ${bubble.speaker} clarified` : `bubble ${bubble.speaker}`;
    chat.append(el("div", cls, bubble.text));
  }
  root.append(chat);

  if (view.clarified) {
    const summary = el("div", "clarified-summary");
    summary.append(
      el("div", "", `affirmed: ${view.clarified.affirmed.join(", ") || "none"}`),
      el("div", "", `does not apply: ${view.clarified.negated.join(", ") || "none"}`)
    );
    root.append(summary);
  }

  if (view.tree) {
    root.append(renderTreePanel(view));
  }

  if (view.report) {
    root.append(renderReportPanel(view.report));
  }

  const form = el("form", "send") as HTMLFormElement;
  const input = el("input", "send-input") as HTMLInputElement;
  input.disabled = view.sendDisabled;
  const button = el("button", "send-button", "send") as HTMLButtonElement;
  button.disabled = view.sendDisabled;
  form.append(input, button);
  form.addEventListener("submit", async (e) => {
    e.preventDefault();
    const text = input.value.trim();
    if (!text) return;
    await api.sendMessage(sessionId, text);
    await refresh();
  });
  root.append(form);
}

function renderTreePanel(view: SessionView): HTMLElement {
  const panel = el("div", "tree-panel");
  // indented outline: depth from the layer number
  for (const node of view.tree!.nodes) {
    const row = el("div", "tree-node");
    (row.style as CSSStyleDeclaration).paddingLeft = `${(node.layer - 1) * 1.5}rem`;
    row.append(el("span", "node-text", node.text));
    if (node.index !== 1) {
      const toggle = el("button", `toggle ${node.toggle}`, node.toggle) as HTMLButtonElement;
      toggle.addEventListener("click", () => {
        toggles = setToggle(toggles, node.index, cycleToggle(toggleState(toggles, node.index)));
        render(renderSession(events, toggles));
      });
      row.append(toggle);
    }
    panel.append(row);
  }
  const submit = el("button", "submit-marks", "submit answers") as HTMLButtonElement;
  submit.addEventListener("click", async () => {
    try {
      await api.submitMarks(sessionId, buildMarksPayload(toggles));
      toggles = {};
      await refresh();
    } catch {
      panel.textContent = "session moved on; refresh to resync";
    }
  });
  panel.append(submit);
  return panel;
}

function renderReportPanel(report: Record<string, string>): HTMLElement {
  const panel = el("div", "report-panel");
  for (const block of renderReport(report)) {
    const section = el("section", block.missing ? "report-section missing" : "report-section");
    section.append(el("h3", "", `${block.tag} ${block.label}`));
    section.append(el("p", "", block.missing ? "missing" : block.text));
    panel.append(section);
  }
  const copy = el("button", "copy-report", "copy") as HTMLButtonElement;
  copy.addEventListener("click", () => navigator.clipboard.writeText(reportText(report)));
  panel.append(copy);
  return panel;
}

async function refresh(): Promise<void> {
  events = await api.eventSnapshot(sessionId);
  render(renderSession(events, toggles));
}

async function start(): Promise<void> {
  if (!sessionId) {
    sessionId = await api.createSession({});
    window.location.hash = sessionId;
  }
  await refresh();
}

start().catch((err) => {
  const root = document.getElementById("app");
  if (root) root.textContent = `failed to start session: ${err}`;
});
