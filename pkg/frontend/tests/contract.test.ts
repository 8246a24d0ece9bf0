// Contract tests against a live mock-backend server. The server process is
// spawned from the installed CLI; everything asserted here goes over HTTP.

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ConsultApi } from "../src/api";
import { buildMarksPayload, partition, type Toggles } from "../src/marks";
import { reportText } from "../src/report";
import { renderSession } from "../src/view";

const PORT = 8750 + (process.pid % 1000);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
const api = new ConsultApi(BASE);

// deterministic PRNG so a failing toggle set is reproducible
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

async function waitForServer(): Promise<void> {
  const deadline = Date.now() + 30_000;
  while (Date.now() < deadline) {
    try {
      const resp = await fetch(`${BASE}/sessions/warmup-probe`);
      if (resp.status === 404) return;
    } catch {
      // not listening yet
    }
    await new Promise((r) => setTimeout(r, 200));
  }
  throw new Error("server did not come up within 30s");
}

beforeAll(async () => {
  const dataDir = mkdtempSync(join(tmpdir(), "lawluo-ui-"));
  server = spawn("lawluo", ["serve", "--data-dir", dataDir, "--port", String(PORT)], {
    stdio: "ignore",
  });
  await waitForServer();
}, 60_000);

afterAll(() => {
  server?.kill();
});

describe("marks round-trip against the live server", () => {
  it(
    "20 random toggle sets partition exactly on the server side",
    async () => {
      const rand = mulberry32(20);
      for (let round = 0; round < 20; round++) {
        const sessionId = await api.createSession({});
        const reply = await api.sendMessage(sessionId, "I want a divorce");
        expect(reply.kind).toBe("awaiting_marks");
        if (reply.kind !== "awaiting_marks") continue;
        const tree = reply.tree;
        expect(tree.K).toBe(3);
        expect(tree.H).toBe(3);
        expect(tree.nodes).toHaveLength(13);

        const toggles: Toggles = {};
        for (const node of tree.nodes) {
          if (node.index === 1) continue;
          const roll = rand();
          if (roll < 1 / 3) toggles[node.index] = "yes";
          else if (roll < 2 / 3) toggles[node.index] = "no";
          // else left unmarked
        }
        const payload = buildMarksPayload(toggles);
        const lawyerReply = await api.submitMarks(sessionId, payload);
        expect(lawyerReply.length).toBeGreaterThan(0);

        const events = await api.eventSnapshot(sessionId);
        const marksEvent = events.find((e) => e.event_type === "MarksSubmitted");
        expect(marksEvent).toBeDefined();
        const recorded = marksEvent!.payload as {
          marks: Record<string, string>;
          affirmed_indices: number[];
          negated_indices: number[];
        };
        const expected = partition(tree, toggles);
        expect(recorded.marks).toEqual(payload);
        expect(recorded.affirmed_indices).toEqual(expected.affirmed);
        expect(recorded.negated_indices).toEqual(expected.negated);
      }
    },
    120_000
  );

  it(
    "an empty payload is accepted as a root-only answer",
    async () => {
      const sessionId = await api.createSession({});
      await api.sendMessage(sessionId, "I want a divorce");
      const reply = await api.submitMarks(sessionId, {});
      expect(reply.length).toBeGreaterThan(0);
      const state = await api.getSession(sessionId);
      expect(state.phase).toBe("Consultation");
    },
    30_000
  );
});

describe("full consultation over HTTP", () => {
  it(
    "event snapshot renders to the server's own view of the session",
    async () => {
      const sessionId = await api.createSession({});
      await api.sendMessage(
        sessionId,
        "My employer dismissed me without notice and still owes me two months of wages"
      );
      const report = await api.closeSession(sessionId);
      expect(Object.keys(report)).toHaveLength(9);

      const events = await api.eventSnapshot(sessionId);
      const view = renderSession(events);
      const state = await api.getSession(sessionId);
      expect(view.phase).toBe(state.phase);
      expect(view.messages.map((m) => m.text)).toEqual(state.transcript.map((t) => t.text));
      expect(view.report).toEqual(state.report);

      // the copy action must be byte-faithful to the server's rendering
      const serverText = await api.reportText(sessionId);
      expect(reportText(report)).toBe(serverText);
    },
    30_000
  );
});
