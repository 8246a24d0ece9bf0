// Thin typed client over the consultation service. Every method maps to one
// endpoint; no client-side state beyond the base URL.

export type DomainInfo = { id: number; name: string };

export type TreeNodeJson = {
  index: number;
  layer: number;
  parent_index: number | null;
  text: string;
  mark: string;
  retrieved_case_ids: string[];
};

export type TreeJson = {
  K: number;
  H: number;
  origin_turn: number;
  nodes: TreeNodeJson[];
};

export type MessageReply =
  | { kind: "response"; text: string }
  | { kind: "awaiting_marks"; tree: TreeJson };

export type TranscriptTurn = {
  index: number;
  speaker: "user" | "lawyer";
  text: string;
  clarification_used: boolean;
};

export type SessionState = {
  session_id: string;
  phase: string;
  domain: DomainInfo | null;
  transcript: TranscriptTurn[];
  report: Record<string, string> | null;
};

export type EventRecord = {
  seq: number;
  timestamp: string;
  event_type: string;
  payload: Record<string, unknown>;
};

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function expectOk(resp: Response): Promise<Response> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, detail);
  }
  return resp;
}

export class ConsultApi {
  constructor(private base: string) {}

  private url(path: string): string {
    return this.base.replace(/\/$/, "") + path;
  }

  async createSession(body: Record<string, unknown> = {}): Promise<string> {
    const resp = await expectOk(
      await fetch(this.url("/sessions"), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      })
    );
    const data = await resp.json();
    return data.session_id as string;
  }

  async sendMessage(sessionId: string, text: string): Promise<MessageReply> {
    const resp = await expectOk(
      await fetch(this.url(`/sessions/${sessionId}/messages`), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ text }),
      })
    );
    return (await resp.json()) as MessageReply;
  }

  async getTree(sessionId: string): Promise<TreeJson> {
    const resp = await expectOk(await fetch(this.url(`/sessions/${sessionId}/tree`)));
    return (await resp.json()) as TreeJson;
  }

  async submitMarks(sessionId: string, marks: Record<string, string>): Promise<string> {
    const resp = await expectOk(
      await fetch(this.url(`/sessions/${sessionId}/marks`), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ marks }),
      })
    );
    return (await resp.json()).text as string;
  }

  async closeSession(sessionId: string): Promise<Record<string, string>> {
    const resp = await expectOk(
      await fetch(this.url(`/sessions/${sessionId}/close`), { method: "POST" })
    );
    return (await resp.json()) as Record<string, string>;
  }

  async getSession(sessionId: string): Promise<SessionState> {
    const resp = await expectOk(await fetch(this.url(`/sessions/${sessionId}`)));
    return (await resp.json()) as SessionState;
  }

  async reportText(sessionId: string): Promise<string> {
    const resp = await expectOk(await fetch(this.url(`/sessions/${sessionId}/report.txt`)));
    return await resp.text();
  }

  /** One-shot dump of the event log (follow=0); ndjson parsed per line. */
  async eventSnapshot(sessionId: string): Promise<EventRecord[]> {
    const resp = await expectOk(
      await fetch(this.url(`/sessions/${sessionId}/events?follow=0`))
    );
    const text = await resp.text();
    return text
      .split("\n")
      .filter((line) => line.trim().length > 0)
      .map((line) => JSON.parse(line) as EventRecord);
  }
}
