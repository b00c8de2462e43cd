/** Thin typed client for the session API; the UI holds no business logic. */

import type {
  ChoiceRequest,
  SceneInfo,
  SessionEvent,
  SessionProjection,
  StepManifest,
  StepSummary,
} from "./types.js";

export class ApiConflictError extends Error {}

async function asJson<T>(response: Response): Promise<T> {
  if (response.status === 409) {
    const body = await response.json().catch(() => ({ detail: "conflict" }));
    throw new ApiConflictError(String((body as { detail?: string }).detail ?? "conflict"));
  }
  if (!response.ok) {
    const text = await response.text();
    throw new Error(`${response.status}: ${text}`);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  listScenes(): Promise<SceneInfo[]> {
    return this.get<SceneInfo[]>("/api/scenes");
  }

  createSession(scene: string, config: Record<string, unknown> = {}): Promise<SessionProjection> {
    return this.post<SessionProjection>("/api/sessions", { scene, config });
  }

  getSession(id: string): Promise<SessionProjection> {
    return this.get<SessionProjection>(`/api/sessions/${id}`);
  }

  getSteps(id: string): Promise<StepSummary[]> {
    return this.get<StepSummary[]>(`/api/sessions/${id}/steps`);
  }

  getManifest(id: string, step: number): Promise<StepManifest> {
    return this.get<StepManifest>(
      `/api/sessions/${id}/steps/${step}/artifacts/manifest.json`,
    );
  }

  artifactUrl(id: string, step: number, name: string): string {
    return `${this.base}/api/sessions/${id}/steps/${step}/artifacts/${name}`;
  }

  /** Posts exactly the choice payload the session state machine consumes. */
  submitChoice(id: string, choice: ChoiceRequest): Promise<SessionProjection> {
    return this.post<SessionProjection>(`/api/sessions/${id}/choices`, choice);
  }

  getEvents(id: string, after: number, wait = 0): Promise<{ events: SessionEvent[] }> {
    const params = new URLSearchParams({ after: String(after) });
    if (wait > 0) params.set("wait", String(wait));
    return this.get<{ events: SessionEvent[] }>(`/api/sessions/${id}/events?${params}`);
  }

  /**
   * Event subscription: server-sent events when available, long-polling via
   * the same cursor otherwise. Returns an unsubscribe function. Either path
   * delivers at-least-once; the reducer dedups by sequence number.
   */
  openEvents(
    id: string,
    after: number,
    onEvent: (event: SessionEvent) => void,
  ): () => void {
    let cursor = after;
    if (typeof EventSource !== "undefined") {
      const source = new EventSource(
        `${this.base}/api/sessions/${id}/events/stream?after=${after}`,
      );
      source.onmessage = (msg) => {
        const event = JSON.parse(msg.data) as SessionEvent;
        cursor = Math.max(cursor, event.seq);
        onEvent(event);
        if (event.event === "session_done") source.close();
      };
      return () => source.close();
    }
    let stopped = false;
    const poll = async () => {
      while (!stopped) {
        try {
          const { events } = await this.getEvents(id, cursor, 10);
          for (const event of events) {
            cursor = Math.max(cursor, event.seq);
            onEvent(event);
            if (event.event === "session_done") return;
          }
        } catch {
          await new Promise((r) => setTimeout(r, 1000));
        }
      }
    };
    void poll();
    return () => {
      stopped = true;
    };
  }

  private async get<T>(path: string): Promise<T> {
    return asJson<T>(await this.fetchImpl(`${this.base}${path}`));
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.base}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return asJson<T>(response);
  }
}
