/** Thin typed client over the advisor's HTTP+JSON API. */

import type {
  MonitorStatus,
  Preferences,
  SessionCreated,
  SessionManifest,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: unknown,
  ) {
    super(`HTTP ${status}: ${JSON.stringify(detail)}`);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  const body = await response.json().catch(() => null);
  if (!response.ok) {
    throw new ApiError(response.status, body?.detail ?? body);
  }
  return body as T;
}

export class AdvisorClient {
  constructor(private base: string = "") {}

  listSessions(): Promise<{ sessions: string[]; active: string | null }> {
    return request(`${this.base}/sessions`);
  }

  createSession(preferences: Preferences | null, seed: number): Promise<SessionCreated> {
    return request(`${this.base}/sessions`, {
      method: "POST",
      body: JSON.stringify({ preferences, seed }),
    });
  }

  getSession(sessionId: string): Promise<SessionManifest> {
    return request(`${this.base}/sessions/${sessionId}`);
  }

  updatePreferences(
    sessionId: string,
    preferences: Preferences,
    seed?: number,
  ): Promise<SessionCreated> {
    return request(`${this.base}/sessions/${sessionId}/preferences`, {
      method: "PUT",
      body: JSON.stringify({ preferences, seed }),
    });
  }

  monitorStatus(): Promise<MonitorStatus> {
    return request(`${this.base}/monitor/status`);
  }
}
