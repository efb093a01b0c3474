import type {
  GradeResult,
  NextExercise,
  Profile,
  ReportPayload,
  SessionInfo,
} from "./types";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly error: string,
    public readonly detail: string,
  ) {
    super(`${status} ${error}: ${detail}`);
  }
}

/** The subset of the service HTTP API the session flow needs. */
export interface ServiceClient {
  startSession(studentId: string, group?: string): Promise<SessionInfo>;
  nextExercise(sessionId: string): Promise<NextExercise>;
  submitAttempt(sessionId: string, answer: string): Promise<GradeResult>;
  skipExercise(sessionId: string): Promise<void>;
  getProfile(sessionId: string): Promise<Profile>;
  getReport(alpha: number): Promise<ReportPayload>;
}

async function parseError(response: Response): Promise<ApiError> {
  let error = "unknown";
  let detail = response.statusText;
  try {
    const body = (await response.json()) as { error?: string; detail?: string };
    if (body.error) error = body.error;
    if (body.detail) detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(response.status, error, detail);
}

export class HttpClient implements ServiceClient {
  constructor(private readonly baseUrl: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  startSession(studentId: string, group?: string): Promise<SessionInfo> {
    const body: Record<string, string> = { student_id: studentId };
    if (group) body.group = group;
    return this.request("/sessions", { method: "POST", body: JSON.stringify(body) });
  }

  nextExercise(sessionId: string): Promise<NextExercise> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/next`);
  }

  submitAttempt(sessionId: string, answer: string): Promise<GradeResult> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/attempt`, {
      method: "POST",
      body: JSON.stringify({ answer }),
    });
  }

  async skipExercise(sessionId: string): Promise<void> {
    await this.request(`/sessions/${encodeURIComponent(sessionId)}/skip`, {
      method: "POST",
      body: JSON.stringify({}),
    });
  }

  getProfile(sessionId: string): Promise<Profile> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/profile`);
  }

  getReport(alpha: number): Promise<ReportPayload> {
    return this.request(`/experiment/report?alpha=${alpha}`);
  }
}
