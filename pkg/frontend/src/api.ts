/** Thin fetch client for the service API. Bearer-token auth, JSON bodies. */

import type {
  AccountOut,
  AssignmentOut,
  EvaluationView,
  ReportRow,
  SessionOpen,
  WorklistEntry,
} from './types.js';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: { error?: string; detail?: string; [k: string]: unknown },
  ) {
    super(`HTTP ${status}: ${body.detail ?? JSON.stringify(body)}`);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class TutorlabApi {
  token: string | null = null;

  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown, raw?: string): Promise<T> {
    const headers: Record<string, string> = {};
    if (this.token) headers['Authorization'] = `Bearer ${this.token}`;
    let payload: string | undefined;
    if (raw !== undefined) {
      headers['Content-Type'] = 'text/csv';
      payload = raw;
    } else if (body !== undefined) {
      headers['Content-Type'] = 'application/json';
      payload = JSON.stringify(body);
    }
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: payload,
      credentials: 'include', // keep the Authorization header on cross-origin calls
    });
    const text = await response.text();
    const looksJson = text.startsWith('{') || text.startsWith('[');
    const parsed = looksJson ? JSON.parse(text) : text;
    if (!response.ok) {
      throw new ApiError(response.status, typeof parsed === 'object' ? parsed : { detail: text });
    }
    return parsed as T;
  }

  async login(login: string): Promise<AccountOut> {
    const out = await this.request<{ token: string; account: AccountOut }>(
      'POST', '/api/login', { login });
    this.token = out.token;
    return out.account;
  }

  createAccount(login: string, role: string, displayName = ''): Promise<AccountOut> {
    return this.request('POST', '/api/accounts', { login, role, display_name: displayName });
  }

  createClass(name: string, studentIds: string[], teacherId?: string): Promise<{ id: string }> {
    return this.request('POST', '/api/classes', {
      name, student_ids: studentIds, teacher_id: teacherId ?? null });
  }

  publishPackage(doc: { name: string }): Promise<{ name: string; version: number }> {
    return this.request('PUT', `/api/packages/${doc.name}`, doc);
  }

  createAssignment(spec: Record<string, unknown>): Promise<AssignmentOut> {
    return this.request('POST', '/api/assignments', spec);
  }

  importConditions(csv: string): Promise<{ rows_imported: number }> {
    return this.request('POST', '/api/conditions/import', undefined, csv);
  }

  worklist(): Promise<WorklistEntry[]> {
    return this.request('GET', '/api/worklist');
  }

  openSession(assignmentId: string): Promise<SessionOpen> {
    return this.request('POST', `/api/assignments/${assignmentId}/session`, {});
  }

  submit(sessionId: string, selection: string, action: string, input: string): Promise<EvaluationView> {
    return this.request('POST', `/api/sessions/${sessionId}/transactions`, {
      selection, action, input, kind: 'attempt' });
  }

  hint(sessionId: string, selection?: string): Promise<EvaluationView> {
    return this.request('POST', `/api/sessions/${sessionId}/hint`, {
      selection: selection ?? null });
  }

  classReport(classId: string): Promise<ReportRow[]> {
    return this.request('GET', `/api/classes/${classId}/report`);
  }

  exportLog(): Promise<string> {
    return this.request('GET', '/api/logs/export');
  }
}
