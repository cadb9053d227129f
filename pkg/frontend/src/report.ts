/** Teacher report: read-only table over GET /api/classes/{id}/report,
 * refreshed by polling. */

import { TutorlabApi } from './api.js';
import type { ReportRow } from './types.js';

export const REPORT_POLL_MS = 10_000;

const COLUMNS: Array<[string, (row: ReportRow) => string]> = [
  ['Student', (r) => r.display_name || r.login],
  ['Problems done', (r) => String(r.problems_completed)],
  ['First-attempt %', (r) => r.percent_correct_first_attempts.toFixed(1)],
  ['Mastered KCs', (r) => String(r.mastered_kc_count)],
  ['Last activity', (r) => r.last_activity ?? '—'],
];

export function renderReport(root: HTMLElement, rows: ReportRow[], doc: Document = root.ownerDocument): void {
  root.innerHTML = '';
  const table = doc.createElement('table');
  table.className = 'class-report';
  const head = doc.createElement('tr');
  for (const [title] of COLUMNS) {
    const th = doc.createElement('th');
    th.textContent = title;
    head.appendChild(th);
  }
  table.appendChild(head);
  for (const row of rows) {
    const tr = doc.createElement('tr');
    tr.dataset.student = row.login;
    for (const [, cell] of COLUMNS) {
      const td = doc.createElement('td');
      td.textContent = cell(row);
      tr.appendChild(td);
    }
    table.appendChild(tr);
  }
  root.appendChild(table);
}

export class ReportView {
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    readonly root: HTMLElement,
    readonly api: TutorlabApi,
    readonly classId: string,
    readonly pollMs: number = REPORT_POLL_MS,
  ) {}

  async refresh(): Promise<void> {
    renderReport(this.root, await this.api.classReport(this.classId));
  }

  async startPolling(): Promise<void> {
    await this.refresh();
    this.timer = setInterval(() => void this.refresh(), this.pollMs);
  }

  stop(): void {
    if (this.timer !== null) clearInterval(this.timer);
    this.timer = null;
  }
}
