import { beforeEach, describe, expect, it, vi } from 'vitest';

import { TutorlabApi } from '../src/api.js';
import { ReportView, renderReport } from '../src/report.js';
import type { ReportRow } from '../src/types.js';

const ROWS: ReportRow[] = [
  {
    student_id: 'acct0002', login: 's001', display_name: 'Student One',
    problems_completed: 2, percent_correct_first_attempts: 75.0,
    mastered_kc_count: 1, last_activity: '2026-01-05T09:00:12.000Z',
  },
  {
    student_id: 'acct0003', login: 's002', display_name: '',
    problems_completed: 0, percent_correct_first_attempts: 0.0,
    mastered_kc_count: 0, last_activity: null,
  },
];

describe('report table', () => {
  let root: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = '<div id="root"></div>';
    root = document.getElementById('root')!;
  });

  it('renders one row per student with formatted cells', () => {
    renderReport(root, ROWS);
    const rows = root.querySelectorAll('tr[data-student]');
    expect(rows.length).toBe(2);
    const first = rows[0]!;
    expect([...first.children].map((c) => c.textContent)).toEqual(
      ['Student One', '2', '75.0', '1', '2026-01-05T09:00:12.000Z'],
    );
    const second = rows[1]!;
    expect(second.children[0]!.textContent).toBe('s002'); // falls back to login
    expect(second.children[4]!.textContent).toBe('—');    // null last activity
  });

  it('polls on the configured interval', async () => {
    vi.useFakeTimers();
    const api = new TutorlabApi('http://unused');
    const calls: number[] = [];
    api.classReport = vi.fn(async () => {
      calls.push(Date.now());
      return ROWS;
    });
    const view = new ReportView(root, api, 'class0001', 10_000);
    await view.startPolling();
    expect(api.classReport).toHaveBeenCalledTimes(1);
    await vi.advanceTimersByTimeAsync(10_000);
    expect(api.classReport).toHaveBeenCalledTimes(2);
    await vi.advanceTimersByTimeAsync(20_000);
    expect(api.classReport).toHaveBeenCalledTimes(4);
    view.stop();
    await vi.advanceTimersByTimeAsync(30_000);
    expect(api.classReport).toHaveBeenCalledTimes(4);
    vi.useRealTimers();
  });
});
