/** Page bootstrap: login, worklist, then the player (students) or the
 * class report (teachers/researchers). */

import { TutorlabApi } from './api.js';
import { TutorPlayer } from './player.js';
import { ReportView } from './report.js';
import type { WorklistEntry } from './types.js';

export function mountApp(root: HTMLElement, baseUrl = ''): void {
  const doc = root.ownerDocument;
  const api = new TutorlabApi(baseUrl);
  root.innerHTML = `
    <div class="login-pane">
      <input class="login-name" placeholder="account name" />
      <button class="login-go">Sign in</button>
    </div>
    <div class="worklist-pane" hidden><h2>Your work</h2><ul class="worklist"></ul></div>
    <div class="player-pane"></div>
    <div class="report-pane"></div>
  `;
  const loginName = root.querySelector<HTMLInputElement>('.login-name')!;
  const loginGo = root.querySelector<HTMLButtonElement>('.login-go')!;
  const worklistPane = root.querySelector<HTMLElement>('.worklist-pane')!;
  const worklistEl = root.querySelector<HTMLElement>('.worklist')!;
  const playerPane = root.querySelector<HTMLElement>('.player-pane')!;

  const showWorklist = (entries: WorklistEntry[]) => {
    worklistPane.hidden = false;
    worklistEl.innerHTML = '';
    for (const entry of entries) {
      const item = doc.createElement('li');
      const button = doc.createElement('button');
      button.textContent = `${entry.assignment.name} [${entry.status}]`;
      button.disabled = entry.status === 'locked' || entry.status === 'complete';
      button.addEventListener('click', () => {
        const player = new TutorPlayer(playerPane, api);
        void player.start(entry.assignment.id);
      });
      item.appendChild(button);
      worklistEl.appendChild(item);
    }
  };

  loginGo.addEventListener('click', () => {
    void (async () => {
      const account = await api.login(loginName.value.trim());
      if (account.role === 'student') {
        showWorklist(await api.worklist());
      } else {
        const reportPane = root.querySelector<HTMLElement>('.report-pane')!;
        reportPane.innerHTML = '<p>Enter a class id:</p><input class="class-id" /><button class="load-report">Load</button><div class="report-table"></div>';
        reportPane.querySelector('.load-report')!.addEventListener('click', () => {
          const classId = reportPane.querySelector<HTMLInputElement>('.class-id')!.value.trim();
          const view = new ReportView(reportPane.querySelector<HTMLElement>('.report-table')!, api, classId);
          void view.startPolling();
        });
      }
    })();
  });
}
