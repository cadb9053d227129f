/** DOM tutor player: renders the interface from the session-open payload,
 * posts transactions, and paints marks/hints strictly from server responses
 * (no optimistic UI). */

import { TutorlabApi } from './api.js';
import {
  SessionView,
  applyEvaluation,
  applyHint,
  applyTutorActions,
  createView,
  hintLabel,
} from './session.js';
import { EvaluationView, SessionOpen, WIDGET_ACTIONS, WidgetSpec } from './types.js';

export class TutorPlayer {
  view: SessionView | null = null;
  sessionId: string | null = null;
  assignmentId: string | null = null;
  private queue: Promise<void> = Promise.resolve();
  private problemsDone = 0;

  constructor(
    readonly root: HTMLElement,
    readonly api: TutorlabApi,
    readonly doc: Document = root.ownerDocument,
  ) {}

  /** Wait until all in-flight submissions have been answered and painted. */
  idle(): Promise<void> {
    return this.queue;
  }

  async start(assignmentId: string): Promise<SessionOpen> {
    this.assignmentId = assignmentId;
    const open = await this.api.openSession(assignmentId);
    if (open.complete) {
      this.renderAssignmentComplete();
      return open;
    }
    this.sessionId = open.session_id ?? null;
    this.view = createView(open, this.problemsDone);
    this.renderInterface();
    return open;
  }

  /** Advance to the policy's next problem after completing one. */
  async nextProblem(): Promise<SessionOpen> {
    if (!this.assignmentId) throw new Error('player not started');
    if (this.view?.completed) this.problemsDone += 1;
    return this.start(this.assignmentId);
  }

  private renderAssignmentComplete(): void {
    this.root.innerHTML = '';
    const done = this.doc.createElement('p');
    done.className = 'assignment-complete';
    done.textContent = 'All problems complete. Nice work!';
    this.root.appendChild(done);
  }

  renderInterface(): void {
    if (!this.view) return;
    this.root.innerHTML = '';
    const heading = this.doc.createElement('h2');
    heading.className = 'problem-name';
    heading.textContent = this.view.problem;
    this.root.appendChild(heading);

    const form = this.doc.createElement('div');
    form.className = 'tutor-widgets';
    for (const spec of this.view.specs) {
      form.appendChild(this.renderWidget(spec));
    }
    this.root.appendChild(form);

    const feedback = this.doc.createElement('p');
    feedback.className = 'feedback';
    this.root.appendChild(feedback);

    if (!this.view.testMode) {
      const hintButton = this.doc.createElement('button');
      hintButton.className = 'hint-button';
      hintButton.textContent = 'Hint';
      hintButton.addEventListener('click', () => this.requestHint());
      this.root.appendChild(hintButton);
      const panel = this.doc.createElement('div');
      panel.className = 'hint-panel';
      panel.hidden = true;
      this.root.appendChild(panel);
    }

    const next = this.doc.createElement('button');
    next.className = 'next-problem';
    next.textContent = 'Next problem';
    next.hidden = true;
    next.addEventListener('click', () => void this.nextProblem());
    this.root.appendChild(next);

    const progress = this.doc.createElement('p');
    progress.className = 'progress';
    this.root.appendChild(progress);
    this.paint();
  }

  private renderWidget(spec: WidgetSpec): HTMLElement {
    const wrap = this.doc.createElement('div');
    wrap.className = 'widget';
    wrap.dataset.widget = spec.id;
    wrap.dataset.mark = 'none';
    const caption = this.doc.createElement('label');
    caption.textContent = spec.label ?? spec.id;
    wrap.appendChild(caption);

    switch (spec.kind) {
      case 'text_input':
      case 'numeric_input':
      case 'grid': {
        const input = this.doc.createElement('input');
        input.type = spec.kind === 'numeric_input' ? 'number' : 'text';
        input.addEventListener('change', () => this.submitStep(spec.id, input.value));
        wrap.appendChild(input);
        break;
      }
      case 'menu': {
        const select = this.doc.createElement('select');
        const blank = this.doc.createElement('option');
        blank.value = '';
        blank.textContent = '--';
        select.appendChild(blank);
        for (const option of spec.options ?? []) {
          const el = this.doc.createElement('option');
          el.value = option;
          el.textContent = option;
          select.appendChild(el);
        }
        select.addEventListener('change', () => this.submitStep(spec.id, select.value));
        wrap.appendChild(select);
        break;
      }
      case 'radio_group': {
        for (const option of spec.options ?? []) {
          const label = this.doc.createElement('label');
          const radio = this.doc.createElement('input');
          radio.type = 'radio';
          radio.name = spec.id;
          radio.value = option;
          radio.addEventListener('change', () => this.submitStep(spec.id, option));
          label.appendChild(radio);
          label.append(option);
          wrap.appendChild(label);
        }
        break;
      }
      case 'button': {
        const button = this.doc.createElement('button');
        button.textContent = spec.label ?? spec.id;
        button.addEventListener('click', () => this.submitStep(spec.id, ''));
        wrap.appendChild(button);
        break;
      }
      case 'label':
        break;
      default: {
        // Unsupported widget: inline notice, rest of the interface still works.
        const warning = this.doc.createElement('span');
        warning.className = 'unsupported-widget';
        warning.textContent = `unsupported widget kind: ${spec.kind}`;
        wrap.appendChild(warning);
      }
    }
    return wrap;
  }

  /** Post one step; the view only changes when the evaluation arrives. */
  submitStep(widgetId: string, value: string): Promise<void> {
    const task = async () => {
      if (!this.view || !this.sessionId) return;
      const state = this.view.widgets[widgetId];
      if (!state || state.locked) return; // client-side guard: no request sent
      const spec = this.view.specs.find((s) => s.id === widgetId);
      const action = WIDGET_ACTIONS[spec?.kind ?? ''] ?? 'UpdateText';
      let evaluation: EvaluationView;
      try {
        evaluation = await this.api.submit(this.sessionId, widgetId, action, value);
      } catch (err) {
        this.showError(err);
        return;
      }
      applyEvaluation(this.view, widgetId, value, evaluation);
      this.paint();
    };
    this.queue = this.queue.then(task);
    return this.queue;
  }

  requestHint(): Promise<void> {
    const task = async () => {
      if (!this.view || !this.sessionId || this.view.testMode) return;
      let evaluation: EvaluationView;
      try {
        evaluation = await this.api.hint(this.sessionId);
      } catch (err) {
        this.showError(err);
        return;
      }
      applyHint(this.view, evaluation);
      this.paint();
    };
    this.queue = this.queue.then(task);
    return this.queue;
  }

  private showError(err: unknown): void {
    const feedback = this.root.querySelector<HTMLElement>('.feedback');
    if (feedback) {
      feedback.textContent = `request failed: ${err instanceof Error ? err.message : String(err)}`;
      feedback.dataset.error = 'true';
    }
  }

  /** Reconcile the DOM with the view state. */
  paint(): void {
    if (!this.view) return;
    for (const [id, state] of Object.entries(this.view.widgets)) {
      const wrap = this.root.querySelector<HTMLElement>(`[data-widget="${id}"]`);
      if (!wrap) continue;
      wrap.dataset.mark = this.view.testMode ? 'none' : state.mark;
      const input = wrap.querySelector<HTMLInputElement>('input, select');
      if (input && input.type !== 'radio') {
        input.value = state.value;
        input.disabled = state.locked;
      }
    }
    const feedback = this.root.querySelector<HTMLElement>('.feedback');
    if (feedback && !feedback.dataset.error) {
      feedback.textContent = this.view.testMode ? '' : this.view.feedback ?? '';
    }
    const panel = this.root.querySelector<HTMLElement>('.hint-panel');
    if (panel) {
      if (this.view.hint) {
        panel.hidden = false;
        panel.textContent = `${this.view.hint.text} (${hintLabel(this.view.hint)})`;
      } else {
        panel.hidden = true;
        panel.textContent = '';
      }
    }
    const next = this.root.querySelector<HTMLElement>('.next-problem');
    if (next) next.hidden = !this.view.completed;
    const progress = this.root.querySelector<HTMLElement>('.progress');
    if (progress) {
      const done = this.view.completed ? ' — problem complete' : '';
      progress.textContent = `problems finished: ${this.view.problemsDone}${done}`;
    }
  }
}

export { applyEvaluation, applyHint, applyTutorActions, createView };
