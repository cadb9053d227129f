import { beforeEach, describe, expect, it, vi } from 'vitest';

import { TutorlabApi } from '../src/api.js';
import { TutorPlayer } from '../src/player.js';
import type { EvaluationView, SessionOpen } from '../src/types.js';

function fakeApi(overrides: Partial<Record<string, unknown>> = {}) {
  const api = new TutorlabApi('http://unused');
  const open: SessionOpen = {
    complete: false,
    session_id: 'sess0001',
    problem: 'frac-1-4-plus-2-4',
    test_mode: false,
    interface: [
      { id: 'num', kind: 'text_input', label: 'Numerator' },
      { id: 'den', kind: 'text_input', label: 'Denominator' },
      { id: 'choice', kind: 'menu', label: 'Pick', options: ['a', 'b'] },
      { id: 'done', kind: 'button', label: 'Done' },
    ],
    tutor_actions: [],
    ...overrides,
  };
  const submissions: Array<{ selection: string; action: string; input: string }> = [];
  api.openSession = vi.fn(async () => open);
  api.submit = vi.fn(async (_s, selection, action, input): Promise<EvaluationView> => {
    submissions.push({ selection, action, input });
    return {
      outcome: open.test_mode ? null : input === '3' ? 'CORRECT' : 'INCORRECT',
      feedback_text: open.test_mode ? null : input === '3' ? null : 'That step is not correct.',
      matched_link: null,
      kcs: [],
      tutor_actions: [],
      help_level: null,
      completed_problem: false,
      attempt_at_step: 1,
      test_mode: Boolean(open.test_mode),
    };
  });
  api.hint = vi.fn(async (): Promise<EvaluationView> => ({
    outcome: 'HINT',
    feedback_text: 'Add the numerators.',
    matched_link: 'l_num',
    kcs: [],
    tutor_actions: [],
    help_level: 1,
    total_hint_levels: 2,
    completed_problem: false,
    attempt_at_step: 1,
    test_mode: false,
  }));
  return { api, submissions };
}

describe('TutorPlayer rendering', () => {
  let root: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = '<div id="root"></div>';
    root = document.getElementById('root')!;
  });

  it('renders one element per widget plus hint control', async () => {
    const { api } = fakeApi();
    const player = new TutorPlayer(root, api);
    await player.start('asg1');
    expect(root.querySelectorAll('.widget').length).toBe(4);
    expect(root.querySelector('.hint-button')).not.toBeNull();
    expect(root.querySelectorAll('select option').length).toBe(3); // blank + 2
  });

  it('renders unsupported widgets inline without breaking the rest', async () => {
    const { api } = fakeApi({
      interface: [
        { id: 'weird', kind: 'hologram' },
        { id: 'num', kind: 'text_input' },
      ],
    });
    const player = new TutorPlayer(root, api);
    await player.start('asg1');
    expect(root.querySelector('.unsupported-widget')?.textContent).toContain('hologram');
    expect(root.querySelectorAll('.widget').length).toBe(2);
    expect(root.querySelector('[data-widget="num"] input')).not.toBeNull();
  });

  it('marks come only from server responses (no optimistic paint)', async () => {
    const { api } = fakeApi();
    const player = new TutorPlayer(root, api);
    await player.start('asg1');
    const wrap = root.querySelector<HTMLElement>('[data-widget="num"]')!;
    const input = wrap.querySelector('input')!;
    input.value = '3';
    input.dispatchEvent(new Event('change'));
    // The submission is in flight; nothing painted yet.
    expect(wrap.dataset.mark).toBe('none');
    await player.idle();
    expect(wrap.dataset.mark).toBe('correct');
    expect(input.disabled).toBe(true);
  });

  it('incorrect answers show the buggy/generic feedback and stay editable', async () => {
    const { api } = fakeApi();
    const player = new TutorPlayer(root, api);
    await player.start('asg1');
    const input = root.querySelector<HTMLInputElement>('[data-widget="den"] input')!;
    input.value = '8';
    input.dispatchEvent(new Event('change'));
    await player.idle();
    expect(root.querySelector<HTMLElement>('[data-widget="den"]')!.dataset.mark).toBe('incorrect');
    expect(root.querySelector('.feedback')!.textContent).toBe('That step is not correct.');
    expect(input.disabled).toBe(false);
  });

  it('does not post for locked widgets', async () => {
    const { api, submissions } = fakeApi({
      tutor_actions: [{ selection: 'num', action: 'UpdateText', input: '3' }],
    });
    const player = new TutorPlayer(root, api);
    await player.start('asg1');
    await player.submitStep('num', '9');
    expect(submissions.length).toBe(0);
  });

  it('hint flow paints level i of L and repeated clicks stay wired', async () => {
    const { api } = fakeApi();
    const player = new TutorPlayer(root, api);
    await player.start('asg1');
    root.querySelector<HTMLButtonElement>('.hint-button')!.click();
    await player.idle();
    const panel = root.querySelector<HTMLElement>('.hint-panel')!;
    expect(panel.hidden).toBe(false);
    expect(panel.textContent).toBe('Add the numerators. (level 1 of 2)');
  });

  it('test mode renders no hint control and never marks widgets', async () => {
    const { api } = fakeApi({ test_mode: true });
    const player = new TutorPlayer(root, api);
    await player.start('asg1');
    expect(root.querySelector('.hint-button')).toBeNull();
    expect(root.querySelector('.hint-panel')).toBeNull();
    const input = root.querySelector<HTMLInputElement>('[data-widget="num"] input')!;
    input.value = '99';
    input.dispatchEvent(new Event('change'));
    await player.idle();
    const marks = [...root.querySelectorAll<HTMLElement>('.widget')].map((w) => w.dataset.mark);
    expect(marks.every((m) => m === 'none')).toBe(true);
    expect(root.querySelector('.feedback')!.textContent).toBe('');
    expect(input.disabled).toBe(false); // neutral advance: stays editable
  });

  it('widget actions follow the kind convention', async () => {
    const { api, submissions } = fakeApi();
    const player = new TutorPlayer(root, api);
    await player.start('asg1');
    await player.submitStep('num', '3');
    await player.submitStep('choice', 'a');
    await player.submitStep('done', '');
    expect(submissions.map((s) => s.action)).toEqual(['UpdateText', 'Select', 'Click']);
  });

  it('renders the assignment-complete state', async () => {
    const { api } = fakeApi();
    api.openSession = vi.fn(async () => ({ complete: true }));
    const player = new TutorPlayer(root, api);
    await player.start('asg1');
    expect(root.querySelector('.assignment-complete')).not.toBeNull();
  });

  it('reveals the next-problem control only once the problem completes', async () => {
    const { api } = fakeApi();
    api.submit = vi.fn(async () => ({
      outcome: 'CORRECT', feedback_text: null, matched_link: null, kcs: [],
      tutor_actions: [], help_level: null, completed_problem: true,
      attempt_at_step: 1, test_mode: false,
    }));
    const player = new TutorPlayer(root, api);
    await player.start('asg1');
    const next = root.querySelector<HTMLButtonElement>('.next-problem')!;
    expect(next.hidden).toBe(true);
    await player.submitStep('num', '3');
    expect(next.hidden).toBe(false);
    next.click();
    await player.idle();
    expect(api.openSession).toHaveBeenCalledTimes(2);
  });
});
