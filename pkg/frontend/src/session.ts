/** Pure session-view state. Every correctness mark comes from a server
 * evaluation; nothing here judges an answer on its own. */

import type { EvaluationView, SessionOpen, TutorAction, WidgetSpec } from './types.js';

export type Mark = 'none' | 'correct' | 'incorrect';

export interface WidgetState {
  value: string;
  locked: boolean;
  mark: Mark;
}

export interface HintPanel {
  text: string;
  level: number;
  totalLevels: number;
}

export interface SessionView {
  problem: string;
  testMode: boolean;
  widgets: Record<string, WidgetState>;
  specs: WidgetSpec[];
  feedback: string | null;
  hint: HintPanel | null;
  completed: boolean;
  problemsDone: number;
}

export function createView(open: SessionOpen, problemsDone = 0): SessionView {
  const view: SessionView = {
    problem: open.problem ?? '',
    testMode: Boolean(open.test_mode),
    widgets: {},
    specs: open.interface ?? [],
    feedback: null,
    hint: null,
    completed: Boolean(open.problem_completed),
    problemsDone,
  };
  for (const spec of view.specs) {
    view.widgets[spec.id] = { value: '', locked: spec.kind === 'label', mark: 'none' };
  }
  applyTutorActions(view, open.tutor_actions ?? []);
  return view;
}

/** Tutor-performed steps fill and lock their widgets in every mode. */
export function applyTutorActions(view: SessionView, actions: TutorAction[]): SessionView {
  for (const action of actions) {
    const widget = view.widgets[action.selection];
    if (widget) {
      widget.value = action.input;
      widget.locked = true;
    }
  }
  return view;
}

export function applyEvaluation(
  view: SessionView,
  selection: string,
  value: string,
  evaluation: EvaluationView,
): SessionView {
  const widget = view.widgets[selection];
  if (widget) widget.value = value;
  view.completed = evaluation.completed_problem;
  applyTutorActions(view, evaluation.tutor_actions ?? []);
  if (view.testMode || evaluation.outcome === null) {
    // Neutral: no marks, no locking, no feedback in pre/post tests.
    return view;
  }
  if (widget) {
    if (evaluation.outcome === 'CORRECT') {
      widget.mark = 'correct';
      widget.locked = true;
      view.hint = null;
    } else {
      widget.mark = 'incorrect';
    }
  }
  view.feedback = evaluation.feedback_text;
  return view;
}

export function applyHint(view: SessionView, evaluation: EvaluationView): SessionView {
  view.hint = {
    text: evaluation.feedback_text ?? '',
    level: evaluation.help_level ?? 1,
    totalLevels: evaluation.total_hint_levels ?? evaluation.help_level ?? 1,
  };
  return view;
}

export function hintLabel(panel: HintPanel): string {
  return `level ${panel.level} of ${panel.totalLevels}`;
}
