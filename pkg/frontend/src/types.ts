/** Payload shapes of the tutorlab HTTP API. */

export type WidgetKind =
  | 'text_input'
  | 'numeric_input'
  | 'menu'
  | 'radio_group'
  | 'button'
  | 'label'
  | 'grid';

export interface WidgetSpec {
  id: string;
  kind: WidgetKind | string;
  label?: string;
  options?: string[];
  position?: Record<string, unknown>;
}

export interface TutorAction {
  selection: string;
  action: string;
  input: string;
}

export interface AccountOut {
  id: string;
  login: string;
  role: 'student' | 'teacher' | 'researcher';
  display_name: string;
}

export interface AssignmentOut {
  id: string;
  name: string;
  class_id: string;
  package_name: string;
  package_version: number;
  curriculum_id: string;
  condition_name: string;
  test_mode: boolean;
  prerequisites: string[];
  mastery_threshold: number;
}

export interface WorklistEntry {
  assignment: AssignmentOut;
  status: 'locked' | 'available' | 'in_progress' | 'complete';
}

export interface SessionOpen {
  complete: boolean;
  session_id?: string | null;
  assignment_id?: string | null;
  problem?: string | null;
  test_mode?: boolean | null;
  interface?: WidgetSpec[] | null;
  tutor_actions?: TutorAction[] | null;
  resumed?: boolean | null;
  problem_completed?: boolean | null;
}

export interface EvaluationView {
  outcome: 'CORRECT' | 'INCORRECT' | 'HINT' | null;
  feedback_text: string | null;
  matched_link: string | null;
  kcs: string[];
  tutor_actions: TutorAction[];
  help_level: number | null;
  total_hint_levels?: number | null;
  completed_problem: boolean;
  attempt_at_step: number;
  test_mode: boolean;
}

export interface ReportRow {
  student_id: string;
  login: string;
  display_name: string;
  problems_completed: number;
  percent_correct_first_attempts: number;
  mastered_kc_count: number;
  last_activity: string | null;
}

/** Action name submitted for each widget kind; matchers are authored to these. */
export const WIDGET_ACTIONS: Record<string, string> = {
  text_input: 'UpdateText',
  numeric_input: 'UpdateText',
  grid: 'UpdateText',
  menu: 'Select',
  radio_group: 'Select',
  button: 'Click',
};
