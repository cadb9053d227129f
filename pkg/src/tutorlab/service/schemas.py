"""Request/response bodies for the HTTP API."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class LoginRequest(BaseModel):
    login: str


class AccountOut(BaseModel):
    id: str
    login: str
    role: str
    display_name: str = ""


class LoginResponse(BaseModel):
    token: str
    account: AccountOut


class AccountCreate(BaseModel):
    login: str
    role: str
    display_name: str = ""


class ClassCreate(BaseModel):
    name: str
    student_ids: list[str] = Field(default_factory=list)
    teacher_id: Optional[str] = None


class ClassOut(BaseModel):
    id: str
    name: str
    teacher_id: str
    student_ids: list[str]


class AssignmentCreate(BaseModel):
    name: str
    class_id: str
    package_name: str
    curriculum_id: str
    condition_name: str = ""
    test_mode: bool = False
    prerequisites: list[str] = Field(default_factory=list)
    package_version: Optional[int] = None
    policy_override: Optional[str] = None
    mastery_threshold: float = 0.95


class AssignmentOut(BaseModel):
    id: str
    name: str
    class_id: str
    package_name: str
    package_version: int
    curriculum_id: str
    condition_name: str = ""
    test_mode: bool = False
    prerequisites: list[str] = Field(default_factory=list)
    policy_override: Optional[str] = None
    mastery_threshold: float = 0.95


class WorklistEntry(BaseModel):
    assignment: AssignmentOut
    status: str


class SessionOpen(BaseModel):
    timestamp: Optional[str] = None


class TutorActionOut(BaseModel):
    selection: str
    action: str
    input: str


class SessionOut(BaseModel):
    complete: bool
    session_id: Optional[str] = None
    assignment_id: Optional[str] = None
    problem: Optional[str] = None
    test_mode: Optional[bool] = None
    interface: Optional[list[dict[str, Any]]] = None
    tutor_actions: Optional[list[TutorActionOut]] = None
    resumed: Optional[bool] = None
    problem_completed: Optional[bool] = None
    session: Optional[str] = None


class TransactionIn(BaseModel):
    selection: str
    action: str
    input: str
    kind: str = "attempt"
    timestamp: Optional[str] = None


class HintIn(BaseModel):
    selection: Optional[str] = None
    timestamp: Optional[str] = None


class EvaluationOut(BaseModel):
    outcome: Optional[str] = None
    feedback_text: Optional[str] = None
    matched_link: Optional[str] = None
    kcs: list[str] = Field(default_factory=list)
    tutor_actions: list[TutorActionOut] = Field(default_factory=list)
    help_level: Optional[int] = None
    total_hint_levels: Optional[int] = None
    completed_problem: bool = False
    attempt_at_step: int = 1
    test_mode: bool = False


class ReportRow(BaseModel):
    student_id: str
    login: str
    display_name: str = ""
    problems_completed: int
    percent_correct_first_attempts: float
    mastered_kc_count: int
    last_activity: Optional[str] = None


class PackagePublished(BaseModel):
    name: str
    version: int


class ConditionsImported(BaseModel):
    rows_imported: int


class ErrorBody(BaseModel):
    error: str
    detail: str
    line: Optional[int] = None
