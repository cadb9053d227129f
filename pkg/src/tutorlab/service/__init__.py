"""LMS/experiment service: accounts, assignments, conditions, sessions, reports."""

from .app import create_app
from .core import (
    AVAILABLE,
    COMPLETE,
    IN_PROGRESS,
    LOCKED,
    RESEARCHER,
    STUDENT,
    TEACHER,
    Account,
    Assignment,
    ClassRoster,
    SessionInfo,
    LmsService,
    UnknownEntity,
)

__all__ = [
    "AVAILABLE",
    "COMPLETE",
    "IN_PROGRESS",
    "LOCKED",
    "RESEARCHER",
    "STUDENT",
    "TEACHER",
    "Account",
    "Assignment",
    "ClassRoster",
    "SessionInfo",
    "LmsService",
    "UnknownEntity",
    "create_app",
]
