"""Domain error types shared across the engine, log store, and service."""

from __future__ import annotations


class TutorlabError(Exception):
    """Base class for all domain errors; `code` is stable across the API."""

    code = "error"


# --- behavior graph / tracer ------------------------------------------------

class InvalidGraph(TutorlabError):
    code = "invalid_graph"

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__(f"graph failed validation with {len(self.diagnostics)} diagnostic(s)")


class UnknownSelection(TutorlabError):
    code = "unknown_selection"


class StaleState(TutorlabError):
    code = "stale_state"


class HintsDisabled(TutorlabError):
    code = "hints_disabled"


class NoHintAvailable(TutorlabError):
    code = "no_hint_available"


# --- student model ------------------------------------------------------------

class InvalidParams(TutorlabError):
    code = "invalid_params"


class UnknownKc(TutorlabError):
    code = "unknown_kc"


class DuplicateDetector(TutorlabError):
    code = "duplicate_detector"


class DetectorRange(TutorlabError):
    code = "detector_range"


# --- task selection -----------------------------------------------------------

class DuplicatePolicy(TutorlabError):
    code = "duplicate_policy"


class UnknownPolicy(TutorlabError):
    code = "unknown_policy"


class PolicyContract(TutorlabError):
    code = "policy_contract"


# --- transaction log ----------------------------------------------------------

class ClockSkew(TutorlabError):
    code = "clock_skew"


class SchemaMismatch(TutorlabError):
    code = "schema_mismatch"


class MalformedRow(TutorlabError):
    code = "malformed_row"

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class EmptyStore(TutorlabError):
    code = "empty_store"


# --- service ------------------------------------------------------------------

class Unauthorized(TutorlabError):
    code = "unauthorized"


class UnknownClass(TutorlabError):
    code = "unknown_class"


class UnknownProblem(TutorlabError):
    code = "unknown_problem"


class AssignmentLocked(TutorlabError):
    code = "assignment_locked"


class SessionExpired(TutorlabError):
    code = "session_expired"


class ValidationFailed(TutorlabError):
    code = "validation_failed"

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__(f"package failed validation with {len(self.diagnostics)} diagnostic(s)")


class ImportRowError(TutorlabError):
    """Condition-CSV import failure pinned to a 1-based line number."""

    code = "import_row"

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class UnknownStudent(ImportRowError):
    code = "unknown_student"


class UnknownAssignment(ImportRowError):
    code = "unknown_assignment"


class DuplicateRow(ImportRowError):
    code = "duplicate_row"


class ProvisioningFailed(TutorlabError):
    code = "provisioning_failed"
