"""FastAPI wiring over the service core."""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from fastapi import Depends, FastAPI, Header, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse

from .. import errors
from ..datalog import parse_time
from ..student import DetectorRegistry
from ..tasks import PolicyRegistry
from . import schemas
from .core import Account, LmsService, UnknownEntity

_STATUS = {
    errors.Unauthorized: 401,
    UnknownEntity: 404,
    errors.UnknownClass: 404,
    errors.UnknownProblem: 404,
    errors.AssignmentLocked: 409,
    errors.SessionExpired: 409,
    errors.ClockSkew: 409,
    errors.HintsDisabled: 409,
    errors.NoHintAvailable: 409,
    errors.StaleState: 409,
    errors.DuplicateRow: 409,
    errors.UnknownStudent: 422,
    errors.UnknownAssignment: 422,
    errors.ValidationFailed: 422,
    errors.ProvisioningFailed: 422,
    errors.UnknownSelection: 422,
    errors.PolicyContract: 422,
    errors.UnknownPolicy: 422,
    errors.SchemaMismatch: 422,
    errors.MalformedRow: 422,
}


def _status_for(exc: errors.TutorlabError) -> int:
    for klass, status in _STATUS.items():
        if isinstance(exc, klass):
            return status
    return 400


def create_app(
    data_dir: Optional[Path] = None,
    service: Optional[LmsService] = None,
    detectors: Optional[DetectorRegistry] = None,
    policies: Optional[PolicyRegistry] = None,
) -> FastAPI:
    svc = service or LmsService(data_dir=data_dir, detectors=detectors, policies=policies)
    app = FastAPI(title="tutorlab", version="0.1.0")
    app.state.service = svc
    # The player/report UI is served from its own origin.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        # The * wildcard does not cover Authorization; list it explicitly.
        allow_headers=["Authorization", "Content-Type"],
        allow_credentials=True,
    )

    @app.exception_handler(errors.TutorlabError)
    async def _domain_error(request: Request, exc: errors.TutorlabError):
        body = {"error": exc.code, "detail": str(exc)}
        if isinstance(exc, errors.ImportRowError) or isinstance(exc, errors.MalformedRow):
            body["line"] = exc.line
        if isinstance(exc, (errors.ValidationFailed, errors.InvalidGraph)):
            body["diagnostics"] = [str(d) for d in exc.diagnostics]
        return JSONResponse(status_code=_status_for(exc), content=body)

    def actor(authorization: Optional[str] = Header(default=None)) -> Account:
        if not authorization or not authorization.startswith("Bearer "):
            raise errors.Unauthorized("missing bearer token")
        return svc.authenticate(authorization.removeprefix("Bearer "))

    def _ts(value: Optional[str]):
        return parse_time(value) if value else None

    def _assignment_out(assignment) -> schemas.AssignmentOut:
        return schemas.AssignmentOut(
            id=assignment.id,
            name=assignment.name,
            class_id=assignment.class_id,
            package_name=assignment.package_name,
            package_version=assignment.package_version,
            curriculum_id=assignment.curriculum_id,
            condition_name=assignment.condition_name,
            test_mode=assignment.test_mode,
            prerequisites=list(assignment.prerequisites),
            policy_override=assignment.policy_override,
            mastery_threshold=assignment.mastery_threshold,
        )

    @app.post("/api/login", response_model=schemas.LoginResponse)
    def login(body: schemas.LoginRequest):
        token, account = svc.login(body.login)
        return {"token": token, "account": vars(account)}

    @app.post("/api/accounts", response_model=schemas.AccountOut)
    def create_account(body: schemas.AccountCreate, who: Account = Depends(actor)):
        return vars(svc.create_account(who, body.login, body.role, body.display_name))

    @app.post("/api/classes", response_model=schemas.ClassOut)
    def create_class(body: schemas.ClassCreate, who: Account = Depends(actor)):
        return vars(svc.create_class(who, body.name, body.student_ids, body.teacher_id))

    @app.put("/api/packages/{name}", response_model=schemas.PackagePublished)
    def publish_package(name: str, doc: dict, who: Account = Depends(actor)):
        doc = dict(doc)
        doc.setdefault("name", name)
        if doc["name"] != name:
            raise errors.ProvisioningFailed(f"package body is named {doc['name']!r}, path says {name!r}")
        version = svc.publish_package(who, doc)
        return {"name": name, "version": version}

    @app.get("/api/packages/{name}")
    def get_package(name: str, version: Optional[int] = None, who: Account = Depends(actor)):
        return svc.get_package_doc(who, name, version)

    @app.post("/api/assignments", response_model=schemas.AssignmentOut)
    def create_assignment(body: schemas.AssignmentCreate, who: Account = Depends(actor)):
        assignment = svc.create_assignment(
            who,
            name=body.name,
            class_id=body.class_id,
            package_name=body.package_name,
            curriculum_id=body.curriculum_id,
            condition_name=body.condition_name,
            test_mode=body.test_mode,
            prerequisites=body.prerequisites,
            package_version=body.package_version,
            policy_override=body.policy_override,
            mastery_threshold=body.mastery_threshold,
        )
        return _assignment_out(assignment)

    @app.post("/api/conditions/import", response_model=schemas.ConditionsImported)
    async def import_conditions(request: Request, who: Account = Depends(actor)):
        csv_text = (await request.body()).decode("utf-8")
        return {"rows_imported": svc.import_condition_mapping(who, csv_text)}

    @app.get("/api/worklist", response_model=list[schemas.WorklistEntry])
    def worklist(student_id: Optional[str] = None, who: Account = Depends(actor)):
        return [
            {"assignment": _assignment_out(a), "status": status}
            for a, status in svc.get_worklist(who, student_id)
        ]

    @app.post("/api/assignments/{assignment_id}/session", response_model=schemas.SessionOut)
    def open_session(assignment_id: str, body: Optional[schemas.SessionOpen] = None,
                     who: Account = Depends(actor)):
        ts = _ts(body.timestamp) if body else None
        return svc.open_session(who, assignment_id, timestamp=ts)

    @app.post("/api/sessions/{session_id}/transactions", response_model=schemas.EvaluationOut)
    def submit_transaction(session_id: str, body: schemas.TransactionIn,
                           who: Account = Depends(actor)):
        if body.kind != "attempt":
            raise errors.ProvisioningFailed("use /hint for hint requests")
        return svc.submit_transaction(
            who, session_id, body.selection, body.action, body.input, timestamp=_ts(body.timestamp)
        )

    @app.post("/api/sessions/{session_id}/hint", response_model=schemas.EvaluationOut)
    def request_hint(session_id: str, body: Optional[schemas.HintIn] = None,
                     who: Account = Depends(actor)):
        body = body or schemas.HintIn()
        return svc.request_session_hint(
            who, session_id, step=body.selection, timestamp=_ts(body.timestamp)
        )

    @app.get("/api/classes/{class_id}/report", response_model=list[schemas.ReportRow])
    def class_report(class_id: str, who: Account = Depends(actor)):
        return svc.class_report(who, class_id)

    @app.get("/api/logs/export", response_class=PlainTextResponse)
    def export_logs(who: Account = Depends(actor)):
        return PlainTextResponse(svc.export_log_text(who), media_type="text/tab-separated-values")

    return app
