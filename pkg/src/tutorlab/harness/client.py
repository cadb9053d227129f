"""Thin HTTP client for the service API.

Works against any httpx-compatible client, so the same code drives a live
server (httpx.Client with base_url) or an in-process app (fastapi TestClient).
"""

from __future__ import annotations

from datetime import datetime
from typing import Optional

from ..datalog import format_time
from ..errors import TutorlabError


class ApiError(TutorlabError):
    code = "api_error"

    def __init__(self, status: int, body):
        self.status = status
        self.body = body if isinstance(body, dict) else {"detail": str(body)}
        self.error = self.body.get("error", "error")
        super().__init__(f"HTTP {status}: {self.body.get('detail', self.body)}")


def _iso(ts: Optional[datetime]) -> Optional[str]:
    return format_time(ts) if ts is not None else None


class ApiClient:
    def __init__(self, http, token: Optional[str] = None):
        self.http = http
        self.token = token

    def _headers(self) -> dict:
        return {"Authorization": f"Bearer {self.token}"} if self.token else {}

    def _check(self, response):
        if response.status_code >= 400:
            try:
                body = response.json()
            except ValueError:
                body = response.text
            raise ApiError(response.status_code, body)
        return response

    def _post(self, path: str, json_body=None, content=None, headers=None):
        merged = {**self._headers(), **(headers or {})}
        response = self.http.post(path, json=json_body, content=content, headers=merged)
        return self._check(response).json()

    def _get(self, path: str, params=None):
        return self._check(self.http.get(path, params=params, headers=self._headers()))

    def login(self, login: str) -> dict:
        body = self._post("/api/login", {"login": login})
        self.token = body["token"]
        return body["account"]

    def with_token(self, token: str) -> "ApiClient":
        return ApiClient(self.http, token)

    def create_account(self, login: str, role: str, display_name: str = "") -> dict:
        return self._post("/api/accounts", {"login": login, "role": role, "display_name": display_name})

    def create_class(self, name: str, student_ids: list[str], teacher_id: Optional[str] = None) -> dict:
        return self._post("/api/classes", {"name": name, "student_ids": student_ids, "teacher_id": teacher_id})

    def publish_package(self, doc: dict) -> dict:
        response = self.http.put(f"/api/packages/{doc['name']}", json=doc, headers=self._headers())
        return self._check(response).json()

    def get_package(self, name: str, version: Optional[int] = None) -> dict:
        params = {"version": version} if version is not None else None
        return self._get(f"/api/packages/{name}", params=params).json()

    def create_assignment(self, **kwargs) -> dict:
        return self._post("/api/assignments", kwargs)

    def import_conditions(self, csv_text: str) -> dict:
        return self._post("/api/conditions/import", content=csv_text.encode("utf-8"),
                          headers={"Content-Type": "text/csv"})

    def worklist(self, student_id: Optional[str] = None) -> list[dict]:
        params = {"student_id": student_id} if student_id else None
        return self._get("/api/worklist", params=params).json()

    def open_session(self, assignment_id: str, timestamp: Optional[datetime] = None) -> dict:
        return self._post(f"/api/assignments/{assignment_id}/session", {"timestamp": _iso(timestamp)})

    def submit(self, session_id: str, selection: str, action: str, input: str,
               timestamp: Optional[datetime] = None) -> dict:
        return self._post(
            f"/api/sessions/{session_id}/transactions",
            {"selection": selection, "action": action, "input": input,
             "kind": "attempt", "timestamp": _iso(timestamp)},
        )

    def hint(self, session_id: str, selection: Optional[str] = None,
             timestamp: Optional[datetime] = None) -> dict:
        return self._post(f"/api/sessions/{session_id}/hint",
                          {"selection": selection, "timestamp": _iso(timestamp)})

    def class_report(self, class_id: str) -> list[dict]:
        return self._get(f"/api/classes/{class_id}/report").json()

    def export_log(self) -> str:
        return self._get("/api/logs/export").text
