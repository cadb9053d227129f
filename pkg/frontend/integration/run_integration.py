#!/usr/bin/env python3
"""UI-agreement orchestrator.

Starts two fresh service instances, provisions both identically, drives the
shared session script through the Python harness client on one and leaves the
other for the scripted DOM session (vitest), then lets the vitest side
compare the exported logs modulo time/session columns.

Usage: python3 frontend/integration/run_integration.py
"""

from __future__ import annotations

import json
import os
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import httpx

HERE = Path(__file__).resolve().parent
REPO = HERE.parent.parent
sys.path.insert(0, str(REPO / "src"))

from tutorlab.harness.client import ApiClient  # noqa: E402

PORT_A = 8451  # harness-driven
PORT_B = 8452  # UI-driven

WIDGET_ACTIONS = {
    "text_input": "UpdateText",
    "numeric_input": "UpdateText",
    "grid": "UpdateText",
    "menu": "Select",
    "radio_group": "Select",
    "button": "Click",
}


def start_server(port: int, data_dir: Path) -> subprocess.Popen:
    proc = subprocess.Popen(
        [sys.executable, "-m", "tutorlab.cli", "serve", "--data-dir", str(data_dir),
         "--port", str(port)],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
        cwd=str(REPO),
    )
    deadline = time.time() + 20
    while time.time() < deadline:
        try:
            httpx.get(f"http://127.0.0.1:{port}/docs", timeout=1.0)
            return proc
        except httpx.TransportError:
            time.sleep(0.2)
    proc.terminate()
    raise RuntimeError(f"server on port {port} did not come up")


def provision(base_url: str) -> None:
    package = json.loads((HERE / "sample_package.json").read_text(encoding="utf-8"))
    client = ApiClient(httpx.Client(base_url=base_url, timeout=30.0))
    client.login("root")
    client.publish_package(package)
    s1 = client.create_account("s001", "student", "UI Student")
    s2 = client.create_account("s002", "student", "Posttest Student")
    teacher = client.create_account("teach", "teacher", "Teacher")
    roster = client.create_class("UI Class", [s1["id"], s2["id"]], teacher_id=teacher["id"])
    client.create_assignment(
        name="ui-unit", class_id=roster["id"], package_name=package["name"],
        curriculum_id="main", condition_name="ui-compare",
    )
    client.create_assignment(
        name="ui-posttest", class_id=roster["id"], package_name=package["name"],
        curriculum_id="main", condition_name="post", test_mode=True,
    )


def widget_kinds(session: dict) -> dict[str, str]:
    return {w["id"]: w["kind"] for w in session["interface"]}


def drive_harness(base_url: str, out_log: Path) -> None:
    script = json.loads((HERE / "session_script.json").read_text(encoding="utf-8"))
    client = ApiClient(httpx.Client(base_url=base_url, timeout=30.0))
    client.login("s001")
    worklist = client.worklist()
    unit = next(w for w in worklist if w["assignment"]["name"] == "ui-unit")
    assignment_id = unit["assignment"]["id"]
    for problem in script["problems"]:
        session = client.open_session(assignment_id)
        assert not session["complete"], "policy exhausted before the script"
        kinds = widget_kinds(session)
        for step in problem["steps"]:
            if step["type"] == "hint":
                client.hint(session["session_id"])
            elif step["type"] == "click":
                action = WIDGET_ACTIONS[kinds[step["widget"]]]
                client.submit(session["session_id"], step["widget"], action, "")
            else:
                action = WIDGET_ACTIONS[kinds[step["widget"]]]
                client.submit(session["session_id"], step["widget"], action, step["value"])
    final = client.open_session(assignment_id)
    assert final["complete"], "harness script did not complete the assignment"

    root = ApiClient(client.http)
    root.login("root")
    out_log.write_text(root.export_log(), encoding="utf-8")


def main() -> int:
    with tempfile.TemporaryDirectory() as tmp:
        tmp_path = Path(tmp)
        server_a = start_server(PORT_A, tmp_path / "a")
        server_b = start_server(PORT_B, tmp_path / "b")
        try:
            provision(f"http://127.0.0.1:{PORT_A}")
            provision(f"http://127.0.0.1:{PORT_B}")
            harness_log = tmp_path / "harness_log.tsv"
            drive_harness(f"http://127.0.0.1:{PORT_A}", harness_log)
            env = {
                **os.environ,
                "SERVER_URL": f"http://127.0.0.1:{PORT_B}",
                "HARNESS_LOG": str(harness_log),
            }
            result = subprocess.run(
                ["npm", "run", "integration"], cwd=str(HERE.parent), env=env,
            )
            return result.returncode
        finally:
            server_a.terminate()
            server_b.terminate()
            server_a.wait(timeout=10)
            server_b.wait(timeout=10)


if __name__ == "__main__":
    sys.exit(main())
