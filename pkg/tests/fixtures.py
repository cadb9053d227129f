"""Shared builders: a small fraction-addition package and helpers."""

from __future__ import annotations

from datetime import datetime, timezone

from tutorlab.graph import Transaction

T0 = datetime(2026, 1, 5, 9, 0, 0, tzinfo=timezone.utc)


def attempt(selection, input, action="UpdateText", at=None, student="s001", session="sess0001"):
    return Transaction(
        student_id=student,
        session_id=session,
        timestamp=at or T0,
        kind="attempt",
        selection=selection,
        action=action,
        input=input,
    )


def chain_graph_doc():
    """Two-step chain with a buggy link and a done click."""
    return {
        "schema_version": 1,
        "problem": "frac-1-4-plus-2-4",
        "interface": [
            {"id": "num", "kind": "text_input", "label": "Numerator"},
            {"id": "den", "kind": "text_input", "label": "Denominator"},
            {"id": "done", "kind": "button", "label": "Done"},
        ],
        "start_node": "n0",
        "nodes": ["n0", "n1", "n2", "n3"],
        "done_nodes": ["n3"],
        "links": [
            {
                "id": "l_num", "from": "n0", "to": "n1", "kind": "correct",
                "matcher": {"selection": "num", "action": "UpdateText",
                            "input": {"kind": "exact", "text": "3"}},
                "kcs": ["add-numerators"],
                "hints": ["Add the numerators.", "1 + 2 = 3. Enter 3."],
            },
            {
                "id": "b_den", "from": "n1", "to": "n1", "kind": "buggy",
                "matcher": {"selection": "den", "action": "UpdateText",
                            "input": {"kind": "exact", "text": "8"}},
                "kcs": ["keep-denominator"],
                "buggy_message": "Don't add the denominators.",
            },
            {
                "id": "l_den", "from": "n1", "to": "n2", "kind": "correct",
                "matcher": {"selection": "den", "action": "UpdateText",
                            "input": {"kind": "exact", "text": "4"}},
                "kcs": ["keep-denominator"],
                "hints": ["The denominator stays the same.", "Enter 4."],
                "success_message": "Right, the denominator is unchanged.",
            },
            {
                "id": "l_done", "from": "n2", "to": "n3", "kind": "correct",
                "matcher": {"selection": "done", "action": "Click",
                            "input": {"kind": "any"}},
                "hints": ["Click Done."],
            },
        ],
        "groups": [],
        "kc_model": {
            "add-numerators": "Add numerators over a common denominator",
            "keep-denominator": "Keep the shared denominator",
        },
    }


def group_graph_doc():
    """Numerator and denominator in either order, then done."""
    return {
        "schema_version": 1,
        "problem": "frac-1-3-plus-1-3",
        "interface": [
            {"id": "num", "kind": "text_input", "label": "Numerator"},
            {"id": "den", "kind": "text_input", "label": "Denominator"},
            {"id": "done", "kind": "button", "label": "Done"},
        ],
        "start_node": "n0",
        "nodes": ["n0", "n1", "n2", "n3"],
        "done_nodes": ["n3"],
        "links": [
            {
                "id": "g_num", "from": "n0", "to": "n1", "kind": "correct",
                "matcher": {"selection": "num", "action": "UpdateText",
                            "input": {"kind": "exact", "text": "2"}},
                "kcs": ["add-numerators"],
                "hints": ["Add the numerators.", "1 + 1 = 2."],
                "group": "g1",
            },
            {
                "id": "g_den", "from": "n1", "to": "n2", "kind": "correct",
                "matcher": {"selection": "den", "action": "UpdateText",
                            "input": {"kind": "exact", "text": "3"}},
                "kcs": ["keep-denominator"],
                "hints": ["Keep the denominator.", "Enter 3."],
                "group": "g1",
            },
            {
                "id": "g_done", "from": "n2", "to": "n3", "kind": "correct",
                "matcher": {"selection": "done", "action": "Click", "input": {"kind": "any"}},
                "hints": ["Click Done."],
            },
        ],
        "groups": [{"id": "g1", "ordering": "unordered", "member_links": ["g_num", "g_den"]}],
        "kc_model": {
            "add-numerators": "Add numerators over a common denominator",
            "keep-denominator": "Keep the shared denominator",
        },
    }


def worked_example_doc():
    """Tutor fills the numerator; the student finishes."""
    return {
        "schema_version": 1,
        "problem": "frac-worked-example",
        "interface": [
            {"id": "num", "kind": "text_input", "label": "Numerator"},
            {"id": "den", "kind": "text_input", "label": "Denominator"},
        ],
        "start_node": "n0",
        "nodes": ["n0", "n1", "n2"],
        "done_nodes": ["n2"],
        "links": [
            {
                "id": "t_num", "from": "n0", "to": "n1", "kind": "tutor_performed",
                "emission": {"selection": "num", "action": "UpdateText", "input": "3"},
                "kcs": [],
            },
            {
                "id": "w_den", "from": "n1", "to": "n2", "kind": "correct",
                "matcher": {"selection": "den", "action": "UpdateText",
                            "input": {"kind": "exact", "text": "4"}},
                "kcs": ["keep-denominator"],
                "hints": ["The tutor added the numerators; you keep the denominator.", "Enter 4."],
            },
        ],
        "groups": [],
        "kc_model": {
            "add-numerators": "Add numerators over a common denominator",
            "keep-denominator": "Keep the shared denominator",
        },
    }


def sample_package_doc():
    return {
        "schema_version": 1,
        "name": "fraction-addition",
        "kc_model": {
            "add-numerators": "Add numerators over a common denominator",
            "keep-denominator": "Keep the shared denominator",
        },
        "kc_params": [
            {"kc": "add-numerators", "p_init": 0.25, "p_transit": 0.2, "p_slip": 0.1, "p_guess": 0.2},
            {"kc": "keep-denominator", "p_init": 0.25, "p_transit": 0.2, "p_slip": 0.1, "p_guess": 0.2},
        ],
        "graphs": [chain_graph_doc(), group_graph_doc(), worked_example_doc()],
        "curricula": [
            {
                "id": "main",
                "policy": "fixed",
                "problems": [
                    {"problem": "frac-1-4-plus-2-4", "kcs": ["add-numerators", "keep-denominator"]},
                    {"problem": "frac-1-3-plus-1-3", "kcs": ["add-numerators", "keep-denominator"]},
                ],
            },
            {
                "id": "mastery-main",
                "policy": "mastery",
                "problems": [
                    {"problem": "frac-1-4-plus-2-4", "kcs": ["add-numerators", "keep-denominator"]},
                    {"problem": "frac-1-3-plus-1-3", "kcs": ["add-numerators", "keep-denominator"]},
                    {"problem": "frac-worked-example", "kcs": ["keep-denominator"]},
                ],
            },
        ],
    }


def mastery_package_doc(n_kcs=3, problems_per_kc=5, steps_per_problem=2):
    """Synthetic practice package: each problem drills one KC over a few steps."""
    kc_model = {f"k{i}": f"Skill {i}" for i in range(1, n_kcs + 1)}
    graphs = []
    curriculum_problems = []
    for p in range(n_kcs * problems_per_kc):
        kc = f"k{(p % n_kcs) + 1}"
        name = f"drill-{p + 1:02d}"
        nodes = [f"n{i}" for i in range(steps_per_problem + 1)]
        links = []
        interface = []
        for s in range(steps_per_problem):
            widget = f"cell{s + 1}"
            interface.append({"id": widget, "kind": "text_input", "label": widget})
            links.append({
                "id": f"s{s + 1}",
                "from": nodes[s],
                "to": nodes[s + 1],
                "kind": "correct",
                "matcher": {"selection": widget, "action": "UpdateText",
                            "input": {"kind": "exact", "text": f"ans-{p + 1}-{s + 1}"}},
                "kcs": [kc],
                "hints": [f"Think about {kc}.", f"Enter ans-{p + 1}-{s + 1}."],
            })
        graphs.append({
            "schema_version": 1,
            "problem": name,
            "interface": interface,
            "start_node": nodes[0],
            "nodes": nodes,
            "done_nodes": [nodes[-1]],
            "links": links,
            "groups": [],
        })
        curriculum_problems.append({"problem": name, "kcs": [kc]})
    return {
        "schema_version": 1,
        "name": "mastery-drills",
        "kc_model": kc_model,
        "kc_params": [
            {"kc": kc, "p_init": 0.25, "p_transit": 0.2, "p_slip": 0.1, "p_guess": 0.2}
            for kc in kc_model
        ],
        "graphs": graphs,
        "curricula": [
            {"id": "drills", "policy": "mastery", "problems": curriculum_problems},
            {"id": "drills-fixed", "policy": "fixed", "problems": curriculum_problems},
        ],
    }
