"""Random behavior-graph generation plus a brute-force completion oracle.

The oracle enumerates completing link sequences directly from the graph
structure (path enumeration over a collapsed graph, then permutation
expansion of unordered groups) without touching the tracer; the tracer side
is enumerated by exhaustive DFS over accepted CORRECT prefixes.
"""

from __future__ import annotations

import itertools
import random
from datetime import datetime, timezone

from tutorlab.graph import ATTEMPT, BehaviorGraph, Transaction, init_state, trace

T0 = datetime(2026, 1, 5, 9, 0, 0, tzinfo=timezone.utc)


def generate_graph(rng: random.Random, index: int) -> BehaviorGraph:
    counter = {"node": 0, "link": 0}
    nodes: list[str] = []
    links: list[dict] = []
    groups: list[dict] = []

    def new_node() -> str:
        name = f"n{counter['node']}"
        counter["node"] += 1
        nodes.append(name)
        return name

    def link_id() -> str:
        counter["link"] += 1
        return f"l{counter['link']:02d}"

    def correct(frm: str, to: str, group: str | None = None) -> dict:
        lid = link_id()
        doc = {
            "id": lid, "from": frm, "to": to, "kind": "correct",
            "matcher": {"selection": f"w_{lid}", "action": "Set",
                        "input": {"kind": "exact", "text": f"v_{lid}"}},
            "kcs": [],
            "hints": [f"hint for {lid}"],
        }
        if group:
            doc["group"] = group
        return doc

    def tutor(frm: str, to: str, group: str | None = None) -> dict:
        lid = link_id()
        doc = {
            "id": lid, "from": frm, "to": to, "kind": "tutor_performed",
            "emission": {"selection": f"w_{lid}", "action": "Set", "input": f"t_{lid}"},
        }
        if group:
            doc["group"] = group
        return doc

    node = new_node()
    start = node
    budget = 6  # leaves room for buggy links within the 8-link cap
    n_groups = 0
    used_diamond = False
    n_segments = rng.randint(2, 4)

    for _ in range(n_segments):
        if budget <= 0:
            break
        choices = ["step", "step", "tutor"]
        if n_groups < 3 and budget >= 2:
            choices += ["group", "group"]
        if not used_diamond and budget >= 2:
            choices.append("diamond")
        kind = rng.choice(choices)
        if kind == "step":
            nxt = new_node()
            links.append(correct(node, nxt))
            node = nxt
            budget -= 1
        elif kind == "tutor":
            nxt = new_node()
            links.append(tutor(node, nxt))
            node = nxt
            budget -= 1
        elif kind == "group":
            size = rng.randint(2, min(3, budget))
            gid = f"g{n_groups + 1}"
            member_ids = []
            tutor_slot = rng.randrange(size) if rng.random() < 0.25 else -1
            for i in range(size):
                nxt = new_node()
                maker = tutor if i == tutor_slot else correct
                doc = maker(node, nxt, group=gid)
                member_ids.append(doc["id"])
                links.append(doc)
                node = nxt
            groups.append({"id": gid, "ordering": "unordered", "member_links": member_ids})
            n_groups += 1
            budget -= size
        else:  # diamond: two alternative branches re-merging
            used_diamond = True
            merge = new_node()
            lengths = (1, rng.randint(1, min(2, budget - 1)))
            for length in lengths:
                branch = node
                for i in range(length):
                    nxt = merge if i == length - 1 else new_node()
                    links.append(correct(branch, nxt))
                    branch = nxt
            budget -= sum(lengths)
            node = merge

    if not links:
        nxt = new_node()
        links.append(correct(node, nxt))
        node = nxt

    # Buggy self-loops on a couple of authored steps, same selection.
    correct_links = [l for l in links if l["kind"] == "correct"]
    n_buggy = min(len(correct_links), rng.randint(0, 2), 8 - len(links))
    for l in rng.sample(correct_links, k=max(0, n_buggy)):
        counter["link"] += 1
        links.append({
            "id": f"b{counter['link']:02d}",
            "from": l["from"], "to": l["from"], "kind": "buggy",
            "matcher": {"selection": l["matcher"]["selection"], "action": "Set",
                        "input": {"kind": "exact", "text": f"bug_{l['id']}"}},
            "kcs": [],
            "buggy_message": f"not quite ({l['id']})",
        })

    selections = sorted({
        l["matcher"]["selection"] if "matcher" in l else l["emission"]["selection"]
        for l in links
    })
    doc = {
        "schema_version": 1,
        "problem": f"gen-{index:03d}",
        "interface": [{"id": s, "kind": "text_input", "label": s} for s in selections],
        "start_node": start,
        "nodes": nodes,
        "done_nodes": [node],
        "links": links,
        "groups": groups,
        "kc_model": {},
    }
    return BehaviorGraph.from_json(doc)


def oracle_sequences(graph: BehaviorGraph) -> set[tuple[str, ...]]:
    """All completing student-link sequences, by structural enumeration."""
    by_id = graph.links_by_id
    order = {link.id: i for i, link in enumerate(graph.links)}
    edges: dict[str, list[tuple[str, list[list[str]]]]] = {}

    grouped = set()
    for group in graph.groups:
        members = sorted(group.member_links, key=lambda lid: order[lid])
        grouped.update(members)
        entry = by_id[members[0]].from_node
        exit_node = by_id[members[-1]].to_node
        if group.ordering == "unordered":
            expansions = [list(p) for p in itertools.permutations(members)]
        else:
            expansions = [list(members)]
        edges.setdefault(entry, []).append((exit_node, expansions))
    for link in graph.links:
        if link.kind == "buggy" or link.id in grouped:
            continue
        edges.setdefault(link.from_node, []).append((link.to_node, [[link.id]]))

    sequences: set[tuple[str, ...]] = set()

    def expand(path_expansions: list[list[list[str]]]):
        for combo in itertools.product(*path_expansions):
            full = [lid for part in combo for lid in part]
            student = tuple(
                lid for lid in full if by_id[lid].kind == "correct"
            )
            sequences.add(student)

    def dfs(node: str, acc: list, visited: frozenset):
        if node in graph.done_nodes:
            expand(acc)
            return
        for target, expansions in edges.get(node, ()):
            if target in visited:
                continue
            dfs(target, acc + [expansions], visited | {target})

    dfs(graph.start_node, [], frozenset({graph.start_node}))
    return sequences


def txn_for(link) -> Transaction:
    return Transaction(
        student_id="sim", session_id="sim", timestamp=T0, kind=ATTEMPT,
        selection=link.matcher.selection, action=link.matcher.action,
        input=link.matcher.input.example_input(),
    )


def tracer_accepted(graph: BehaviorGraph) -> set[tuple[str, ...]]:
    """All all-CORRECT transaction sequences ending in completion."""
    alphabet = [(link.id, txn_for(link)) for link in graph.links if link.kind == "correct"]
    max_len = len(alphabet) + 1
    accepted: set[tuple[str, ...]] = set()

    def dfs(state, prefix: tuple[str, ...]):
        if state.completed:
            accepted.add(prefix)
            return
        if len(prefix) >= max_len:
            return
        for lid, txn in alphabet:
            next_state, evaluation = trace(state, graph, txn)
            if evaluation.outcome == "CORRECT":
                dfs(next_state, prefix + (lid,))

    dfs(init_state(graph), ())
    return accepted
