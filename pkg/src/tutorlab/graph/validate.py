"""Structural validation of behavior graphs.

Returns diagnostics rather than raising so authoring tools can show every
problem at once. An empty list means the graph is safe to activate.
"""

from __future__ import annotations

import re
from collections import Counter, deque
from typing import Optional

from .model import BUGGY, CORRECT, TUTOR_PERFORMED, UNORDERED, ORDERED, WIDGET_KINDS, BehaviorGraph, Diagnostic
from .matchers import PatternInput


def validate_graph(graph: BehaviorGraph, kc_model: Optional[dict] = None) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    err = lambda code, msg: out.append(Diagnostic(code, msg, "error"))
    warn = lambda code, msg: out.append(Diagnostic(code, msg, "warning"))

    known_kcs = set(kc_model) if kc_model is not None else set(graph.kc_model)

    # Interface widgets
    widget_ids = Counter(w.id for w in graph.interface)
    for wid, n in widget_ids.items():
        if n > 1:
            err("duplicate_widget", f"widget id {wid!r} declared {n} times")
    for w in graph.interface:
        if w.kind not in WIDGET_KINDS:
            err("unknown_widget_kind", f"widget {w.id!r} has kind {w.kind!r}")
        if w.kind in ("menu", "radio_group") and not w.options:
            err("missing_options", f"widget {w.id!r} of kind {w.kind!r} needs at least one option")

    # Node references
    if graph.start_node not in graph.nodes:
        err("unknown_node", f"start node {graph.start_node!r} not declared")
    for node in graph.done_nodes:
        if node not in graph.nodes:
            err("unknown_node", f"done node {node!r} not declared")

    # Links
    link_ids = Counter(link.id for link in graph.links)
    for lid, n in link_ids.items():
        if n > 1:
            err("duplicate_link", f"link id {lid!r} declared {n} times")
    for link in graph.links:
        for node in (link.from_node, link.to_node):
            if node not in graph.nodes:
                err("unknown_node", f"link {link.id!r} references unknown node {node!r}")
        if link.kind not in (CORRECT, BUGGY, TUTOR_PERFORMED):
            err("unknown_link_kind", f"link {link.id!r} has kind {link.kind!r}")
            continue
        if link.kind == TUTOR_PERFORMED:
            if link.emission is None:
                err("missing_emission", f"tutor-performed link {link.id!r} needs a selection/action/input triple")
            if link.matcher is not None:
                err("unexpected_matcher", f"tutor-performed link {link.id!r} must not carry a matcher")
        else:
            if link.matcher is None:
                err("missing_matcher", f"{link.kind} link {link.id!r} needs a matcher")
            elif graph.interface and link.matcher.selection not in graph.widget_ids:
                err("unknown_selection", f"link {link.id!r} targets undeclared widget {link.matcher.selection!r}")
            if link.matcher is not None and isinstance(link.matcher.input, PatternInput):
                try:
                    re.compile(link.matcher.input.regex)
                except re.error as exc:
                    err("bad_pattern", f"link {link.id!r} pattern does not compile: {exc}")
        if link.kind == CORRECT and not link.hints:
            err("missing_hints", f"correct link {link.id!r} has an empty hint chain")
        if link.kind == BUGGY:
            if link.from_node != link.to_node:
                err("buggy_advances", f"buggy link {link.id!r} must loop on one node")
            if not link.buggy_message:
                err("missing_buggy_message", f"buggy link {link.id!r} has no feedback message")
        for kc in link.kcs:
            if known_kcs is not None and kc not in known_kcs:
                err("unknown_kc", f"link {link.id!r} labeled with undeclared KC {kc!r}")

    by_id = {link.id: link for link in graph.links}

    # Groups: members exist, are traversable, and form one contiguous chain
    # in authoring order (the canonical path the group relaxes).
    group_ids = Counter(g.id for g in graph.groups)
    for gid, n in group_ids.items():
        if n > 1:
            err("duplicate_group", f"group id {gid!r} declared {n} times")
    member_of: dict[str, str] = {}
    for group in graph.groups:
        if group.ordering not in (UNORDERED, ORDERED):
            err("unknown_ordering", f"group {group.id!r} has ordering {group.ordering!r}")
        if not group.member_links:
            err("empty_group", f"group {group.id!r} has no members")
            continue
        members = []
        for lid in group.member_links:
            if lid not in by_id:
                err("unknown_link", f"group {group.id!r} references unknown link {lid!r}")
                continue
            if lid in member_of:
                err("overlapping_groups", f"link {lid!r} belongs to both {member_of[lid]!r} and {group.id!r}")
            member_of[lid] = group.id
            link = by_id[lid]
            if link.kind == BUGGY:
                err("buggy_in_group", f"buggy link {lid!r} cannot be a group member")
            if link.group != group.id:
                err("group_mismatch", f"link {lid!r} does not declare group {group.id!r}")
            members.append(link)
        ordered = sorted(members, key=lambda l: graph.authoring_index(l.id))
        for prev, nxt in zip(ordered, ordered[1:]):
            if prev.to_node != nxt.from_node:
                err("broken_group_chain",
                    f"group {group.id!r} members {prev.id!r} and {nxt.id!r} do not chain")
    for link in graph.links:
        if link.group is not None and link.group not in group_ids:
            err("unknown_group", f"link {link.id!r} references unknown group {link.group!r}")

    # Eager tutor firing is only deterministic when a tutor-performed link is
    # the sole departure from its node (group members are exempt: they commute).
    for link in graph.links:
        if link.kind != TUTOR_PERFORMED or link.group is not None:
            continue
        siblings = [
            other for other in graph.links
            if other.id != link.id and other.from_node == link.from_node
            and other.kind in (CORRECT, TUTOR_PERFORMED) and other.group is None
        ]
        if siblings:
            warn("ambiguous_tutor", f"tutor-performed link {link.id!r} competes with {[s.id for s in siblings]}")

    # Done-node reachability over correct/tutor links, collapsing unordered
    # groups to their exit nodes.
    if graph.start_node in graph.nodes:
        reachable = {graph.start_node}
        queue = deque([graph.start_node])
        exits = {}
        for group in graph.groups:
            members = [by_id[lid] for lid in group.member_links if lid in by_id]
            if members:
                ordered = sorted(members, key=lambda l: graph.authoring_index(l.id))
                exits[ordered[0].from_node] = ordered[-1].to_node
        while queue:
            node = queue.popleft()
            nexts = [l.to_node for l in graph.links
                     if l.from_node == node and l.kind in (CORRECT, TUTOR_PERFORMED)]
            if node in exits:
                nexts.append(exits[node])
            for nxt in nexts:
                if nxt not in reachable:
                    reachable.add(nxt)
                    queue.append(nxt)
        for node in graph.done_nodes:
            if node in graph.nodes and node not in reachable:
                err("unreachable_done", f"done node {node!r} is not reachable from start")

    return out
