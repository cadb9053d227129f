"""Example-tracing step evaluation (the within-problem loop).

The tracer keeps a frontier of interpretations: each position is a node in
the behavior graph plus the set of already-traversed members of an
in-progress unordered group. A student attempt advances every position
whose live correct links match; buggy and unmatched attempts leave the
frontier alone. Tutor-performed links fire eagerly and transitively.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from typing import Optional

from ..errors import HintsDisabled, InvalidGraph, NoHintAvailable, StaleState, UnknownSelection
from .model import (
    BUGGY,
    CORRECT,
    GENERIC_INCORRECT_FEEDBACK,
    TUTOR_PERFORMED,
    UNORDERED,
    BehaviorGraph,
    Link,
    TutorAction,
)
from .validate import validate_graph

ATTEMPT = "attempt"
HINT_REQUEST = "hint_request"

Position = tuple[str, frozenset[str]]


@dataclass(frozen=True)
class Transaction:
    """One student action: an attempt on a step or a hint request."""

    student_id: str
    session_id: str
    timestamp: datetime
    kind: str  # attempt | hint_request
    selection: Optional[str] = None
    action: Optional[str] = None
    input: Optional[str] = None


@dataclass(frozen=True)
class Evaluation:
    outcome: str  # CORRECT | INCORRECT | HINT
    feedback_text: Optional[str]
    matched_link: Optional[str]
    kcs: tuple[str, ...]
    tutor_actions: tuple[TutorAction, ...]
    help_level: Optional[int]
    completed_problem: bool
    step_name: str
    attempt_at_step: int
    selection: str
    action: str
    input: str
    kind: str
    total_hint_levels: Optional[int] = None  # hint chain length, HINT outcomes only


@dataclass(frozen=True)
class TracerState:
    graph_fingerprint: str
    frontier: tuple[Position, ...]
    hint_cursor: dict[str, int]
    attempt_counts: dict[str, int]
    completed: bool
    traversed_links: tuple[str, ...] = ()
    pending_tutor_actions: tuple[TutorAction, ...] = ()


class GraphIndex:
    """Precomputed adjacency used by the tracer; built once per graph."""

    def __init__(self, graph: BehaviorGraph):
        self.graph = graph
        self.order = {link.id: i for i, link in enumerate(graph.links)}
        self.member_group: dict[str, str] = {}
        self.group_members: dict[str, tuple[Link, ...]] = {}
        self.group_entry: dict[str, str] = {}
        self.group_exit: dict[str, str] = {}
        self.group_region: dict[str, frozenset[str]] = {}
        for group in graph.groups:
            if group.ordering != UNORDERED:
                continue  # ordered groups keep plain chain traversal
            members = sorted(
                (graph.links_by_id[lid] for lid in group.member_links),
                key=lambda l: self.order[l.id],
            )
            self.group_members[group.id] = tuple(members)
            for m in members:
                self.member_group[m.id] = group.id
            self.group_entry[group.id] = members[0].from_node
            self.group_exit[group.id] = members[-1].to_node
            self.group_region[group.id] = frozenset(m.from_node for m in members)
        self.groups_at: dict[str, list[str]] = {}
        for gid, entry in self.group_entry.items():
            self.groups_at.setdefault(entry, []).append(gid)
        for gids in self.groups_at.values():
            gids.sort(key=lambda g: self.order[self.group_members[g][0].id])
        self.plain_out: dict[str, list[Link]] = {}
        self.buggy_at: dict[str, list[Link]] = {}
        for link in graph.links:
            if link.kind == BUGGY:
                self.buggy_at.setdefault(link.from_node, []).append(link)
            elif link.id not in self.member_group:
                self.plain_out.setdefault(link.from_node, []).append(link)

    def candidates(self, pos: Position) -> list[tuple[Link, Position]]:
        """Live correct/tutor links at a position, with their successor positions."""
        node, traversed = pos
        out: list[tuple[Link, Position]] = []
        if traversed:
            gid = self.member_group[next(iter(traversed))]
            members = self.group_members[gid]
            for m in members:
                if m.id in traversed:
                    continue
                new = traversed | {m.id}
                if len(new) == len(members):
                    out.append((m, (self.group_exit[gid], frozenset())))
                else:
                    out.append((m, (node, frozenset(new))))
        else:
            for link in self.plain_out.get(node, ()):
                out.append((link, (link.to_node, frozenset())))
            for gid in self.groups_at.get(node, ()):
                members = self.group_members[gid]
                for m in members:
                    if len(members) == 1:
                        out.append((m, (self.group_exit[gid], frozenset())))
                    else:
                        out.append((m, (node, frozenset({m.id}))))
        out.sort(key=lambda pair: self.order[pair[0].id])
        return out

    def live_buggy(self, pos: Position) -> list[Link]:
        node, traversed = pos
        live_nodes = {node}
        if traversed:
            gid = self.member_group[next(iter(traversed))]
            live_nodes |= self.group_region[gid]
        else:
            for gid in self.groups_at.get(node, ()):
                live_nodes |= self.group_region[gid]
        links = [l for n in live_nodes for l in self.buggy_at.get(n, ())]
        links.sort(key=lambda l: self.order[l.id])
        return links


def _index(graph: BehaviorGraph) -> GraphIndex:
    idx = graph.__dict__.get("_tracer_index")
    if idx is None:
        idx = GraphIndex(graph)
        graph.__dict__["_tracer_index"] = idx
    return idx


def _sorted_frontier(positions) -> tuple[Position, ...]:
    unique = {(node, traversed) for node, traversed in positions}
    return tuple(sorted(unique, key=lambda p: (p[0], sorted(p[1]))))


def _fire_tutors(idx: GraphIndex, frontier) -> tuple[tuple[Position, ...], list[TutorAction], list[str]]:
    """Advance positions through tutor-performed links until none are live."""
    positions = list(_sorted_frontier(frontier))
    emissions: list[TutorAction] = []
    fired: list[str] = []
    changed = True
    while changed:
        changed = False
        next_positions: list[Position] = []
        for pos in positions:
            tutor = [(l, s) for l, s in idx.candidates(pos) if l.kind == TUTOR_PERFORMED]
            if tutor:
                link, succ = tutor[0]
                emissions.append(link.emission)
                fired.append(link.id)
                next_positions.append(succ)
                changed = True
            else:
                next_positions.append(pos)
        positions = list(_sorted_frontier(next_positions))
    return tuple(positions), emissions, fired


def _is_complete(frontier, done_nodes) -> bool:
    return any(node in done_nodes and not traversed for node, traversed in frontier)


def init_state(graph: BehaviorGraph) -> TracerState:
    """Fresh tracer state; fires any tutor-performed links leaving the start."""
    diagnostics = [d for d in validate_graph(graph) if d.severity == "error"]
    if diagnostics:
        raise InvalidGraph(diagnostics)
    idx = _index(graph)
    frontier, emissions, fired = _fire_tutors(idx, [(graph.start_node, frozenset())])
    return TracerState(
        graph_fingerprint=graph.fingerprint,
        frontier=frontier,
        hint_cursor={},
        attempt_counts={},
        completed=_is_complete(frontier, graph.done_nodes),
        traversed_links=tuple(fired),
        pending_tutor_actions=tuple(emissions),
    )


def _check_state(state: TracerState, graph: BehaviorGraph) -> None:
    if state.graph_fingerprint != graph.fingerprint:
        raise StaleState(
            f"state was built for graph {state.graph_fingerprint}, not {graph.fingerprint}"
        )


def _step_kcs(idx: GraphIndex, frontier, selection: str) -> tuple[str, ...]:
    """KC labels of the live correct links on a selection (for error attribution)."""
    seen: list[str] = []
    for pos in frontier:
        for link, _ in idx.candidates(pos):
            if link.kind == CORRECT and link.matcher.selection == selection:
                for kc in link.kcs:
                    if kc not in seen:
                        seen.append(kc)
    return tuple(seen)


def trace(
    state: TracerState,
    graph: BehaviorGraph,
    txn: Transaction,
    test_mode: bool = False,
) -> tuple[TracerState, Evaluation]:
    """Evaluate one attempt against the frontier.

    In test mode the evaluation is still computed truthfully (for logging)
    but feedback text is withheld.
    """
    _check_state(state, graph)
    if txn.kind != ATTEMPT:
        raise ValueError(f"trace only evaluates attempts, got {txn.kind!r}")
    if txn.selection is None or txn.action is None or txn.input is None:
        raise ValueError("attempt transactions need selection, action, and input")
    if graph.interface and txn.selection not in graph.widget_ids:
        raise UnknownSelection(f"selection {txn.selection!r} is not part of the interface")

    idx = _index(graph)
    attempts = dict(state.attempt_counts)
    attempts[txn.selection] = attempts.get(txn.selection, 0) + 1
    attempt_at_step = attempts[txn.selection]

    matches: list[tuple[Link, Position]] = []
    for pos in state.frontier:
        for link, succ in idx.candidates(pos):
            if link.kind == CORRECT and link.matcher.matches(txn.selection, txn.action, txn.input):
                matches.append((link, succ))

    if matches:
        matches.sort(key=lambda pair: idx.order[pair[0].id])
        frontier, emissions, fired = _fire_tutors(idx, [succ for _, succ in matches])
        completed = state.completed or _is_complete(frontier, graph.done_nodes)
        matched_ids = []
        kcs: list[str] = []
        for link, _ in matches:
            if link.id not in matched_ids:
                matched_ids.append(link.id)
            for kc in link.kcs:
                if kc not in kcs:
                    kcs.append(kc)
        cursor = dict(state.hint_cursor)
        cursor.pop(txn.selection, None)
        new_state = TracerState(
            graph_fingerprint=state.graph_fingerprint,
            frontier=frontier,
            hint_cursor=cursor,
            attempt_counts=attempts,
            completed=completed,
            traversed_links=state.traversed_links + tuple(matched_ids) + tuple(fired),
        )
        feedback = None if test_mode else matches[0][0].success_message
        evaluation = Evaluation(
            outcome="CORRECT",
            feedback_text=feedback,
            matched_link=matched_ids[0],
            kcs=tuple(kcs),
            tutor_actions=tuple(emissions),
            help_level=None,
            completed_problem=completed,
            step_name=txn.selection,
            attempt_at_step=attempt_at_step,
            selection=txn.selection,
            action=txn.action,
            input=txn.input,
            kind=ATTEMPT,
        )
        return new_state, evaluation

    new_state = TracerState(
        graph_fingerprint=state.graph_fingerprint,
        frontier=state.frontier,
        hint_cursor=dict(state.hint_cursor),
        attempt_counts=attempts,
        completed=state.completed,
        traversed_links=state.traversed_links,
    )

    for pos in state.frontier:
        for link in idx.live_buggy(pos):
            if link.matcher.matches(txn.selection, txn.action, txn.input):
                kcs = link.kcs or _step_kcs(idx, state.frontier, txn.selection)
                evaluation = Evaluation(
                    outcome="INCORRECT",
                    feedback_text=None if test_mode else link.buggy_message,
                    matched_link=link.id,
                    kcs=tuple(kcs),
                    tutor_actions=(),
                    help_level=None,
                    completed_problem=state.completed,
                    step_name=txn.selection,
                    attempt_at_step=attempt_at_step,
                    selection=txn.selection,
                    action=txn.action,
                    input=txn.input,
                    kind=ATTEMPT,
                )
                return new_state, evaluation

    evaluation = Evaluation(
        outcome="INCORRECT",
        feedback_text=None if test_mode else GENERIC_INCORRECT_FEEDBACK,
        matched_link=None,
        kcs=_step_kcs(idx, state.frontier, txn.selection),
        tutor_actions=(),
        help_level=None,
        completed_problem=state.completed,
        step_name=txn.selection,
        attempt_at_step=attempt_at_step,
        selection=txn.selection,
        action=txn.action,
        input=txn.input,
        kind=ATTEMPT,
    )
    return new_state, evaluation


def force_step(state: TracerState, graph: BehaviorGraph, selection: str) -> TracerState:
    """Advance through the first live correct link on a selection, ignoring
    its matcher. Replay tooling uses this to keep tracing past records whose
    logged CORRECT no longer re-evaluates under an edited graph."""
    _check_state(state, graph)
    idx = _index(graph)
    for pos in state.frontier:
        for link, succ in idx.candidates(pos):
            if link.kind == CORRECT and link.matcher.selection == selection:
                frontier, _, fired = _fire_tutors(idx, [succ])
                return TracerState(
                    graph_fingerprint=state.graph_fingerprint,
                    frontier=frontier,
                    hint_cursor=dict(state.hint_cursor),
                    attempt_counts=dict(state.attempt_counts),
                    completed=state.completed or _is_complete(frontier, graph.done_nodes),
                    traversed_links=state.traversed_links + (link.id,) + tuple(fired),
                )
    return state


def request_hint(
    state: TracerState,
    graph: BehaviorGraph,
    step: Optional[str] = None,
    test_mode: bool = False,
) -> tuple[TracerState, Evaluation]:
    """Serve the next hint for a step (default: first live step in authoring order)."""
    _check_state(state, graph)
    if test_mode:
        raise HintsDisabled("hints are disabled in test mode")
    if state.completed:
        raise NoHintAvailable("problem is already complete")
    if step is not None and graph.interface and step not in graph.widget_ids:
        raise UnknownSelection(f"selection {step!r} is not part of the interface")

    idx = _index(graph)
    live: list[Link] = []
    for pos in state.frontier:
        for link, _ in idx.candidates(pos):
            if link.kind != CORRECT:
                continue
            if step is not None and link.matcher.selection != step:
                continue
            live.append(link)
    if not live:
        raise NoHintAvailable("no live step to hint" + (f" for {step!r}" if step else ""))

    target = min(live, key=lambda l: idx.order[l.id])
    step_key = target.matcher.selection
    cursor = dict(state.hint_cursor)
    level = min(cursor.get(step_key, 0) + 1, len(target.hints))
    cursor[step_key] = level
    attempts = dict(state.attempt_counts)
    attempts[step_key] = attempts.get(step_key, 0) + 1

    new_state = TracerState(
        graph_fingerprint=state.graph_fingerprint,
        frontier=state.frontier,
        hint_cursor=cursor,
        attempt_counts=attempts,
        completed=state.completed,
        traversed_links=state.traversed_links,
    )
    evaluation = Evaluation(
        outcome="HINT",
        feedback_text=target.hints[level - 1],
        matched_link=target.id,
        kcs=tuple(target.kcs),
        tutor_actions=(),
        help_level=level,
        completed_problem=state.completed,
        step_name=step_key,
        attempt_at_step=attempts[step_key],
        selection=step_key,
        action="RequestHint",
        input="",
        kind=HINT_REQUEST,
        total_hint_levels=len(target.hints),
    )
    return new_state, evaluation
