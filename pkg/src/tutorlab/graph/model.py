"""Behavior graph domain types and the JSON document format.

A behavior graph encodes one problem's solution space: nodes are interface
states, links are steps (correct / buggy / tutor-performed), groups relax
step ordering, and done nodes mark completion.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

from .matchers import InputMatcher, parse_input_matcher

CORRECT = "correct"
BUGGY = "buggy"
TUTOR_PERFORMED = "tutor_performed"
LINK_KINDS = (CORRECT, BUGGY, TUTOR_PERFORMED)

WIDGET_KINDS = ("text_input", "numeric_input", "menu", "radio_group", "button", "label", "grid")

GENERIC_INCORRECT_FEEDBACK = "That step is not correct."


@dataclass(frozen=True)
class WidgetSpec:
    id: str
    kind: str
    label: str = ""
    options: tuple[str, ...] = ()
    position: Optional[dict] = None

    def to_json(self) -> dict:
        doc: dict = {"id": self.id, "kind": self.kind, "label": self.label}
        if self.options:
            doc["options"] = list(self.options)
        if self.position is not None:
            doc["position"] = self.position
        return doc

    @staticmethod
    def from_json(doc: dict) -> "WidgetSpec":
        return WidgetSpec(
            id=doc["id"],
            kind=doc["kind"],
            label=doc.get("label", ""),
            options=tuple(doc.get("options", ())),
            position=doc.get("position"),
        )


@dataclass(frozen=True)
class StepMatcher:
    """Matches one student step: exact selection and action, flexible input."""

    selection: str
    action: str
    input: InputMatcher

    def matches(self, selection: str, action: str, raw_input: str) -> bool:
        return selection == self.selection and action == self.action and self.input.matches(raw_input)

    def to_json(self) -> dict:
        return {"selection": self.selection, "action": self.action, "input": self.input.to_json()}

    @staticmethod
    def from_json(doc: dict) -> "StepMatcher":
        return StepMatcher(doc["selection"], doc["action"], parse_input_matcher(doc["input"]))


@dataclass(frozen=True)
class TutorAction:
    """Concrete selection/action/input triple the tutor performs itself."""

    selection: str
    action: str
    input: str

    def to_json(self) -> dict:
        return {"selection": self.selection, "action": self.action, "input": self.input}

    @staticmethod
    def from_json(doc: dict) -> "TutorAction":
        return TutorAction(doc["selection"], doc["action"], doc["input"])


@dataclass(frozen=True)
class Link:
    id: str
    from_node: str
    to_node: str
    kind: str
    matcher: Optional[StepMatcher] = None
    emission: Optional[TutorAction] = None
    kcs: tuple[str, ...] = ()
    hints: tuple[str, ...] = ()
    buggy_message: Optional[str] = None
    success_message: Optional[str] = None
    group: Optional[str] = None

    @property
    def step_name(self) -> str:
        """Step identity for hint cursors and logging: the widget acted on."""
        if self.matcher is not None:
            return self.matcher.selection
        if self.emission is not None:
            return self.emission.selection
        return self.id

    def to_json(self) -> dict:
        doc: dict = {"id": self.id, "from": self.from_node, "to": self.to_node, "kind": self.kind}
        if self.matcher is not None:
            doc["matcher"] = self.matcher.to_json()
        if self.emission is not None:
            doc["emission"] = self.emission.to_json()
        if self.kcs:
            doc["kcs"] = list(self.kcs)
        if self.hints:
            doc["hints"] = list(self.hints)
        if self.buggy_message is not None:
            doc["buggy_message"] = self.buggy_message
        if self.success_message is not None:
            doc["success_message"] = self.success_message
        if self.group is not None:
            doc["group"] = self.group
        return doc

    @staticmethod
    def from_json(doc: dict) -> "Link":
        return Link(
            id=doc["id"],
            from_node=doc["from"],
            to_node=doc["to"],
            kind=doc["kind"],
            matcher=StepMatcher.from_json(doc["matcher"]) if "matcher" in doc else None,
            emission=TutorAction.from_json(doc["emission"]) if "emission" in doc else None,
            kcs=tuple(doc.get("kcs", ())),
            hints=tuple(doc.get("hints", ())),
            buggy_message=doc.get("buggy_message"),
            success_message=doc.get("success_message"),
            group=doc.get("group"),
        )


UNORDERED = "unordered"
ORDERED = "ordered"


@dataclass(frozen=True)
class LinkGroup:
    id: str
    ordering: str
    member_links: tuple[str, ...]

    def to_json(self) -> dict:
        return {"id": self.id, "ordering": self.ordering, "member_links": list(self.member_links)}

    @staticmethod
    def from_json(doc: dict) -> "LinkGroup":
        return LinkGroup(doc["id"], doc["ordering"], tuple(doc["member_links"]))


@dataclass(frozen=True)
class BehaviorGraph:
    problem_name: str
    interface: tuple[WidgetSpec, ...]
    start_node: str
    nodes: frozenset[str]
    links: tuple[Link, ...]
    groups: tuple[LinkGroup, ...] = ()
    done_nodes: frozenset[str] = frozenset()
    kc_model: dict[str, str] = field(default_factory=dict)
    schema_version: int = 1

    @cached_property
    def fingerprint(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]

    @cached_property
    def links_by_id(self) -> dict[str, Link]:
        return {link.id: link for link in self.links}

    @cached_property
    def widget_ids(self) -> frozenset[str]:
        return frozenset(w.id for w in self.interface)

    def authoring_index(self, link_id: str) -> int:
        for i, link in enumerate(self.links):
            if link.id == link_id:
                return i
        raise KeyError(link_id)

    def to_json(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "problem": self.problem_name,
            "interface": [w.to_json() for w in self.interface],
            "start_node": self.start_node,
            "nodes": sorted(self.nodes),
            "done_nodes": sorted(self.done_nodes),
            "links": [link.to_json() for link in self.links],
            "groups": [g.to_json() for g in self.groups],
            "kc_model": dict(self.kc_model),
        }

    @staticmethod
    def from_json(doc: dict) -> "BehaviorGraph":
        return BehaviorGraph(
            problem_name=doc["problem"],
            interface=tuple(WidgetSpec.from_json(w) for w in doc.get("interface", ())),
            start_node=doc["start_node"],
            nodes=frozenset(doc["nodes"]),
            links=tuple(Link.from_json(l) for l in doc.get("links", ())),
            groups=tuple(LinkGroup.from_json(g) for g in doc.get("groups", ())),
            done_nodes=frozenset(doc.get("done_nodes", ())),
            kc_model=dict(doc.get("kc_model", {})),
            schema_version=int(doc.get("schema_version", 1)),
        )


@dataclass(frozen=True)
class Diagnostic:
    """One validation finding; severity 'error' blocks activation."""

    code: str
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"[{self.severity}] {self.code}: {self.message}"
