"""Input matchers for behavior-graph links.

The built-in taxonomy is exact / range / pattern / any. Additional kinds can
be plugged in through :func:`register_input_matcher`; the bundled
``linear_expression`` matcher (equivalence of linear expressions in one
variable) is the reference plugin.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, ClassVar, Optional, Protocol


class InputMatcher(Protocol):
    kind: ClassVar[str]

    def matches(self, raw: str) -> bool: ...

    def to_json(self) -> dict: ...

    def example_input(self) -> Optional[str]: ...


@dataclass(frozen=True)
class ExactInput:
    """Whitespace-trimmed comparison; case folding is opt-in."""

    kind: ClassVar[str] = "exact"
    text: str
    case_insensitive: bool = False

    def matches(self, raw: str) -> bool:
        value = raw.strip()
        target = self.text.strip()
        if self.case_insensitive:
            return value.casefold() == target.casefold()
        return value == target

    def to_json(self) -> dict:
        doc = {"kind": "exact", "text": self.text}
        if self.case_insensitive:
            doc["case_insensitive"] = True
        return doc

    def example_input(self) -> Optional[str]:
        return self.text


@dataclass(frozen=True)
class NumberRangeInput:
    kind: ClassVar[str] = "range"
    lo: float
    hi: float
    inclusive: bool = True

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"range matcher requires lo <= hi, got [{self.lo}, {self.hi}]")

    def matches(self, raw: str) -> bool:
        try:
            value = float(raw.strip())
        except ValueError:
            return False
        if self.inclusive:
            return self.lo <= value <= self.hi
        return self.lo < value < self.hi

    def to_json(self) -> dict:
        doc = {"kind": "range", "lo": self.lo, "hi": self.hi}
        if not self.inclusive:
            doc["inclusive"] = False
        return doc

    def example_input(self) -> Optional[str]:
        mid = (self.lo + self.hi) / 2.0
        return f"{mid:g}"


@dataclass(frozen=True)
class PatternInput:
    kind: ClassVar[str] = "pattern"
    regex: str
    sample: Optional[str] = None

    def matches(self, raw: str) -> bool:
        return re.fullmatch(self.regex, raw.strip()) is not None

    def to_json(self) -> dict:
        doc = {"kind": "pattern", "regex": self.regex}
        if self.sample is not None:
            doc["sample"] = self.sample
        return doc

    def example_input(self) -> Optional[str]:
        return self.sample


@dataclass(frozen=True)
class AnyInput:
    kind: ClassVar[str] = "any"

    def matches(self, raw: str) -> bool:
        return True

    def to_json(self) -> dict:
        return {"kind": "any"}

    def example_input(self) -> Optional[str]:
        return "ok"


_TERM_RE = re.compile(
    r"""^(?P<coef>\d+(?:\.\d+)?)?       # optional leading coefficient
        (?:\*)?                          # optional explicit multiply
        (?P<var>[a-zA-Z])?               # optional variable
        (?:/(?P<div>\d+(?:\.\d+)?))?$    # optional divisor
    """,
    re.VERBOSE,
)


def parse_linear(expr: str, var: Optional[str] = None) -> tuple[float, float]:
    """Parse a linear expression in one variable into (slope, intercept).

    Accepts forms like "2x+3", "3 + 2*x", "-x/2 + 1", "x". Raises ValueError
    on anything nonlinear or using a second variable.
    """
    text = expr.replace(" ", "")
    if not text:
        raise ValueError("empty expression")
    # Split into signed terms.
    terms: list[str] = []
    buf = ""
    for ch in text:
        if ch in "+-" and buf:
            terms.append(buf)
            buf = ch if ch == "-" else ""
        else:
            buf += ch
    terms.append(buf)
    slope = 0.0
    intercept = 0.0
    seen_var = var
    for term in terms:
        sign = 1.0
        body = term
        while body and body[0] in "+-":
            if body[0] == "-":
                sign = -sign
            body = body[1:]
        if not body:
            raise ValueError(f"dangling sign in {expr!r}")
        m = _TERM_RE.match(body)
        if not m:
            raise ValueError(f"unsupported term {term!r}")
        coef = float(m.group("coef")) if m.group("coef") else 1.0
        if m.group("div"):
            div = float(m.group("div"))
            if div == 0:
                raise ValueError("division by zero")
            coef /= div
        if m.group("var"):
            if seen_var is None:
                seen_var = m.group("var")
            elif m.group("var") != seen_var:
                raise ValueError(f"second variable {m.group('var')!r} in {expr!r}")
            slope += sign * coef
        else:
            if m.group("coef") is None:
                raise ValueError(f"unsupported term {term!r}")
            intercept += sign * coef
    return slope, intercept


@dataclass(frozen=True)
class LinearExpressionInput:
    """Accepts any linear expression equivalent to the authored one."""

    kind: ClassVar[str] = "linear_expression"
    expr: str
    var: Optional[str] = None

    def matches(self, raw: str) -> bool:
        try:
            target = parse_linear(self.expr, self.var)
            candidate = parse_linear(raw, self.var)
        except ValueError:
            return False
        return abs(target[0] - candidate[0]) < 1e-9 and abs(target[1] - candidate[1]) < 1e-9

    def to_json(self) -> dict:
        doc = {"kind": "linear_expression", "expr": self.expr}
        if self.var is not None:
            doc["var"] = self.var
        return doc

    def example_input(self) -> Optional[str]:
        return self.expr


MatcherParser = Callable[[dict], InputMatcher]

_MATCHER_KINDS: dict[str, MatcherParser] = {}


def register_input_matcher(kind: str, parser: MatcherParser) -> None:
    if kind in _MATCHER_KINDS:
        raise ValueError(f"input matcher kind {kind!r} already registered")
    _MATCHER_KINDS[kind] = parser


def parse_input_matcher(doc: dict) -> InputMatcher:
    kind = doc.get("kind")
    if kind not in _MATCHER_KINDS:
        raise ValueError(f"unknown input matcher kind {kind!r}")
    return _MATCHER_KINDS[kind](doc)


register_input_matcher("exact", lambda d: ExactInput(d["text"], bool(d.get("case_insensitive", False))))
register_input_matcher("range", lambda d: NumberRangeInput(float(d["lo"]), float(d["hi"]), bool(d.get("inclusive", True))))
register_input_matcher("pattern", lambda d: PatternInput(d["regex"], d.get("sample")))
register_input_matcher("any", lambda d: AnyInput())
register_input_matcher("linear_expression", lambda d: LinearExpressionInput(d["expr"], d.get("var")))
