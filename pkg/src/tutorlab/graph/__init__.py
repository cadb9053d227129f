"""Behavior graphs: domain model, validation, and the example-tracing loop."""

from .matchers import (
    AnyInput,
    ExactInput,
    LinearExpressionInput,
    NumberRangeInput,
    PatternInput,
    parse_input_matcher,
    register_input_matcher,
)
from .model import (
    BUGGY,
    CORRECT,
    GENERIC_INCORRECT_FEEDBACK,
    ORDERED,
    TUTOR_PERFORMED,
    UNORDERED,
    BehaviorGraph,
    Diagnostic,
    Link,
    LinkGroup,
    StepMatcher,
    TutorAction,
    WidgetSpec,
)
from .tracer import ATTEMPT, HINT_REQUEST, Evaluation, Transaction, TracerState, init_state, request_hint, trace
from .validate import validate_graph

__all__ = [
    "ATTEMPT",
    "BUGGY",
    "CORRECT",
    "GENERIC_INCORRECT_FEEDBACK",
    "HINT_REQUEST",
    "ORDERED",
    "TUTOR_PERFORMED",
    "UNORDERED",
    "AnyInput",
    "BehaviorGraph",
    "Diagnostic",
    "Evaluation",
    "ExactInput",
    "LinearExpressionInput",
    "Link",
    "LinkGroup",
    "NumberRangeInput",
    "PatternInput",
    "StepMatcher",
    "TracerState",
    "Transaction",
    "TutorAction",
    "WidgetSpec",
    "init_state",
    "parse_input_matcher",
    "register_input_matcher",
    "request_hint",
    "trace",
    "validate_graph",
]
