"""Robustness evaluation of conceptual-graph knowledge bases across versions."""

from .cgx import KBParseError, ParseError, load_manifest, parse_kb, read_kb, serialize_kb
from .criteria import (
    CriteriaRecord,
    CriteriaTable,
    Criterion,
    aggregate,
    eval_history,
    eval_pair,
    format_criteria,
    format_flat,
    normalize,
    parse_criteria,
)
from .diff import ChangeType, DiffRecord, DiffReport, LinkKey, Target, diff, fingerprint, format_diff
from .model import (
    GRAPH,
    Arc,
    Element,
    GraphBody,
    KBBuilder,
    KnowledgeBase,
    Kind,
    Presentation,
    Violation,
    containment_closure,
    describe,
    describe_link,
    validate,
)
from .render import colorize, layout, render_dot, render_svg

__version__ = "0.1.0"
