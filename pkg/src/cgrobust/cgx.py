"""The ``.cgx`` knowledge-base file format and version manifests.

Grammar::

    <kb version="v1">
      <concept id="cn10" t="Person" ref="John" x="40" y="60" w="80" h="30" color="#ccc">
        <graph> ...same element grammar... </graph>     (only for contexts)
      </concept>
      <relation id="cn20" t="think" x="200" y="60"/>
      <arc rel="cn20" pos="1" con="cn10"/>
    </kb>

Presentation attributes (x, y, w, h, color) are optional and never semantic.
Serialization is canonical: elements sorted by natural id, arcs after the
elements of their body sorted by (relation, position), 2-space indentation,
UTF-8 with LF newlines.
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass
from pathlib import Path
from xml.parsers import expat

from .model import (
    GRAPH,
    Arc,
    Element,
    GraphBody,
    KnowledgeBase,
    Kind,
    Presentation,
    validate,
)


@dataclass(frozen=True)
class ParseError:
    line: int
    column: int
    rule: str
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.rule}: {self.message}"


class KBParseError(ValueError):
    """Input could not be turned into a valid knowledge base."""

    def __init__(self, errors: list[ParseError]):
        self.errors = sorted(errors, key=lambda e: (e.line, e.column))
        super().__init__("; ".join(str(e) for e in self.errors))


class ManifestError(ValueError):
    pass


_ELEMENT_ATTRS = {"id", "t", "x", "y", "w", "h", "color"}
_ALLOWED = {
    "kb": {"version"},
    "graph": set(),
    "concept": _ELEMENT_ATTRS | {"ref"},
    "relation": _ELEMENT_ATTRS,
    "arc": {"rel", "pos", "con"},
}
_CHILDREN = {
    "kb": {"concept", "relation", "arc"},
    "graph": {"concept", "relation", "arc"},
    "concept": {"graph"},
    "relation": set(),
    "arc": set(),
}
_POSITION = re.compile(r"[0-9]+")


class _Reader:
    def __init__(self) -> None:
        self.parser = expat.ParserCreate("UTF-8")
        self.parser.StartElementHandler = self.start
        self.parser.EndElementHandler = self.end
        self.parser.CharacterDataHandler = self.text
        self.errors: list[ParseError] = []
        self.version: str | None = None
        # stack entries: (tag, owner id of the body this tag contributes to)
        self.stack: list[tuple[str, str | None]] = []
        self.elements: dict[str, Element] = {}
        self.parent: dict[str, str] = {}
        self.members: dict[str, list[str]] = {GRAPH: []}
        self.arcs: dict[str, list[Arc]] = {GRAPH: []}
        self.has_graph: set[str] = set()
        self.where: dict[object, tuple[int, int]] = {}
        self.slots: set[tuple[str, int]] = set()
        self.seen_root = False

    def loc(self) -> tuple[int, int]:
        return self.parser.CurrentLineNumber, self.parser.CurrentColumnNumber + 1

    def error(self, rule: str, message: str, at: tuple[int, int] | None = None) -> None:
        line, col = at or self.loc()
        self.errors.append(ParseError(line, col, rule, message))

    def body_owner(self) -> str | None:
        return self.stack[-1][1] if self.stack else None

    def start(self, tag: str, attrs: dict[str, str]) -> None:
        parent_tag = self.stack[-1][0] if self.stack else None
        if parent_tag is None:
            if tag != "kb" or self.seen_root:
                self.error("unexpected-element", f"root element must be <kb>, got <{tag}>")
                self.stack.append((tag, None))
                return
            self.seen_root = True
        elif tag not in _CHILDREN.get(parent_tag, ()):
            self.error("unexpected-element", f"<{tag}> is not allowed inside <{parent_tag}>")
            self.stack.append((tag, None))
            return
        for name in attrs:
            if name not in _ALLOWED[tag]:
                self.error("unknown-attribute", f"<{tag}> does not take attribute {name!r}")
        owner = self.body_owner()
        handler = getattr(self, "_start_" + tag)
        self.stack.append((tag, handler(attrs, owner)))

    def end(self, tag: str) -> None:
        self.stack.pop()

    def text(self, data: str) -> None:
        if data.strip():
            self.error("unexpected-text", f"character data {data.strip()[:20]!r} is not allowed")

    def _start_kb(self, attrs, owner):
        if "version" not in attrs:
            self.error("missing-attribute", "<kb> requires a version attribute")
        self.version = attrs.get("version", "")
        return GRAPH

    def _start_graph(self, attrs, owner):
        # owner here is the enclosing concept's id (see _start_concept)
        if owner is None:
            return None
        if owner in self.has_graph:
            self.error("duplicate-graph", f"concept {owner} has more than one <graph>")
        self.has_graph.add(owner)
        self.members.setdefault(owner, [])
        self.arcs.setdefault(owner, [])
        return owner

    def _required(self, tag: str, attrs: dict[str, str], *names: str) -> bool:
        missing = [n for n in names if n not in attrs]
        for name in missing:
            self.error("missing-attribute", f"<{tag}> requires attribute {name!r}")
        return not missing

    def _number(self, name: str, raw: str) -> float | None:
        try:
            value = float(raw)
        except ValueError:
            value = math.nan
        if not math.isfinite(value):
            self.error("bad-number", f"attribute {name}={raw!r} is not a finite number")
            return None
        return value

    def _presentation(self, tag: str, attrs: dict[str, str]) -> Presentation | None:
        present = [k for k in ("x", "y", "w", "h", "color") if k in attrs]
        if not present:
            return None
        if "x" not in attrs or "y" not in attrs:
            self.error("incomplete-presentation", f"<{tag}> layout attributes need both x and y")
            return None
        nums = {k: self._number(k, attrs[k]) for k in ("x", "y", "w", "h") if k in attrs}
        if any(v is None for v in nums.values()):
            return None
        return Presentation(nums["x"], nums["y"], nums.get("w"), nums.get("h"), attrs.get("color"))

    def _element(self, tag: str, kind: Kind, attrs: dict[str, str], owner: str | None) -> str | None:
        at = self.loc()
        if not self._required(tag, attrs, "id", "t"):
            return None
        eid = attrs["id"]
        if eid in self.elements:
            self.error("duplicate-id", f"id {eid!r} is already defined", at)
            return None
        element = Element(
            eid, kind, attrs["t"], attrs.get("ref"), None, self._presentation(tag, attrs)
        )
        self.elements[eid] = element
        self.where[eid] = at
        if owner is not None:
            self.parent[eid] = owner
            self.members[owner].append(eid)
        return eid

    def _start_concept(self, attrs, owner):
        return self._element("concept", Kind.CONCEPT, attrs, owner)

    def _start_relation(self, attrs, owner):
        self._element("relation", Kind.RELATION, attrs, owner)
        return None

    def _start_arc(self, attrs, owner):
        at = self.loc()
        if not self._required("arc", attrs, "rel", "pos", "con"):
            return None
        raw = attrs["pos"]
        if not _POSITION.fullmatch(raw) or int(raw) < 1:
            self.error("bad-position", f"arc position {raw!r} must be a positive integer", at)
            return None
        arc = Arc(attrs["rel"], int(raw), attrs["con"])
        slot = (arc.relation_id, arc.position)
        if slot in self.slots:
            self.error(
                "duplicate-slot",
                f"relation {arc.relation_id!r} already has an arc at position {arc.position}",
                at,
            )
            return None
        self.slots.add(slot)
        self.where[arc] = at
        if owner is not None:
            self.arcs[owner].append(arc)
        return None

    def knowledge_base(self) -> KnowledgeBase:
        elements = []
        for eid, element in self.elements.items():
            if eid in self.has_graph:
                element = Element(
                    element.id, element.kind, element.type_label, element.referent,
                    GraphBody(tuple(self.members[eid]), tuple(self.arcs[eid])),
                    element.presentation,
                )
            elements.append(element)
        root = GraphBody(tuple(self.members[GRAPH]), tuple(self.arcs[GRAPH]))
        return KnowledgeBase(self.version or "", root, tuple(elements))


def parse_kb(data: bytes) -> KnowledgeBase:
    """Parse ``.cgx`` bytes.  Raises KBParseError listing every located problem."""
    reader = _Reader()
    try:
        reader.parser.Parse(data, True)
    except expat.ExpatError as exc:
        raise KBParseError(
            reader.errors
            + [ParseError(exc.lineno, exc.offset + 1, "malformed-xml", expat.ErrorString(exc.code))]
        ) from None
    if reader.errors:
        raise KBParseError(reader.errors)
    kb = reader.knowledge_base()
    problems = []
    for v in validate(kb):
        line, col = reader.where.get(v.arc if v.arc is not None else v.id, (1, 1))
        problems.append(ParseError(line, col, v.rule, str(v)))
    if problems:
        raise KBParseError(problems)
    return kb


def read_kb(path: str | os.PathLike) -> KnowledgeBase:
    return parse_kb(Path(path).read_bytes())


def _escape(value: str) -> str:
    return (
        value.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def format_number(value: float) -> str:
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _element_attrs(element: Element) -> str:
    parts = [("id", element.id), ("t", element.type_label)]
    if element.referent is not None:
        parts.append(("ref", element.referent))
    p = element.presentation
    if p is not None:
        parts += [("x", format_number(p.x)), ("y", format_number(p.y))]
        if p.width is not None:
            parts.append(("w", format_number(p.width)))
        if p.height is not None:
            parts.append(("h", format_number(p.height)))
        if p.color is not None:
            parts.append(("color", p.color))
    return " ".join(f'{k}="{_escape(v)}"' for k, v in parts)


def _write_body(kb: KnowledgeBase, body: GraphBody, depth: int, out: list[str]) -> None:
    pad = "  " * depth
    for eid in body.members:
        element = kb.element(eid)
        tag = element.kind.value
        attrs = _element_attrs(element)
        if element.nested is None:
            out.append(f"{pad}<{tag} {attrs}/>")
            continue
        out.append(f"{pad}<{tag} {attrs}>")
        if element.nested.members or element.nested.arcs:
            out.append(f"{pad}  <graph>")
            _write_body(kb, element.nested, depth + 2, out)
            out.append(f"{pad}  </graph>")
        else:
            out.append(f"{pad}  <graph/>")
        out.append(f"{pad}</{tag}>")
    for arc in body.arcs:
        out.append(
            f'{pad}<arc rel="{_escape(arc.relation_id)}" pos="{arc.position}" '
            f'con="{_escape(arc.concept_id)}"/>'
        )


def serialize_kb(kb: KnowledgeBase) -> bytes:
    """Canonical ``.cgx`` bytes; equal knowledge bases give identical bytes."""
    out = ['<?xml version="1.0" encoding="UTF-8"?>']
    head = f'<kb version="{_escape(kb.version_label)}"'
    if not kb.root.members and not kb.root.arcs:
        out.append(head + "/>")
    else:
        out.append(head + ">")
        _write_body(kb, kb.root, 1, out)
        out.append("</kb>")
    return ("\n".join(out) + "\n").encode("utf-8")


def load_manifest(data: bytes, base: str | os.PathLike | None = None) -> list[str]:
    """Version file paths from a manifest, in declared (chronological) order.

    One path per line; blank lines and lines starting with ``#`` are skipped.
    When ``base`` is given, relative paths are resolved against it and every
    path must name an existing file.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ManifestError(f"manifest is not UTF-8: {exc}") from None
    if "\x00" in text:
        raise ManifestError("manifest contains NUL bytes")
    paths = []
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if base is not None:
            path = Path(base, line)
            if not path.is_file():
                raise ManifestError(f"line {number}: no such version file: {line}")
            line = str(path)
        paths.append(line)
    if not paths:
        raise ManifestError("manifest lists no version files")
    return paths
