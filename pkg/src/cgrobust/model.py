"""In-memory conceptual-graph knowledge base.

A knowledge base version is a tree of graph bodies: the root body plus one
nested body per context concept.  Concepts and relations live in exactly one
body; arcs live in the body of their relation and connect a relation argument
slot to a concept of the same body.

All values are frozen.  Element, member and arc collections are stored in
canonical (natural id) order, so two knowledge bases built in different
insertion orders compare equal.
"""

from __future__ import annotations

import math
import re
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Iterator

GRAPH = "GRAPH"
"""Reserved pseudo-id naming the whole graph (the root body)."""

_DIGITS = re.compile(r"(\d+)")


def natural_key(ident: str) -> tuple:
    """Sort key ordering ``cn9`` before ``cn10``; the raw string breaks ties."""
    parts = _DIGITS.split(ident)
    return tuple(int(p) if i % 2 else p for i, p in enumerate(parts)), ident


class Kind(str, Enum):
    CONCEPT = "concept"
    RELATION = "relation"

    def __str__(self) -> str:
        return self.value


class UnknownIdError(KeyError):
    """Raised when an element id is not part of the knowledge base."""


class NotAContextError(ValueError):
    """Raised when a closure is requested for an element without a nested body."""


@dataclass(frozen=True)
class Presentation:
    """Layout hints from an editor.  Never part of an element's meaning."""

    x: float
    y: float
    width: float | None = None
    height: float | None = None
    color: str | None = None

    def __post_init__(self) -> None:
        for name in ("x", "y", "width", "height"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, float(value))


@dataclass(frozen=True)
class Arc:
    relation_id: str
    position: int
    concept_id: str

    def sort_key(self) -> tuple:
        return natural_key(self.relation_id), self.position, natural_key(self.concept_id)


@dataclass(frozen=True)
class GraphBody:
    members: tuple[str, ...] = ()
    arcs: tuple[Arc, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", tuple(sorted(self.members, key=natural_key)))
        object.__setattr__(self, "arcs", tuple(sorted(self.arcs, key=Arc.sort_key)))


@dataclass(frozen=True)
class Element:
    id: str
    kind: Kind
    type_label: str
    referent: str | None = None
    nested: GraphBody | None = None
    presentation: Presentation | None = None

    @property
    def is_context(self) -> bool:
        return self.nested is not None


@dataclass(frozen=True)
class Violation:
    rule: str
    id: str
    message: str
    arc: Arc | None = None

    def __str__(self) -> str:
        return f"{self.rule}({self.id}): {self.message}"


@dataclass(frozen=True)
class KnowledgeBase:
    version_label: str
    root: GraphBody = field(default_factory=GraphBody)
    elements: tuple[Element, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "elements", tuple(sorted(self.elements, key=lambda e: natural_key(e.id)))
        )

    @cached_property
    def _index(self) -> dict[str, Element]:
        index: dict[str, Element] = {}
        for element in self.elements:
            index.setdefault(element.id, element)
        return index

    @cached_property
    def _parents(self) -> dict[str, str]:
        parents: dict[str, str] = {}
        for owner, body in self.bodies():
            for member in body.members:
                parents.setdefault(member, owner)
        return parents

    def __contains__(self, ident: object) -> bool:
        return ident in self._index

    def __len__(self) -> int:
        return len(self._index)

    def ids(self) -> list[str]:
        return list(self._index)

    def element(self, ident: str) -> Element:
        try:
            return self._index[ident]
        except KeyError:
            raise UnknownIdError(ident) from None

    def parent_of(self, ident: str) -> str:
        """Id of the enclosing context, or ``GRAPH`` for root members."""
        if ident not in self._index:
            raise UnknownIdError(ident)
        return self._parents.get(ident, GRAPH)

    def bodies(self) -> Iterator[tuple[str, GraphBody]]:
        """Yield ``(owner id, body)`` for the root and every context."""
        yield GRAPH, self.root
        for element in self.elements:
            if element.nested is not None:
                yield element.id, element.nested

    def body_of(self, ident: str) -> GraphBody:
        if ident == GRAPH:
            return self.root
        nested = self.element(ident).nested
        if nested is None:
            raise NotAContextError(ident)
        return nested

    def arcs(self) -> list[Arc]:
        return sorted((a for _, body in self.bodies() for a in body.arcs), key=Arc.sort_key)

    def contexts(self) -> list[str]:
        return [e.id for e in self.elements if e.nested is not None]

    def depth(self, ident: str) -> int:
        """Number of enclosing contexts; root members have depth 0."""
        depth = 0
        seen = {ident}
        parent = self.parent_of(ident)
        while parent != GRAPH and parent not in seen:
            seen.add(parent)
            depth += 1
            parent = self.parent_of(parent)
        return depth


def _bad_text(value: str) -> bool:
    return any(unicodedata.category(ch) in ("Cc", "Cs") for ch in value)


def validate(kb: KnowledgeBase) -> list[Violation]:
    """Check every structural invariant; an empty list means the kb is well formed."""
    out: list[Violation] = []
    index: dict[str, Element] = {}
    if _bad_text(kb.version_label):
        out.append(Violation("invalid-char", GRAPH, "version label contains control characters"))

    for element in kb.elements:
        eid = element.id
        if not eid:
            out.append(Violation("empty-id", eid, "element id is empty"))
        elif eid == GRAPH:
            out.append(Violation("reserved-id", eid, f"{GRAPH!r} is reserved for the whole graph"))
        if eid in index:
            out.append(Violation("duplicate-id", eid, "id used by more than one element"))
            continue
        index[eid] = element
        if not element.type_label:
            out.append(Violation("empty-type", eid, "type label is empty"))
        for name, text in (("id", eid), ("type", element.type_label), ("referent", element.referent)):
            if text is not None and _bad_text(text):
                out.append(Violation("invalid-char", eid, f"{name} contains control characters"))
        if element.kind is Kind.RELATION:
            if element.referent is not None:
                out.append(Violation("relation-referent", eid, "relations cannot carry a referent"))
            if element.nested is not None:
                out.append(Violation("relation-nested", eid, "relations cannot hold a nested graph"))
        if element.referent == "":
            out.append(Violation("empty-referent", eid, "referent is present but empty"))
        p = element.presentation
        if p is not None:
            coords = [p.x, p.y] + [v for v in (p.width, p.height) if v is not None]
            if not all(math.isfinite(v) for v in coords):
                out.append(Violation("bad-presentation", eid, "non-finite coordinate"))
            elif any(v <= 0 for v in (p.width, p.height) if v is not None):
                out.append(Violation("bad-presentation", eid, "width/height must be positive"))
            if p.color is not None and (not p.color or _bad_text(p.color)):
                out.append(Violation("bad-presentation", eid, "invalid color"))

    # containment tree
    owner_of: dict[str, str] = {}
    bodies = list(kb.bodies())
    for owner, body in bodies:
        for member in body.members:
            if member not in index:
                out.append(Violation("dangling-member", member, f"listed in {owner} but not defined"))
            elif member in owner_of:
                out.append(
                    Violation("multiple-parents", member, f"member of both {owner_of[member]} and {owner}")
                )
            else:
                owner_of[member] = owner

    reachable: set[str] = set()
    stack = [GRAPH]
    while stack:
        owner = stack.pop()
        body = kb.root if owner == GRAPH else index[owner].nested
        for member in body.members if body else ():
            if member in index and owner_of.get(member) == owner and member not in reachable:
                reachable.add(member)
                stack.append(member)
    for eid in index:
        if eid in reachable:
            continue
        if eid in owner_of:
            out.append(Violation("containment-cycle", eid, "nesting loops back on itself"))
        else:
            out.append(Violation("orphan", eid, "element is not a member of any graph body"))

    # arcs
    slots: set[tuple[str, int]] = set()
    for owner, body in bodies:
        members = set(body.members)
        for arc in body.arcs:
            missing = [i for i in (arc.relation_id, arc.concept_id) if i not in index]
            for ident in missing:
                out.append(Violation("dangling-arc", ident, f"arc endpoint {ident} does not exist", arc))
            if arc.position < 1:
                out.append(Violation("bad-position", arc.relation_id, "arc position must be >= 1", arc))
            slot = (arc.relation_id, arc.position)
            if slot in slots:
                out.append(
                    Violation("duplicate-slot", arc.relation_id, f"position {arc.position} used twice", arc)
                )
            slots.add(slot)
            if missing:
                continue
            if index[arc.relation_id].kind is not Kind.RELATION:
                out.append(Violation("arc-kind", arc.relation_id, "arc source is not a relation", arc))
            if index[arc.concept_id].kind is not Kind.CONCEPT:
                out.append(Violation("arc-kind", arc.concept_id, "arc target is not a concept", arc))
            if arc.relation_id not in members or arc.concept_id not in members:
                out.append(
                    Violation("arc-context", arc.relation_id, f"arc endpoints are not both members of {owner}", arc)
                )
    return out


def describe(kb: KnowledgeBase, ident: str) -> str:
    """Textual description used in diff records: ``Person`` or ``Person : John``."""
    element = kb.element(ident)
    if element.kind is Kind.CONCEPT and element.referent is not None:
        return f"{element.type_label} : {element.referent}"
    return element.type_label


def describe_link(kb: KnowledgeBase, arc: Arc) -> str:
    relation = kb.element(arc.relation_id)
    return f"[{relation.type_label} -> {describe(kb, arc.concept_id)}] : {arc.position}"


def containment_closure(kb: KnowledgeBase, ident: str) -> frozenset[str]:
    """All elements transitively inside a context, the context itself excluded.

    ``GRAPH`` yields every element of the knowledge base.
    """
    if ident == GRAPH:
        return frozenset(kb.ids())
    body = kb.body_of(ident)
    found: set[str] = set()
    stack = list(body.members)
    while stack:
        member = stack.pop()
        if member in found or member == ident:
            continue
        found.add(member)
        nested = kb.element(member).nested
        if nested is not None:
            stack.extend(nested.members)
    return frozenset(found)


class KBBuilder:
    """Incremental construction of a KnowledgeBase.

    Elements are attached to a parent context (``GRAPH`` by default); arcs are
    stored in the body that holds their relation at build time.
    """

    def __init__(self, version_label: str = "") -> None:
        self.version_label = version_label
        self._elements: list[Element] = []
        self._parent: list[str] = []
        self._contexts: set[str] = set()
        self._arcs: list[Arc] = []

    def concept(
        self,
        ident: str,
        type_label: str,
        referent: str | None = None,
        *,
        parent: str = GRAPH,
        context: bool = False,
        presentation: Presentation | None = None,
    ) -> KBBuilder:
        self._add(Element(ident, Kind.CONCEPT, type_label, referent, None, presentation), parent)
        if context:
            self._contexts.add(ident)
        return self

    def relation(
        self,
        ident: str,
        type_label: str,
        *,
        parent: str = GRAPH,
        presentation: Presentation | None = None,
    ) -> KBBuilder:
        self._add(Element(ident, Kind.RELATION, type_label, None, None, presentation), parent)
        return self

    def arc(self, relation_id: str, position: int, concept_id: str) -> KBBuilder:
        self._arcs.append(Arc(relation_id, position, concept_id))
        return self

    def _add(self, element: Element, parent: str) -> None:
        self._elements.append(element)
        self._parent.append(parent)
        if parent != GRAPH:
            self._contexts.add(parent)

    def build(self) -> KnowledgeBase:
        members: dict[str, list[str]] = {GRAPH: []}
        members.update((c, []) for c in self._contexts)
        for element, parent in zip(self._elements, self._parent):
            members.setdefault(parent, []).append(element.id)
        home: dict[str, str] = {}
        for element, parent in zip(self._elements, self._parent):
            home.setdefault(element.id, parent)
        arcs: dict[str, list[Arc]] = {}
        for arc in self._arcs:
            arcs.setdefault(home.get(arc.relation_id, GRAPH), []).append(arc)

        def body(owner: str) -> GraphBody:
            return GraphBody(tuple(members.get(owner, ())), tuple(arcs.get(owner, ())))

        elements = []
        for element in self._elements:
            if element.id in self._contexts and element.kind is Kind.CONCEPT:
                element = Element(
                    element.id, element.kind, element.type_label, element.referent,
                    body(element.id), element.presentation,
                )
            elements.append(element)
        return KnowledgeBase(self.version_label, body(GRAPH), tuple(elements))


def rebuild(
    version_label: str,
    elements: Iterable[Element],
    parent: dict[str, str],
    arcs: Iterable[Arc],
) -> KnowledgeBase:
    """Assemble a kb from flat parts; ``parent`` maps element id to its context."""
    builder = KBBuilder(version_label)
    for element in elements:
        if element.kind is Kind.CONCEPT:
            builder.concept(
                element.id, element.type_label, element.referent,
                parent=parent.get(element.id, GRAPH),
                context=element.nested is not None,
                presentation=element.presentation,
            )
        else:
            builder.relation(
                element.id, element.type_label,
                parent=parent.get(element.id, GRAPH),
                presentation=element.presentation,
            )
    for arc in arcs:
        builder.arc(arc.relation_id, arc.position, arc.concept_id)
    return builder.build()
