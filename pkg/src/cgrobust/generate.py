"""Random knowledge bases and primitive edit scripts for property testing.

``expected_counts`` derives per-element add/del/mod counts from an edit
script alone, without looking at any diff, so it can serve as an oracle for
the diff-then-count pipeline.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field, replace

from .model import GRAPH, Arc, Element, GraphBody, KnowledgeBase, Kind, Presentation, rebuild

TYPES = ("Person", "Picture", "Lake", "Fish", "Boat", "City", "Bus", "Idea", "Tree", "Sky")
RELATIONS = ("agnt", "obj", "on", "in", "contain", "think", "dest", "attr")
NAMES = ("John", "Peter", "Mary", "Boston", "Ann", "Paris", "Rex")


@dataclass
class _State:
    """Mutable working copy of a knowledge base."""

    version: str
    elements: dict[str, Element]
    parent: dict[str, str]
    slots: dict[tuple[str, int], str] = field(default_factory=dict)

    @classmethod
    def of(cls, kb: KnowledgeBase) -> _State:
        return cls(
            kb.version_label,
            {e.id: e for e in kb.elements},
            {e.id: kb.parent_of(e.id) for e in kb.elements},
            {(a.relation_id, a.position): a.concept_id for a in kb.arcs()},
        )

    def contexts(self) -> list[str]:
        return sorted(i for i, e in self.elements.items() if e.nested is not None)

    def depth(self, ident: str) -> int:
        depth, parent = 0, self.parent[ident]
        while parent != GRAPH:
            depth, parent = depth + 1, self.parent[parent]
        return depth

    def inside(self, ctx: str, ident: str) -> bool:
        """Whether ``ident`` is ``ctx`` or transitively nested in it."""
        while ident != GRAPH:
            if ident == ctx:
                return True
            ident = self.parent[ident]
        return False

    def has_arcs(self, ident: str) -> bool:
        return any(ident in (r, c) for (r, _), c in self.slots.items())

    def members(self, owner: str) -> list[str]:
        return sorted(i for i, p in self.parent.items() if p == owner)

    def kb(self, version: str | None = None) -> KnowledgeBase:
        arcs = [Arc(r, p, c) for (r, p), c in self.slots.items()]
        return rebuild(version or self.version, self.elements.values(), self.parent, arcs)


def _presentation(rng: random.Random) -> Presentation | None:
    if rng.random() < 0.3:
        return None
    x = round(rng.uniform(-500, 1500), rng.choice((0, 0, 1, 3)))
    y = round(rng.uniform(-500, 1500), rng.choice((0, 0, 1, 3)))
    w = round(rng.uniform(20, 300), 1) if rng.random() < 0.3 else None
    h = round(rng.uniform(20, 300), 1) if w is not None and rng.random() < 0.8 else None
    color = rng.choice(("#ffcc00", "red", "#eef")) if rng.random() < 0.2 else None
    return Presentation(x, y, w, h, color)


def random_kb(
    rng: random.Random,
    max_elements: int = 100,
    max_depth: int = 3,
    version: str = "v1",
    prefix: str = "n",
) -> KnowledgeBase:
    """A valid kb with up to ``max_elements`` elements and nesting depth ``<= max_depth``.

    Ids are numbered in shuffled order so that insertion order and id order differ.
    """
    n = rng.randint(0, max_elements)
    numbers = list(range(n))
    rng.shuffle(numbers)
    state = _State(version, {}, {})
    for k in numbers:
        ident = f"{prefix}{k}"
        owners = [GRAPH] + [c for c in state.contexts() if state.depth(c) < max_depth]
        parent = rng.choice(owners)
        if rng.random() < 0.62:
            nested = None
            if rng.random() < 0.25 and (parent == GRAPH or state.depth(parent) + 1 < max_depth):
                nested = GraphBody()
            referent = rng.choice(NAMES) if rng.random() < 0.3 else None
            element = Element(ident, Kind.CONCEPT, rng.choice(TYPES), referent, nested, _presentation(rng))
        else:
            element = Element(ident, Kind.RELATION, rng.choice(RELATIONS), None, None, _presentation(rng))
        state.elements[ident] = element
        state.parent[ident] = parent

    for rel in sorted(i for i, e in state.elements.items() if e.kind is Kind.RELATION):
        peers = [
            i for i in state.members(state.parent[rel]) if state.elements[i].kind is Kind.CONCEPT
        ]
        if not peers:
            continue
        for position in rng.sample(range(1, 5), rng.randint(0, 3)):
            state.slots[(rel, position)] = rng.choice(peers)
    return state.kb()


@dataclass(frozen=True)
class Edit:
    """One primitive edit.

    ``op`` is one of add-element, delete-element, retype, rereference,
    reparent, add-arc, delete-arc, retarget.  ``subject`` is an element id or
    a ``(relation_id, position)`` slot.
    """

    op: str
    subject: str | tuple[str, int]
    payload: tuple = ()


CATEGORY = {
    "add-element": "add",
    "delete-element": "del",
    "retype": "mod",
    "rereference": "mod",
    "reparent": "mod",
    "add-arc": "add",
    "delete-arc": "del",
    "retarget": "mod",
}


def apply_edit(state: _State, edit: Edit) -> None:
    op, subject, payload = edit.op, edit.subject, edit.payload
    if op == "add-element":
        element, parent = payload
        state.elements[subject] = element
        state.parent[subject] = parent
    elif op == "delete-element":
        del state.elements[subject]
        del state.parent[subject]
    elif op == "retype":
        state.elements[subject] = replace(state.elements[subject], type_label=payload[0])
    elif op == "rereference":
        state.elements[subject] = replace(state.elements[subject], referent=payload[0])
    elif op == "reparent":
        state.parent[subject] = payload[0]
    elif op in ("add-arc", "retarget"):
        state.slots[subject] = payload[-1]
    elif op == "delete-arc":
        del state.slots[subject]
    else:
        raise ValueError(f"unknown edit {op!r}")


def apply_script(kb: KnowledgeBase, script: list[Edit], version: str | None = None) -> KnowledgeBase:
    state = _State.of(kb)
    for edit in script:
        apply_edit(state, edit)
    return state.kb(version or kb.version_label + "'")


def random_script(
    rng: random.Random,
    kb: KnowledgeBase,
    length: int = 8,
    fresh: str = "z",
    max_depth: int = 3,
) -> list[Edit]:
    """Up to ``length`` valid primitive edits, each on a distinct subject.

    New elements get ids ``<fresh><k>`` which must not occur in ``kb``.
    """
    state = _State.of(kb)
    touched: set = set()
    script: list[Edit] = []
    counter = 0
    attempts = 0
    while len(script) < length and attempts < length * 20:
        attempts += 1
        op = rng.choice(tuple(CATEGORY))
        edit = _propose(rng, state, op, touched, fresh, counter, max_depth)
        if edit is None:
            continue
        if op == "add-element":
            counter += 1
        touched.add(edit.subject)
        apply_edit(state, edit)
        script.append(edit)
    return script


def _free(ids, touched):
    return [i for i in sorted(ids) if i not in touched]


def _propose(rng, state, op, touched, fresh, counter, max_depth):
    elements = state.elements
    if op == "add-element":
        ident = f"{fresh}{counter}"
        owners = [GRAPH] + [c for c in state.contexts() if state.depth(c) < max_depth]
        parent = rng.choice(owners)
        if rng.random() < 0.6:
            referent = rng.choice(NAMES) if rng.random() < 0.3 else None
            nested = None
            if rng.random() < 0.15 and (parent == GRAPH or state.depth(parent) + 1 < max_depth):
                nested = GraphBody()
            element = Element(ident, Kind.CONCEPT, rng.choice(TYPES), referent, nested, _presentation(rng))
        else:
            element = Element(ident, Kind.RELATION, rng.choice(RELATIONS), None, None, _presentation(rng))
        return Edit(op, ident, (element, parent))
    if op == "delete-element":
        candidates = [
            i for i in _free(elements, touched)
            if not state.has_arcs(i) and not state.members(i)
        ]
        return Edit(op, rng.choice(candidates)) if candidates else None
    if op == "retype":
        candidates = _free(elements, touched)
        if not candidates:
            return None
        ident = rng.choice(candidates)
        pool = RELATIONS if elements[ident].kind is Kind.RELATION else TYPES
        label = rng.choice([t for t in pool if t != elements[ident].type_label])
        return Edit(op, ident, (label,))
    if op == "rereference":
        candidates = [i for i in _free(elements, touched) if elements[i].kind is Kind.CONCEPT]
        if not candidates:
            return None
        ident = rng.choice(candidates)
        options = [r for r in (None, *NAMES) if r != elements[ident].referent]
        return Edit(op, ident, (rng.choice(options),))
    if op == "reparent":
        candidates = [i for i in _free(elements, touched) if not state.has_arcs(i)]
        if not candidates:
            return None
        ident = rng.choice(candidates)
        height = _height(state, ident)
        owners = [GRAPH] + [
            c for c in state.contexts()
            if not state.inside(ident, c) and state.depth(c) + 1 + height <= max_depth
        ]
        owners = [o for o in owners if o != state.parent[ident]]
        return Edit(op, ident, (rng.choice(owners),)) if owners else None
    if op == "add-arc":
        relations = [i for i in sorted(elements) if elements[i].kind is Kind.RELATION]
        rng.shuffle(relations)
        for rel in relations:
            peers = [
                i for i in state.members(state.parent[rel]) if elements[i].kind is Kind.CONCEPT
            ]
            slots = [(rel, p) for p in range(1, 6) if (rel, p) not in state.slots and (rel, p) not in touched]
            if peers and slots:
                return Edit(op, rng.choice(slots), (rng.choice(peers),))
        return None
    if op == "delete-arc":
        candidates = _free(state.slots, touched)
        if not candidates:
            return None
        slot = rng.choice(candidates)
        return Edit(op, slot, (state.slots[slot],))
    if op == "retarget":
        candidates = _free(state.slots, touched)
        rng.shuffle(candidates)
        for slot in candidates:
            current = state.slots[slot]
            peers = [
                i for i in state.members(state.parent[slot[0]])
                if elements[i].kind is Kind.CONCEPT and i != current
            ]
            if peers:
                return Edit(op, slot, (current, rng.choice(peers)))
        return None
    raise ValueError(op)


def _height(state: _State, ident: str) -> int:
    """Nesting levels below ``ident`` (0 for a non-context or empty context)."""
    if state.elements[ident].nested is None:
        return 0
    children = state.members(ident)
    return 1 + max((_height(state, c) for c in children), default=0) if children else 1


def expected_counts(script: list[Edit], final: KnowledgeBase) -> dict[str, Counter]:
    """Per element, how many script edits of each category touch it.

    Element edits count on their subject.  Arc edits count on every endpoint
    they involve (relation, old and new concept) that exists in ``final``.
    """
    counts: dict[str, Counter] = {}
    for edit in script:
        category = CATEGORY[edit.op]
        if isinstance(edit.subject, str):
            touched = [edit.subject]
        else:
            touched = [e for e in dict.fromkeys((edit.subject[0], *edit.payload)) if e in final]
        for ident in touched:
            counts.setdefault(ident, Counter())[category] += 1
    return counts


def perturb_presentation(rng: random.Random, kb: KnowledgeBase) -> KnowledgeBase:
    """Same kb with layout hints randomly moved, added, dropped or recolored."""
    state = _State.of(kb)
    for ident, element in sorted(state.elements.items()):
        roll = rng.random()
        if roll < 0.25:
            pres = None
        elif roll < 0.9:
            pres = _presentation(rng) or Presentation(rng.uniform(0, 900), rng.uniform(0, 900))
        else:
            continue
        state.elements[ident] = replace(element, presentation=pres)
    return state.kb()
