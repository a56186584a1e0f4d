"""Identifier-matched difference between two knowledge-base versions.

Elements (SELF) are matched by id and compared through a fingerprint of their
semantic fields.  Links (LINK) are keyed by their relation slot
``(relation_id, position)``; the concept filling the slot is the link's value,
so retargeting a slot is a modification rather than a delete plus an add.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, replace
from enum import Enum

from .model import Arc, KnowledgeBase, Kind, describe, describe_link, natural_key


class ChangeType(str, Enum):
    ADD = "ADD"
    DEL = "DEL"
    MOD = "MOD"

    def __str__(self) -> str:
        return self.value


class Target(str, Enum):
    SELF = "SELF"
    LINK = "LINK"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class LinkKey:
    relation_id: str
    position: int

    def __str__(self) -> str:
        return f"{self.relation_id}:{self.position}"

    @classmethod
    def parse(cls, text: str) -> LinkKey:
        relation_id, sep, position = text.rpartition(":")
        if not sep or not relation_id or not position.isdigit():
            raise ValueError(f"not a link key: {text!r}")
        return cls(relation_id, int(position))


@dataclass(frozen=True)
class DiffRecord:
    """One change.  ``kind`` is set on SELF records; ``endpoints`` on LINK
    records lists the relation and every concept that filled the slot."""

    target: Target
    change: ChangeType
    subject: str | LinkKey
    from_desc: str | None
    to_desc: str | None
    kind: Kind | None = None
    endpoints: tuple[str, ...] = ()

    @property
    def subject_id(self) -> str:
        return str(self.subject)

    def sort_key(self) -> tuple:
        if isinstance(self.subject, LinkKey):
            ident, position = self.subject.relation_id, self.subject.position
        else:
            ident, position = self.subject, 0
        return (
            _TARGET_ORDER[self.target],
            _CHANGE_ORDER[self.change],
            natural_key(ident),
            position,
        )


_TARGET_ORDER = {Target.SELF: 0, Target.LINK: 1}
_CHANGE_ORDER = {ChangeType.MOD: 0, ChangeType.ADD: 1, ChangeType.DEL: 2}


@dataclass(frozen=True)
class DiffReport:
    old_version: str
    new_version: str
    records: tuple[DiffRecord, ...] = ()

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


def fingerprint(kb: KnowledgeBase, ident: str) -> str:
    """Digest of kind, type label, referent and enclosing context.

    Presentation and the contents of a nested body are deliberately left out.
    """
    element = kb.element(ident)
    payload = json.dumps(
        [element.kind.value, element.type_label, element.referent, kb.parent_of(ident)],
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _slots(kb: KnowledgeBase) -> dict[LinkKey, Arc]:
    return {LinkKey(a.relation_id, a.position): a for a in kb.arcs()}


def diff(old: KnowledgeBase, new: KnowledgeBase) -> DiffReport:
    records: list[DiffRecord] = []

    for ident in new.ids():
        if ident not in old:
            records.append(
                DiffRecord(Target.SELF, ChangeType.ADD, ident, None, describe(new, ident),
                           new.element(ident).kind)
            )
        elif fingerprint(old, ident) != fingerprint(new, ident):
            records.append(
                DiffRecord(Target.SELF, ChangeType.MOD, ident, describe(old, ident),
                           describe(new, ident), new.element(ident).kind)
            )
    for ident in old.ids():
        if ident not in new:
            records.append(
                DiffRecord(Target.SELF, ChangeType.DEL, ident, describe(old, ident), None,
                           old.element(ident).kind)
            )

    old_slots, new_slots = _slots(old), _slots(new)
    for key, arc in new_slots.items():
        before = old_slots.get(key)
        if before is None:
            records.append(
                DiffRecord(Target.LINK, ChangeType.ADD, key, None, describe_link(new, arc),
                           endpoints=(arc.relation_id, arc.concept_id))
            )
        elif before.concept_id != arc.concept_id:
            records.append(
                DiffRecord(Target.LINK, ChangeType.MOD, key, describe_link(old, before),
                           describe_link(new, arc),
                           endpoints=(arc.relation_id, before.concept_id, arc.concept_id))
            )
    for key, arc in old_slots.items():
        if key not in new_slots:
            records.append(
                DiffRecord(Target.LINK, ChangeType.DEL, key, describe_link(old, arc), None,
                           endpoints=(arc.relation_id, arc.concept_id))
            )

    records.sort(key=DiffRecord.sort_key)
    return DiffReport(old.version_label, new.version_label, tuple(records))


_SWAP = {ChangeType.ADD: ChangeType.DEL, ChangeType.DEL: ChangeType.ADD, ChangeType.MOD: ChangeType.MOD}


def reverse(report: DiffReport) -> DiffReport:
    """The report of the opposite direction: ADD and DEL exchanged, From/To swapped."""
    records = [
        replace(
            r,
            change=_SWAP[r.change],
            from_desc=r.to_desc,
            to_desc=r.from_desc,
            endpoints=(r.endpoints[:1] + r.endpoints[:0:-1]) if r.change is ChangeType.MOD else r.endpoints,
        )
        for r in report.records
    ]
    records.sort(key=DiffRecord.sort_key)
    return DiffReport(report.new_version, report.old_version, tuple(records))


def _desc(value: str | None) -> str:
    return "null" if value is None else value


def format_record(record: DiffRecord) -> str:
    return (
        f"Target : {record.target} / Type : {record.change} / "
        f"From : {_desc(record.from_desc)} / To : {_desc(record.to_desc)}"
    )


def format_diff(report: DiffReport) -> str:
    return "".join(format_record(r) + "\n" for r in report.records)


_LINE = re.compile(
    r"Target : (SELF|LINK) / Type : (ADD|DEL|MOD) / From : (.*?) / To : (.*)"
)


def parse_diff_line(line: str) -> tuple[Target, ChangeType, str | None, str | None]:
    match = _LINE.fullmatch(line.rstrip("\n"))
    if match is None:
        raise ValueError(f"not a diff line: {line!r}")
    target, change, old, new = match.groups()
    return (
        Target(target),
        ChangeType(change),
        None if old == "null" else old,
        None if new == "null" else new,
    )


def format_records(report: DiffReport) -> str:
    """Machine-readable variant: one JSON object per line."""
    lines = []
    for r in report.records:
        obj = {
            "target": r.target.value,
            "type": r.change.value,
            "id": r.subject_id,
            "from": r.from_desc,
            "to": r.to_desc,
        }
        lines.append(json.dumps(obj, ensure_ascii=False) + "\n")
    return "".join(lines)


def parse_records(text: str) -> list[dict]:
    out = []
    for line in text.splitlines():
        if line.strip():
            obj = json.loads(line)
            obj["target"] = Target(obj["target"])
            obj["type"] = ChangeType(obj["type"])
            out.append(obj)
    return out
