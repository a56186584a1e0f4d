"""Update-activity robustness criteria (group ``c4``: add, del, mod).

Each element accumulates the number of additions, suppressions and
modifications recorded against it across version pairs.  Contexts and the
whole graph get aggregate rows summing their contents.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping

from .diff import ChangeType, DiffRecord, DiffReport, Target, diff
from .model import GRAPH, KnowledgeBase, containment_closure, natural_key

GROUP = "c4"


class Criterion(str, Enum):
    ADD = "add"
    DEL = "del"
    MOD = "mod"

    def __str__(self) -> str:
        return self.value


_COLUMN = {ChangeType.ADD: Criterion.ADD, ChangeType.DEL: Criterion.DEL, ChangeType.MOD: Criterion.MOD}


class CriteriaError(ValueError):
    pass


@dataclass(frozen=True)
class CriteriaRecord:
    id: str
    nodetype: str
    add: float = 0.0
    del_: float = 0.0
    mod: float = 0.0
    aggregate: bool = False

    def get(self, criterion: Criterion | str) -> float:
        return {"add": self.add, "del": self.del_, "mod": self.mod}[Criterion(criterion).value]

    def counts(self) -> tuple[float, float, float]:
        return self.add, self.del_, self.mod

    def plus(self, other: CriteriaRecord) -> CriteriaRecord:
        return replace(self, add=self.add + other.add, del_=self.del_ + other.del_, mod=self.mod + other.mod)

    def bump(self, criterion: Criterion, amount: float = 1.0) -> CriteriaRecord:
        name = {"add": "add", "del": "del_", "mod": "mod"}[criterion.value]
        return replace(self, **{name: getattr(self, name) + amount})


def _row_order(ident: str) -> tuple:
    return (ident == GRAPH, natural_key(ident))


@dataclass(frozen=True)
class CriteriaTable:
    version_span: tuple[str, str]
    rows: Mapping[str, CriteriaRecord] = field(default_factory=dict)

    def __getitem__(self, ident: str) -> CriteriaRecord:
        return self.rows[ident]

    def __contains__(self, ident: object) -> bool:
        return ident in self.rows

    def ordered(self) -> list[CriteriaRecord]:
        """Rows in natural id order with ``GRAPH`` last."""
        return [self.rows[i] for i in sorted(self.rows, key=_row_order)]

    def element_rows(self) -> list[CriteriaRecord]:
        return [r for r in self.ordered() if not r.aggregate]


def link_attribution(record: DiffRecord, new: KnowledgeBase) -> list[str]:
    """Elements whose counters a LINK record increments.

    Every endpoint the link touched (relation plus old/new concept) that still
    exists in the new version.  Relation-only attribution would be
    ``[record.endpoints[0]]``.
    """
    return [e for e in dict.fromkeys(record.endpoints) if e in new]


def eval_pair(report: DiffReport, new: KnowledgeBase) -> CriteriaTable:
    rows: dict[str, CriteriaRecord] = {
        e.id: CriteriaRecord(e.id, e.kind.value) for e in new.elements
    }
    for record in report.records:
        column = _COLUMN[record.change]
        if record.target is Target.SELF:
            ident = record.subject_id
            if record.change is ChangeType.DEL:
                if ident in new:
                    raise CriteriaError(f"DEL record for {ident} but it exists in {new.version_label}")
                kind = record.kind.value if record.kind is not None else "concept"
                rows.setdefault(ident, CriteriaRecord(ident, kind))
            elif ident not in new:
                raise CriteriaError(f"{record.change} record for {ident} absent from {new.version_label}")
            rows[ident] = rows[ident].bump(column)
        else:
            relation = record.endpoints[0] if record.endpoints else record.subject.relation_id
            if record.change is not ChangeType.DEL and relation not in new:
                raise CriteriaError(f"link on {relation} absent from {new.version_label}")
            for ident in link_attribution(record, new):
                rows[ident] = rows[ident].bump(column)
    return CriteriaTable((report.old_version, report.new_version), rows)


def add_tables(first: CriteriaTable, second: CriteriaTable) -> CriteriaTable:
    """Element-wise sum; the later table decides a row's nodetype."""
    rows = dict(first.rows)
    for ident, row in second.rows.items():
        rows[ident] = row.plus(rows[ident]) if ident in rows else row
    return CriteriaTable((first.version_span[0], second.version_span[1]), rows)


def eval_history(versions: Iterable[KnowledgeBase]) -> CriteriaTable:
    versions = list(versions)
    if len(versions) < 2:
        raise CriteriaError("a history needs at least two versions")
    table = None
    for old, new in zip(versions, versions[1:]):
        step = eval_pair(diff(old, new), new)
        table = step if table is None else add_tables(table, step)
    return table


def aggregate(table: CriteriaTable, kb: KnowledgeBase) -> CriteriaTable:
    """Add a summed row per context and a ``GRAPH`` row.

    A context row replaces the context concept's own row and sums the rows of
    its containment closure.  ``GRAPH`` sums every element row in the table,
    including rows retained for elements deleted earlier in the history.
    """
    if any(r.aggregate for r in table.rows.values()):
        raise CriteriaError("table is already aggregated")
    missing = [i for i in kb.ids() if i not in table.rows]
    if missing:
        raise CriteriaError(f"no criteria rows for {', '.join(sorted(missing, key=natural_key))}")
    base = table.rows
    rows = dict(base)
    for ctx in kb.contexts():
        total = CriteriaRecord(ctx, base[ctx].nodetype, aggregate=True)
        for member in containment_closure(kb, ctx):
            total = total.plus(base[member])
        rows[ctx] = total
    grand = CriteriaRecord(GRAPH, "graph", aggregate=True)
    for row in base.values():
        grand = grand.plus(row)
    rows[GRAPH] = grand
    return CriteriaTable(table.version_span, rows)


def normalize(table: CriteriaTable, criterion: Criterion | str) -> dict[str, float]:
    """Scale one column to [0, 1] by its maximum over element rows."""
    criterion = Criterion(criterion)
    rows = table.element_rows()
    top = max((r.get(criterion) for r in rows), default=0.0)
    if top <= 0:
        return {r.id: 0.0 for r in rows}
    return {r.id: r.get(criterion) / top for r in rows}


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _num(value: float) -> str:
    return f"{value:.1f}"


def format_criteria(table: CriteriaTable) -> str:
    rows = table.ordered()
    if not rows:
        return "<robustness/>\n"
    out = ["<robustness>"]
    for r in rows:
        out += [
            "  <criteria>",
            f"    <id>{_escape(r.id)}</id>",
            f"    <nodetype>{r.nodetype}</nodetype>",
            f"    <{GROUP}>",
            f"      <add>{_num(r.add)}</add>",
            f"      <del>{_num(r.del_)}</del>",
            f"      <mod>{_num(r.mod)}</mod>",
            f"    </{GROUP}>",
            "  </criteria>",
        ]
    out.append("</robustness>")
    return "\n".join(out) + "\n"


def format_flat(table: CriteriaTable) -> str:
    """Tab-separated ``id nodetype add del mod``, one row per line."""
    return "".join(
        f"{r.id}\t{r.nodetype}\t{_num(r.add)}\t{_num(r.del_)}\t{_num(r.mod)}\n"
        for r in table.ordered()
    )


def _record(ident: str, nodetype: str, add: str, dele: str, mod: str) -> CriteriaRecord:
    try:
        counts = [float(v) for v in (add, dele, mod)]
    except ValueError:
        raise CriteriaError(f"row {ident}: counts must be numbers") from None
    if any(not (v >= 0) for v in counts):
        raise CriteriaError(f"row {ident}: counts must be non-negative")
    return CriteriaRecord(ident, nodetype, *counts, aggregate=ident == GRAPH)


def parse_criteria(text: str) -> CriteriaTable:
    """Read a table written by format_criteria or format_flat.

    Only the ``GRAPH`` row is recognisable as an aggregate after a round trip.
    """
    rows: dict[str, CriteriaRecord] = {}
    if text.lstrip().startswith("<"):
        try:
            root = ET.fromstring(text)
        except ET.ParseError as exc:
            raise CriteriaError(f"malformed criteria XML: {exc}") from None
        if root.tag != "robustness":
            raise CriteriaError(f"expected <robustness>, got <{root.tag}>")
        for entry in root.findall("criteria"):
            fields = [entry.findtext(p) for p in ("id", "nodetype", f"{GROUP}/add", f"{GROUP}/del", f"{GROUP}/mod")]
            if any(f is None for f in fields):
                raise CriteriaError("criteria entry lacks id, nodetype or c4 counts")
            rows[fields[0]] = _record(*fields)
    else:
        for number, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise CriteriaError(f"line {number}: expected 5 tab-separated fields")
            rows[parts[0]] = _record(*parts)
    return CriteriaTable(("", ""), rows)
