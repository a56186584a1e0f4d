"""Deterministic SVG and DOT views of a knowledge base.

Concepts are rectangles, relations ellipses, contexts enclosing rounded boxes.
When a criterion is selected every node is filled at a fixed hue per kind
with lightness rising in the normalized count, so the most updated elements
are the lightest.
"""

from __future__ import annotations

import colorsys
import math
from dataclasses import dataclass

from .cgx import format_number
from .criteria import CriteriaTable, Criterion, normalize
from .model import GRAPH, Arc, KnowledgeBase, Kind, natural_key

PITCH_X = 160.0
PITCH_Y = 100.0
BASE_LIGHTNESS = 0.30
LIGHTNESS_SPAN = 0.55
HUE = {Kind.CONCEPT: 210.0, Kind.RELATION: 30.0}
SATURATION = 0.60

SVG_NS = "http://www.w3.org/2000/svg"
CG_NS = "urn:cgrobust:render"

_NODE_H = 30.0
_PAD = 14.0
_HEADER = 20.0


class RenderError(ValueError):
    pass


@dataclass(frozen=True)
class LayoutPoint:
    id: str
    x: float
    y: float
    shape: str  # "rectangle" | "ellipse"


@dataclass(frozen=True)
class ColorSpec:
    hue: float
    saturation: float
    lightness: float

    def hex(self) -> str:
        r, g, b = colorsys.hls_to_rgb(self.hue / 360.0, self.lightness, self.saturation)
        return "#{:02x}{:02x}{:02x}".format(*(round(c * 255) for c in (r, g, b)))


@dataclass(frozen=True)
class RenderPlan:
    layout: tuple[LayoutPoint, ...]
    edges: tuple[Arc, ...]
    fills: dict[str, ColorSpec]
    contexts: tuple[str, ...]
    legend: str

    def point(self, ident: str) -> LayoutPoint:
        return next(p for p in self.layout if p.id == ident)


def _cell(x: float, y: float) -> tuple[int, int]:
    return math.floor(x / PITCH_X + 0.5), math.floor(y / PITCH_Y + 0.5)


def layout(kb: KnowledgeBase) -> list[LayoutPoint]:
    """Stored positions where present; a depth-layered grid for the rest.

    Fallback rows are containment depths; within a row elements go left to
    right ordered by (parent id, id), skipping grid cells already holding a
    stored position.
    """
    placed: dict[str, tuple[float, float]] = {}
    occupied: set[tuple[int, int]] = set()
    for element in kb.elements:
        p = element.presentation
        if p is not None:
            placed[element.id] = (p.x, p.y)
            occupied.add(_cell(p.x, p.y))

    def order(ident: str) -> tuple:
        parent = kb.parent_of(ident)
        return kb.depth(ident), parent != GRAPH, natural_key(parent), natural_key(ident)

    cursor: dict[int, int] = {}
    for ident in sorted((e.id for e in kb.elements if e.id not in placed), key=order):
        row = kb.depth(ident)
        col = cursor.get(row, 0)
        while (col, row) in occupied:
            col += 1
        occupied.add((col, row))
        cursor[row] = col + 1
        placed[ident] = (col * PITCH_X, row * PITCH_Y)

    return [
        LayoutPoint(
            e.id, *placed[e.id], "ellipse" if e.kind is Kind.RELATION else "rectangle"
        )
        for e in kb.elements
    ]


def colorize(norm: float, kind: Kind | str) -> ColorSpec:
    if not 0.0 <= norm <= 1.0:
        raise ValueError(f"normalized value {norm!r} outside [0, 1]")
    kind = Kind(kind)
    return ColorSpec(HUE[kind], SATURATION, BASE_LIGHTNESS + LIGHTNESS_SPAN * norm)


def plan(
    kb: KnowledgeBase,
    table: CriteriaTable | None = None,
    criterion: Criterion | str | None = None,
) -> RenderPlan:
    """Resolve layout and fills.  Contexts are drawn as boxes and get no fill."""
    nodes = [e for e in kb.elements if e.nested is None]
    if criterion is None:
        norm = {e.id: 0.0 for e in nodes}
        legend = "plain view"
    else:
        if table is None:
            raise RenderError("a criterion needs a criteria table")
        criterion = Criterion(criterion)
        missing = [e.id for e in nodes if e.id not in table]
        if missing:
            raise RenderError(f"criteria table has no row for {', '.join(missing)}")
        view = CriteriaTable(
            table.version_span,
            {e.id: table[e.id] for e in nodes},
        )
        norm = normalize(view, criterion)
        top = max((table[e.id].get(criterion) for e in nodes), default=0.0)
        legend = f"criterion: {criterion.value} (max {format_number(float(top))})"
    fills = {e.id: colorize(norm[e.id], e.kind) for e in nodes}
    return RenderPlan(
        tuple(layout(kb)), tuple(kb.arcs()), fills, tuple(kb.contexts()), legend
    )


def _label(kb: KnowledgeBase, ident: str) -> str:
    e = kb.element(ident)
    return e.type_label if e.referent is None else f"{e.type_label} : {e.referent}"


def _width(label: str) -> float:
    return max(60.0, 7.0 * len(label) + 20.0)


def _esc(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")
    )


def _n(value: float) -> str:
    text = f"{value:.2f}".rstrip("0").rstrip(".")
    return "0" if text in ("-0", "") else text


def _boxes(kb: KnowledgeBase, points: dict[str, LayoutPoint]) -> dict[str, tuple[float, float, float, float]]:
    """Bounding boxes (x0, y0, x1, y1) of every node and context."""
    boxes: dict[str, tuple[float, float, float, float]] = {}
    for ident, p in points.items():
        if kb.element(ident).nested is None:
            w = _width(_label(kb, ident))
            boxes[ident] = (p.x - w / 2, p.y - _NODE_H / 2, p.x + w / 2, p.y + _NODE_H / 2)
    # innermost contexts first so outer boxes can enclose inner ones
    for ctx in sorted(kb.contexts(), key=lambda c: (-kb.depth(c), natural_key(c))):
        element = kb.element(ctx)
        p = points[ctx]
        w = _width(_label(kb, ctx))
        x0, y0, x1, y1 = p.x - w / 2, p.y - _NODE_H / 2, p.x + w / 2, p.y + _NODE_H / 2
        pres = element.presentation
        if pres is not None and pres.width is not None and pres.height is not None:
            x0, y0 = min(x0, p.x - pres.width / 2), min(y0, p.y - pres.height / 2)
            x1, y1 = max(x1, p.x + pres.width / 2), max(y1, p.y + pres.height / 2)
        for member in element.nested.members:
            mx0, my0, mx1, my1 = boxes[member]
            x0, y0, x1, y1 = min(x0, mx0 - _PAD), min(y0, my0 - _PAD - _HEADER), max(x1, mx1 + _PAD), max(y1, my1 + _PAD)
        boxes[ctx] = (x0, y0, x1, y1)
    return boxes


def render_svg(
    kb: KnowledgeBase,
    table: CriteriaTable | None = None,
    criterion: Criterion | str | None = None,
) -> bytes:
    rp = plan(kb, table, criterion)
    points = {p.id: p for p in rp.layout}
    boxes = _boxes(kb, points)

    x0 = min((b[0] for b in boxes.values()), default=0.0) - 20
    y0 = min((b[1] for b in boxes.values()), default=0.0) - 20
    x1 = max((b[2] for b in boxes.values()), default=0.0) + 20
    y1 = max((b[3] for b in boxes.values()), default=0.0) + 40
    w, h = x1 - x0, y1 - y0

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="{SVG_NS}" xmlns:cg="{CG_NS}" version="1.1" '
        f'width="{_n(w)}" height="{_n(h)}" viewBox="{_n(x0)} {_n(y0)} {_n(w)} {_n(h)}">',
        f"  <title>{_esc(kb.version_label)}</title>",
        '  <g class="contexts" fill="none" stroke="#777777" stroke-width="1.5">',
    ]
    for ctx in sorted(rp.contexts, key=lambda c: (kb.depth(c), natural_key(c))):
        bx0, by0, bx1, by1 = boxes[ctx]
        out.append(
            f'    <rect cg:id="{_esc(ctx)}" x="{_n(bx0)}" y="{_n(by0)}" '
            f'width="{_n(bx1 - bx0)}" height="{_n(by1 - by0)}" rx="12" ry="12"/>'
        )
        out.append(
            f'    <text x="{_n(bx0 + 8)}" y="{_n(by0 + 15)}" fill="#333333" stroke="none" '
            f'font-family="sans-serif" font-size="12">{_esc(_label(kb, ctx))}</text>'
        )
    out.append("  </g>")
    out.append('  <g class="arcs" stroke="#444444" stroke-width="1">')
    for arc in rp.edges:
        a, b = points[arc.relation_id], points[arc.concept_id]
        out.append(
            f'    <line cg:arc="{_esc(arc.relation_id)}:{arc.position}" '
            f'x1="{_n(a.x)}" y1="{_n(a.y)}" x2="{_n(b.x)}" y2="{_n(b.y)}"/>'
        )
        out.append(
            f'    <text x="{_n((a.x + b.x) / 2)}" y="{_n((a.y + b.y) / 2 - 4)}" stroke="none" '
            f'fill="#444444" font-family="sans-serif" font-size="11">{arc.position}</text>'
        )
    out.append("  </g>")
    out.append('  <g class="nodes" stroke="#222222" stroke-width="1" font-family="sans-serif" font-size="12">')
    for ident, color in sorted(rp.fills.items(), key=lambda kv: natural_key(kv[0])):
        p = points[ident]
        label = _label(kb, ident)
        nw = _width(label)
        common = f'cg:id="{_esc(ident)}" cg:lightness="{color.lightness!r}" fill="{color.hex()}"'
        if p.shape == "ellipse":
            out.append(
                f'    <ellipse {common} cx="{_n(p.x)}" cy="{_n(p.y)}" rx="{_n(nw / 2)}" ry="{_n(_NODE_H / 2)}"/>'
            )
        else:
            out.append(
                f'    <rect {common} x="{_n(p.x - nw / 2)}" y="{_n(p.y - _NODE_H / 2)}" '
                f'width="{_n(nw)}" height="{_n(_NODE_H)}"/>'
            )
        out.append(
            f'    <text x="{_n(p.x)}" y="{_n(p.y + 4)}" text-anchor="middle" stroke="none" '
            f'fill="{"#000000" if color.lightness >= 0.55 else "#ffffff"}">{_esc(label)}</text>'
        )
    out.append("  </g>")
    out.append(
        f'  <text class="legend" x="{_n(x0 + 10)}" y="{_n(y1 - 12)}" font-family="sans-serif" '
        f'font-size="12">{_esc(rp.legend)}</text>'
    )
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


def _q(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def render_dot(
    kb: KnowledgeBase,
    table: CriteriaTable | None = None,
    criterion: Criterion | str | None = None,
) -> str:
    rp = plan(kb, table, criterion)
    out = ["digraph kb {", f"  label={_q(kb.version_label + ' / ' + rp.legend)};", "  node [style=filled];"]

    def emit(body, depth: int) -> None:
        pad = "  " * depth
        for ident in body.members:
            element = kb.element(ident)
            if element.nested is not None:
                out.append(f"{pad}subgraph {_q('cluster_' + ident)} {{")
                out.append(f"{pad}  label={_q(_label(kb, ident))};")
                out.append(f"{pad}  style=rounded;")
                # anchor node so arcs can reach the context concept
                out.append(
                    f'{pad}  {_q(ident)} [shape=box, style="rounded", fillcolor="#ffffff", '
                    f"label={_q(_label(kb, ident))}];"
                )
                emit(element.nested, depth + 1)
                out.append(f"{pad}}}")
            else:
                shape = "ellipse" if element.kind is Kind.RELATION else "box"
                out.append(
                    f"{pad}{_q(ident)} [shape={shape}, label={_q(_label(kb, ident))}, "
                    f"fillcolor={_q(rp.fills[ident].hex())}];"
                )

    emit(kb.root, 1)
    for arc in rp.edges:
        out.append(f"  {_q(arc.relation_id)} -> {_q(arc.concept_id)} [label={_q(str(arc.position))}];")
    out.append("}")
    return "\n".join(out) + "\n"
