"""Exit criteria.  Every tolerance here is exact; runtimes are upper bounds."""

from __future__ import annotations

import random
import re
import time
from collections import Counter

import pytest

from cgrobust.cgx import parse_kb, serialize_kb
from cgrobust.cli import main
from cgrobust.criteria import aggregate, eval_history, eval_pair
from cgrobust.diff import diff
from cgrobust.generate import (
    CATEGORY,
    apply_script,
    expected_counts,
    perturb_presentation,
    random_kb,
    random_script,
)
from cgrobust.model import GRAPH, containment_closure, rebuild, validate
from cgrobust.render import plan, render_dot, render_svg

from conftest import GOLDEN

ZERO = (0.0, 0.0, 0.0)


def _cli(capsysbinary, *argv) -> tuple[int, bytes]:
    code = main([str(a) for a in argv])
    out, _ = capsysbinary.readouterr()
    return code, out


@pytest.mark.acceptance(1, "picture diff matches golden byte-exact")
def test_picture_diff_golden(capsysbinary, picture_paths):
    start = time.perf_counter()
    code, out = _cli(capsysbinary, "diff", *picture_paths)
    elapsed = time.perf_counter() - start
    assert code == 0
    assert out == (GOLDEN / "picture-diff.txt").read_bytes()
    lines = out.decode().splitlines()
    assert len(lines) == 7
    assert [l.split(" / ")[:2] for l in lines] == (
        [["Target : SELF", "Type : MOD"]] * 2
        + [["Target : SELF", "Type : ADD"]] * 3
        + [["Target : LINK", "Type : ADD"]] * 2
    )
    assert elapsed < 1.0


@pytest.mark.acceptance(2, "picture criteria match golden byte-exact")
def test_picture_criteria_golden(capsysbinary, picture_paths):
    start = time.perf_counter()
    code, out = _cli(capsysbinary, "eval", *picture_paths)
    elapsed = time.perf_counter() - start
    assert code == 0
    assert out == (GOLDEN / "picture-criteria.xml").read_bytes()
    text = out.decode()
    for ident, (add, dele, mod) in {"cn10": ("0.0", "0.0", "0.0"), "cn13": ("0.0", "0.0", "1.0"), "cn15": ("0.0", "0.0", "1.0")}.items():
        block = (
            f"  <criteria>\n    <id>{ident}</id>\n    <nodetype>concept</nodetype>\n    <c4>\n"
            f"      <add>{add}</add>\n      <del>{dele}</del>\n      <mod>{mod}</mod>\n    </c4>\n  </criteria>\n"
        )
        assert block in text
    assert elapsed < 1.0


@pytest.mark.acceptance(3, "identity: 200 random kbs diff empty, history all-zero")
def test_identity_property():
    rng = random.Random(3)
    start = time.perf_counter()
    sizes = []
    for _ in range(200):
        kb = random_kb(rng, max_elements=100, max_depth=3)
        assert validate(kb) == []
        assert max((kb.depth(i) for i in kb.ids()), default=0) <= 3
        assert diff(kb, kb).records == ()
        table = eval_history([kb, kb])
        assert all(r.counts() == ZERO for r in table.rows.values())
        sizes.append(len(kb))
    elapsed = time.perf_counter() - start
    assert max(sizes) > 80
    assert elapsed < 5.0


@pytest.mark.acceptance(4, "edit-script oracle: 500 trials, exact per-element counts")
def test_edit_script_oracle():
    rng = random.Random(4)
    start = time.perf_counter()
    seen_ops: Counter = Counter()
    for trial in range(500):
        versions = [random_kb(rng, max_elements=60, max_depth=3)]
        expected: dict[str, Counter] = {}
        for step in range(rng.randint(1, 3)):
            script = random_script(rng, versions[-1], rng.randint(1, 12), fresh=f"s{step}x")
            seen_ops.update(e.op for e in script)
            new = apply_script(versions[-1], script, version=f"v{step + 2}")
            assert validate(new) == []
            report = diff(versions[-1], new)
            assert len(report) == len(script)
            assert sorted(r.change.value.lower() for r in report) == sorted(CATEGORY[e.op] for e in script)
            for ident, c in expected_counts(script, new).items():
                expected.setdefault(ident, Counter()).update(c)
            versions.append(new)
        table = eval_history(versions)
        for ident in set(table.rows) | set(expected):
            want = expected.get(ident, Counter())
            assert table[ident].counts() == (want["add"], want["del"], want["mod"]), (trial, ident)
    elapsed = time.perf_counter() - start
    assert set(seen_ops) == set(CATEGORY)
    assert elapsed < 30.0


def _sum_rows(*tables) -> dict[str, tuple[float, float, float]]:
    out: dict[str, list[float]] = {}
    for table in tables:
        for ident, row in table.rows.items():
            acc = out.setdefault(ident, [0.0, 0.0, 0.0])
            for k, v in enumerate(row.counts()):
                acc[k] += v
    return {i: tuple(v) for i, v in out.items()}


@pytest.mark.acceptance(5, "aggregation consistency and 3-version additivity")
def test_aggregation_and_additivity():
    rng = random.Random(5)
    contexts_checked = 0
    for _ in range(200):
        v1 = random_kb(rng, max_elements=60, max_depth=3)
        v2 = apply_script(v1, random_script(rng, v1, 10, fresh="a"), version="v2")
        v3 = apply_script(v2, random_script(rng, v2, 10, fresh="b"), version="v3")
        first = eval_pair(diff(v1, v2), v2)
        second = eval_pair(diff(v2, v3), v3)
        history = eval_history([v1, v2, v3])
        assert {i: r.counts() for i, r in history.rows.items()} == _sum_rows(first, second)

        agg = aggregate(history, v3)
        for ctx in v3.contexts():
            want = [0.0, 0.0, 0.0]
            for member in containment_closure(v3, ctx):
                for k, v in enumerate(history[member].counts()):
                    want[k] += v
            assert agg[ctx].counts() == tuple(want)
            contexts_checked += 1
        grand = [0.0, 0.0, 0.0]
        for row in history.rows.values():
            for k, v in enumerate(row.counts()):
                grand[k] += v
        assert agg[GRAPH].counts() == tuple(grand)
        assert all(agg[i] == history[i] for i in history.rows if i not in v3.contexts())
    assert contexts_checked > 100


@pytest.mark.acceptance(6, "round-trip and canonical serialization on 200 kbs")
def test_round_trip_and_canonical():
    rng = random.Random(6)
    for _ in range(200):
        kb = random_kb(rng, max_elements=100, max_depth=3)
        data = serialize_kb(kb)
        assert parse_kb(data) == kb
        # same structure assembled in a shuffled insertion order
        elements = list(kb.elements)
        arcs = kb.arcs()
        rng.shuffle(elements)
        rng.shuffle(arcs)
        twin = rebuild(kb.version_label, elements, {i: kb.parent_of(i) for i in kb.ids()}, arcs)
        assert twin == kb
        assert serialize_kb(twin) == data


@pytest.mark.acceptance(7, "presentation blindness over 100 perturbations")
def test_presentation_blindness():
    rng = random.Random(7)
    changed = 0
    for _ in range(100):
        kb = random_kb(rng, max_elements=60, max_depth=3)
        moved = perturb_presentation(rng, kb)
        changed += moved != kb
        assert diff(kb, moved).records == ()
        table = eval_history([kb, moved])
        assert all(r.counts() == ZERO for r in table.rows.values())
    assert changed > 90


@pytest.mark.acceptance(8, "rendering determinism and mod-criterion monotonicity")
def test_rendering(v1, v2):
    start = time.perf_counter()
    table = eval_history([v1, v2])
    for criterion in (None, "add", "del", "mod"):
        svg = render_svg(v2, table, criterion)
        assert all(render_svg(v2, table, criterion) == svg for _ in range(3))
        dot = render_dot(v2, table, criterion)
        assert render_dot(v2, table, criterion) == dot

    fills = plan(v2, table, "mod").fills
    picture = containment_closure(v2, "cn11")
    assert {i for i, c in fills.items() if c.lightness > 0.30} == picture
    for i, c in fills.items():
        if i not in picture:
            assert c.lightness == 0.30
    for x in fills:
        for y in fills:
            if table[x].mod > table[y].mod:
                assert fills[x].lightness > fills[y].lightness
    top = max(table[i].mod for i in fills)
    lightest = max(c.lightness for c in fills.values())
    assert all(fills[i].lightness == lightest for i in fills if table[i].mod == top)

    # the SVG carries the same lightness values
    svg = render_svg(v2, table, "mod").decode()
    drawn = dict(re.findall(r'cg:id="([^"]+)" cg:lightness="([^"]+)"', svg))
    assert {i: float(v) for i, v in drawn.items()} == {i: c.lightness for i, c in fills.items()}
    assert time.perf_counter() - start < 1.0
