"""Differential fuzzing: analyses vs. actual execution.

Two seeded generators produce executable programs; the tests compare the
library's view of them against what really happens when they run.  Seeds are
fixed so failures reproduce.
"""

from __future__ import annotations

import io
import random
from contextlib import redirect_stdout

from lancet.cfg import build_from_source
from lancet.frontend import parse_module, unparse
from lancet.rewriter import simplify_module
from lancet.ssa import compute_ssa, fold_constants

INT_NAMES = ("a", "b", "c")


def _gen_executable(rng: random.Random) -> str:
    lines = [
        "def f(v):",
        "    return v * 2 + 1",
        "def g(v):",
        "    return v - 3",
        "s = 'seed'",
    ]
    for name in INT_NAMES:
        lines.append(f"{name} = {rng.randint(-5, 9)}")
    indent = ""
    open_blocks = 0
    for _ in range(rng.randint(3, 10)):
        kind = rng.randint(0, 9)
        n = rng.choice(INT_NAMES)
        m = rng.choice(INT_NAMES)
        if kind <= 2:
            expr = rng.choice(
                [
                    f"{m} + {rng.randint(0, 5)}",
                    f"f({m})",
                    f"f(g({m}))",
                    f"g(f({m})) * 2",
                    f"{m} * {rng.randint(-2, 3)}",
                ]
            )
            lines.append(f"{indent}{n} = {expr}")
        elif kind == 3:
            lines.append(f"{indent}{n} += f({m})")
        elif kind == 4:
            lines.append(f"{indent}print({n})")
        elif kind == 5:
            lines.append(f"{indent}lst = [f(i) + {m} for i in range({rng.randint(0, 4)})]")
            lines.append(f"{indent}print(lst)")
            lines.append(f"{indent}{n} = sum(lst)")
        elif kind == 6:
            lines.append(f"{indent}txt = s.strip().upper()")
            lines.append(f"{indent}print(txt)")
            lines.append(f"{indent}{n} = len(txt)")
        elif kind == 7:
            lines.append(f"{indent}inc = lambda v: v + {rng.randint(1, 3)}")
            lines.append(f"{indent}{n} = inc({m})")
        elif kind == 8 and open_blocks < 2:
            lines.append(f"{indent}if {n} > {m}:")
            indent += "    "
            open_blocks += 1
            lines.append(f"{indent}{n} = g({n})")
        else:
            lines.append(f"{indent}for i in range({rng.randint(1, 3)}):")
            lines.append(f"{indent}    {n} = {n} + f(i)")
    lines.append("print(a, b, c)")
    return "\n".join(lines) + "\n"


def _run(source: str) -> str:
    buffer = io.StringIO()
    with redirect_stdout(buffer):
        exec(compile(source, "<differential>", "exec"), {"__name__": "__main__"})
    return buffer.getvalue()


def test_simplification_preserves_behavior_on_generated_programs():
    rng = random.Random(0xC0FFEE)
    for trial in range(120):
        source = _gen_executable(rng)
        rewritten = unparse(simplify_module(parse_module(source)))
        assert _run(source) == _run(rewritten), f"trial {trial}\n{source}\n---\n{rewritten}"


def _gen_straight_line(rng: random.Random) -> str:
    lines: list[str] = []
    defined: list[str] = []
    for _ in range(rng.randint(2, 12)):
        name = rng.choice("pqrstu")
        if not defined or rng.random() < 0.3:
            lines.append(f"{name} = {rng.randint(-4, 9)}")
        else:
            x = rng.choice(defined)
            y = rng.choice(defined)
            op = rng.choice(["+", "-", "*", "//", "%", "**"])
            rhs = rng.choice(
                [
                    f"{x} {op} {rng.randint(1, 5)}",
                    f"{x} + {y}",
                    f"-{x}",
                    f"{x} > {y}",
                    f"{x} and {y}",
                    f"{x} or {rng.randint(0, 3)}",
                ]
            )
            lines.append(f"{name} = {rhs}")
        defined.append(name)
    return "\n".join(lines) + "\n"


def test_folding_matches_execution_on_generated_straight_line_programs():
    rng = random.Random(0xBEEF)
    checked = 0
    for _ in range(120):
        source = _gen_straight_line(rng)
        cfg = build_from_source("m", source)
        use_map, const = compute_ssa(cfg)
        folded = fold_constants(const, use_map)
        module_globals: dict = {}
        try:
            exec(compile(source, "<fold>", "exec"), module_globals)
        except Exception:
            continue  # runtime fault (e.g. huge power); folding flags these
        last: dict[str, int] = {}
        for name, version in folded.entries:
            last[name] = max(last.get(name, -1), version)
        for name, version in last.items():
            entry = folded[(name, version)]
            assert entry.is_folded, (source, name, version)
            assert entry.folded_value() == module_globals[name], (source, name)
            checked += 1
    assert checked > 100
