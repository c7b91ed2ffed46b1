from __future__ import annotations

import ast

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lancet.frontend import parse_module, trees_equal, unparse, walk
from lancet.rewriter import (
    RULES,
    FixpointError,
    RewriteRule,
    TempNamer,
    TransformHook,
    TransformHookError,
    apply_rule,
    collect_identifiers,
    refine_call_chains,
    run_transforms,
    simplify_module,
    simplify_source,
)

from helpers import alpha_equal, corpus_files
from strategies import programs

SIMPLIFICATION_CASES = [
    (
        "lst = [i for i in range(N)]",
        "lst = []\nfor i in range(N):\n    lst.append(i)\n",
    ),
    (
        "x = funA(funB())",
        "_ret = funB()\nx = funA(_ret)\n",
    ),
    (
        "x = funA()[1:10]",
        "_ret = funA()\nx = _ret[1:10]\n",
    ),
    (
        "fun = lambda x: x + 1",
        "def fun(x):\n    return x + 1\n",
    ),
    (
        "f1().f2().f3()",
        "_ret = f1()\n_ret_1 = _ret.f2()\n_ret_1.f3()\n",
    ),
    (
        "x = lambda a: a + 10",
        "def x(a):\n    return a + 10\n",
    ),
]


@pytest.mark.parametrize("source,expected", SIMPLIFICATION_CASES)
def test_simplification_golden_cases(source, expected):
    assert alpha_equal(simplify_source(source), expected)


def test_nested_calls_hoist_innermost_first():
    result = simplify_source("x = funA(funB(funC()))")
    lines = result.strip().splitlines()
    assert len(lines) == 3
    # The innermost call is evaluated first and the original target last.
    assert "funC()" in lines[0]
    assert lines[2].startswith("x = funA(")


def test_module_without_matches_is_unchanged():
    source = "a = 1\nb = a + 2\nif b > 2:\n    print(b)\n"
    tree = parse_module(source)
    assert trees_equal(simplify_module(tree), tree)


def test_lambda_in_function_body_becomes_nested_def():
    result = simplify_source("def wrap():\n    f = lambda y: y * 2\n    return f(4)\n")
    tree = parse_module(result)
    outer = tree.body[0]
    assert isinstance(outer, ast.FunctionDef)
    inner = outer.body[0]
    assert isinstance(inner, ast.FunctionDef) and inner.name == "f"


def test_simplify_is_idempotent_on_corpus():
    for path in corpus_files("rewrite", "programs"):
        tree = parse_module(path.read_text(encoding="utf-8"), str(path))
        once = simplify_module(tree)
        twice = simplify_module(once)
        assert trees_equal(once, twice), path.name


def test_fixpoint_reached_on_corpus():
    for path in corpus_files("rewrite", "programs"):
        tree = parse_module(path.read_text(encoding="utf-8"), str(path))
        simplified = simplify_module(tree)
        for node in walk(simplified):
            if isinstance(node, ast.stmt):
                for rule in RULES:
                    assert not rule.matcher(node), (path.name, rule.name)


def test_temporaries_never_shadow_existing_names():
    source = "_ret = 1\n_ret_1 = 2\nx = funA(funB(_ret))\ny = funC(funD())\n"
    tree = parse_module(source)
    original = collect_identifiers(tree)
    simplified = simplify_module(tree)
    introduced = collect_identifiers(simplified) - original
    assert introduced
    assert not introduced & original
    # Old names survive untouched.
    assert {"_ret", "_ret_1"} <= collect_identifiers(simplified)


def test_evaluation_order_guard_blocks_unsafe_hoists():
    # funB() inside the first argument must run before funC(); no rule may
    # reorder them, so the statement is left alone.
    source = "x = funA(g + funB(), funC())\n"
    assert simplify_source(source) == source


def test_chains_inside_arguments_settle():
    result = simplify_source("x = funA(funB().m())")
    tree = parse_module(result)
    for node in walk(tree):
        if isinstance(node, ast.stmt):
            for rule in RULES:
                assert not rule.matcher(node)


def test_apply_rule_rejects_non_matching_statement():
    stmt = parse_module("x = 1").body[0]
    with pytest.raises(ValueError):
        apply_rule(RULES[0], stmt, TempNamer())


def test_simplify_raises_on_non_terminating_rule():
    bad = RewriteRule(
        id=99,
        name="KeepsMatching",
        matcher=lambda stmt: isinstance(stmt, ast.Pass),
        builder=lambda stmt, namer: [ast.Pass(), ast.Pass()],
    )
    with pytest.raises(FixpointError):
        simplify_module(parse_module("pass"), rules=[bad])


def test_run_transforms_identity_and_order():
    tree = parse_module("a = 1")
    assert run_transforms(tree, []) is tree

    order: list[str] = []

    def mk(name):
        def hook(module):
            order.append(name)
            return module

        return TransformHook(name, hook)

    run_transforms(tree, [mk("first"), mk("second")])
    assert order == ["first", "second"]


def test_run_transforms_rename_hook():
    class Rename(ast.NodeTransformer):
        def visit_Name(self, node):
            if node.id == "a":
                node.id = "b"
            return node

    tree = parse_module("a = 1")
    result = run_transforms(tree, [TransformHook("rename", lambda m: Rename().visit(m))])
    assert unparse(result) == "b = 1\n"


def test_run_transforms_wraps_hook_failures():
    def boom(module):
        raise RuntimeError("kaput")

    with pytest.raises(TransformHookError) as exc:
        run_transforms(parse_module("a = 1"), [TransformHook("boom", boom)])
    assert exc.value.hook_name == "boom"
    assert "kaput" in str(exc.value)


def test_run_transforms_rejects_non_module_results():
    with pytest.raises(TransformHookError):
        run_transforms(parse_module("a = 1"), [TransformHook("wrong", lambda m: 42)])


def test_refine_call_chains_without_types_still_splits():
    tree = parse_module("f1().f2().f3()")
    result = refine_call_chains(tree, return_types={})
    assert len(result.body) == 3


def test_refine_call_chains_is_a_fixpoint_on_split_code():
    tree = parse_module("_x = f1()\n_y = _x.f2()\n_y.f3()\n")
    result = refine_call_chains(tree, return_types={"m.f1": "Thing"})
    assert trees_equal(result, tree)


def test_refine_call_chains_two_chains_distinct_temps():
    source = "def run():\n    a().b().c()\n    d().e().f()\n"
    result = refine_call_chains(parse_module(source))
    fn = result.body[0]
    assert len(fn.body) == 6
    temps = [
        s.targets[0].id
        for s in fn.body
        if isinstance(s, ast.Assign) and isinstance(s.targets[0], ast.Name)
    ]
    assert len(temps) == len(set(temps)) == 4


def test_temp_namer_sequence_and_collisions():
    namer = TempNamer(forbidden={"_ret", "_ret_2"})
    assert namer.fresh() == "_ret_1"
    assert namer.fresh() == "_ret_3"


@settings(max_examples=40, deadline=None)
@given(st.sets(st.sampled_from(["_ret", "_ret_1", "_ret_2", "_ret_3", "x"]), max_size=5))
def test_temp_namer_never_collides(forbidden):
    namer = TempNamer(forbidden=set(forbidden))
    produced = [namer.fresh() for _ in range(4)]
    assert len(set(produced)) == 4
    assert not set(produced) & forbidden


@settings(max_examples=40, deadline=None)
@given(programs())
def test_generated_programs_simplify_to_a_fixpoint(source):
    tree = parse_module(source)
    simplified = simplify_module(tree)
    # Output reparses and is stable under a second pass.
    reparsed = parse_module(unparse(simplified))
    assert trees_equal(simplified, reparsed)
    assert trees_equal(simplify_module(simplified), simplified)
    for node in walk(simplified):
        if isinstance(node, ast.stmt):
            for rule in RULES:
                assert not rule.matcher(node)
