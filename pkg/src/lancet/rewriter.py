"""Source-to-source simplification of the analyzed programs.

Five rewrite rules remove syntax that complicates flow analysis:

1. ComprehensionUnfolding - ``lst = [e for i in it]`` becomes an empty
   container plus an explicit accumulation loop (list/set/dict only;
   generator expressions stay lazy and are left alone).
2. NestedCallHandling - a call argument that is itself a call is hoisted
   into a fresh temporary, preserving call evaluation order.
3. SubscriptionAssignment - ``x = f()[1:10]`` hoists the call before the
   subscript.
4. LambdaConversion - ``x = lambda a: a + 10`` becomes
   ``def x(a): return a + 10`` at the same position.
5. CallChainSplitting - ``f1().f2().f3()`` is split into one statement per
   chain link, each receiver bound to a fresh temporary.

Rules are applied to a fixpoint by :func:`simplify_module`; each rule's
output never re-matches the rule itself, so the process terminates.
Temporaries come from :class:`TempNamer`, which avoids every identifier
already present in the module.

Rule ids above 5 are reserved for registered extensions (see
:func:`register_rule`).
"""

from __future__ import annotations

import ast
import copy
from dataclasses import dataclass, field
from typing import Callable

from .frontend import parse_module, unparse, walk

__all__ = [
    "RewriteRule",
    "TempNamer",
    "TransformHook",
    "TransformHookError",
    "FixpointError",
    "RULES",
    "register_rule",
    "apply_rule",
    "simplify_module",
    "simplify_source",
    "run_transforms",
    "refine_call_chains",
]

TEMP_PREFIX = "_ret"

# Per-pass rewrite budget; a rule that keeps matching its own output would
# otherwise spin inside one pass.
_MAX_PASSES = 100
_MAX_REWRITES_PER_PASS = 10_000


class FixpointError(Exception):
    """Simplification failed to reach a fixpoint (a rule bug, not user error)."""


class TransformHookError(Exception):
    """A user transform hook raised; carries the hook's name."""

    def __init__(self, hook_name: str, cause: BaseException) -> None:
        self.hook_name = hook_name
        super().__init__(f"transform hook {hook_name!r} failed: {cause}")


@dataclass
class TempNamer:
    """Generates `_ret`, `_ret_1`, ... temporaries that collide with nothing.

    ``forbidden`` starts as the set of identifiers bound or referenced in the
    module under rewrite; every emitted name is added to it.
    """

    forbidden: set[str] = field(default_factory=set)
    counter: int = 0

    @classmethod
    def for_module(cls, module: ast.Module) -> "TempNamer":
        return cls(forbidden=collect_identifiers(module))

    def fresh(self) -> str:
        while True:
            name = TEMP_PREFIX if self.counter == 0 else f"{TEMP_PREFIX}_{self.counter}"
            self.counter += 1
            if name not in self.forbidden:
                self.forbidden.add(name)
                return name


def collect_identifiers(module: ast.AST) -> set[str]:
    """Every identifier bound or used anywhere in the tree."""
    names: set[str] = set()
    for node in walk(module):
        if isinstance(node, ast.Name):
            names.add(node.id)
        elif isinstance(node, (ast.FunctionDef, ast.ClassDef)):
            names.add(node.name)
        elif isinstance(node, ast.arg):
            names.add(node.arg)
        elif isinstance(node, ast.alias):
            names.add(node.asname or node.name.split(".")[0])
        elif isinstance(node, (ast.Global, ast.Nonlocal)):
            names.update(node.names)
    return names


@dataclass(frozen=True)
class RewriteRule:
    id: int
    name: str
    matcher: Callable[[ast.stmt], bool]
    builder: Callable[[ast.stmt, TempNamer], list[ast.stmt]]


@dataclass(frozen=True)
class TransformHook:
    """A named module-to-module callback run by :func:`run_transforms`."""

    name: str
    callback: Callable[[ast.Module], ast.Module]


# ---------------------------------------------------------------------------
# Rule 1: comprehension unfolding


def _match_comprehension(stmt: ast.stmt) -> bool:
    return (
        isinstance(stmt, ast.Assign)
        and len(stmt.targets) == 1
        and isinstance(stmt.targets[0], ast.Name)
        and isinstance(stmt.value, (ast.ListComp, ast.SetComp, ast.DictComp))
    )


def _build_comprehension(stmt: ast.stmt, namer: TempNamer) -> list[ast.stmt]:
    assert isinstance(stmt, ast.Assign)
    target = stmt.targets[0]
    assert isinstance(target, ast.Name)
    comp = stmt.value

    if isinstance(comp, ast.ListComp):
        init_value: ast.expr = ast.List(elts=[], ctx=ast.Load())
        accumulate: ast.stmt = ast.Expr(
            value=ast.Call(
                func=ast.Attribute(value=_load(target.id), attr="append", ctx=ast.Load()),
                args=[comp.elt],
                keywords=[],
            )
        )
    elif isinstance(comp, ast.SetComp):
        init_value = ast.Call(func=_load("set"), args=[], keywords=[])
        accumulate = ast.Expr(
            value=ast.Call(
                func=ast.Attribute(value=_load(target.id), attr="add", ctx=ast.Load()),
                args=[comp.elt],
                keywords=[],
            )
        )
    else:
        assert isinstance(comp, ast.DictComp)
        init_value = ast.Dict(keys=[], values=[])
        accumulate = ast.Assign(
            targets=[
                ast.Subscript(value=_load(target.id), slice=comp.key, ctx=ast.Store())
            ],
            value=comp.value,
        )

    body: ast.stmt = accumulate
    for gen in reversed(comp.generators):
        for test in reversed(gen.ifs):
            body = ast.If(test=test, body=[body], orelse=[])
        body = ast.For(target=gen.target, iter=gen.iter, body=[body], orelse=[])

    init = ast.Assign(targets=[ast.Name(id=target.id, ctx=ast.Store())], value=init_value)
    return _locate([init, body], stmt)


# ---------------------------------------------------------------------------
# Rule 2: nested call handling


def _hoistable_call_arg(call: ast.Call) -> int | None:
    """Index (args, then keywords) of the first argument safe to hoist.

    An argument call is hoisted only when neither the callee expression nor
    any earlier argument contains a call, so call evaluation order is
    preserved exactly.  Callee-side calls are chain links; rule 5 removes
    them first.
    """
    if any(isinstance(n, ast.Call) for n in walk(call.func)):
        return None
    flat: list[ast.expr] = list(call.args) + [kw.value for kw in call.keywords]
    for i, arg in enumerate(flat):
        if isinstance(arg, ast.Call):
            return i
        if any(isinstance(n, ast.Call) for n in walk(arg)):
            return None
    return None


def _nested_call_site(stmt: ast.stmt) -> ast.Call | None:
    value = _stmt_value(stmt)
    if isinstance(value, ast.Call) and _hoistable_call_arg(value) is not None:
        return value
    return None


def _match_nested_call(stmt: ast.stmt) -> bool:
    return _is_simple_carrier(stmt) and _nested_call_site(stmt) is not None


def _build_nested_call(stmt: ast.stmt, namer: TempNamer) -> list[ast.stmt]:
    new_stmt = copy.deepcopy(stmt)
    call = _nested_call_site(new_stmt)
    assert call is not None
    index = _hoistable_call_arg(call)
    assert index is not None
    flat: list[ast.expr] = list(call.args) + [kw.value for kw in call.keywords]
    inner = flat[index]
    temp = namer.fresh()
    if index < len(call.args):
        call.args[index] = _load(temp)
    else:
        call.keywords[index - len(call.args)].value = _load(temp)
    hoisted = ast.Assign(targets=[ast.Name(id=temp, ctx=ast.Store())], value=inner)
    return _locate([hoisted, new_stmt], stmt)


# ---------------------------------------------------------------------------
# Rule 3: subscripted call results


def _match_subscript_call(stmt: ast.stmt) -> bool:
    if not isinstance(stmt, (ast.Assign, ast.Return)):
        return False
    value = _stmt_value(stmt)
    return (
        isinstance(value, ast.Subscript)
        and isinstance(value.value, ast.Call)
    )


def _build_subscript_call(stmt: ast.stmt, namer: TempNamer) -> list[ast.stmt]:
    new_stmt = copy.deepcopy(stmt)
    sub = _stmt_value(new_stmt)
    assert isinstance(sub, ast.Subscript)
    inner = sub.value
    temp = namer.fresh()
    sub.value = _load(temp)
    hoisted = ast.Assign(targets=[ast.Name(id=temp, ctx=ast.Store())], value=inner)
    return _locate([hoisted, new_stmt], stmt)


# ---------------------------------------------------------------------------
# Rule 4: lambda-to-def conversion


def _match_lambda(stmt: ast.stmt) -> bool:
    return (
        isinstance(stmt, ast.Assign)
        and len(stmt.targets) == 1
        and isinstance(stmt.targets[0], ast.Name)
        and isinstance(stmt.value, ast.Lambda)
    )


def _build_lambda(stmt: ast.stmt, namer: TempNamer) -> list[ast.stmt]:
    assert isinstance(stmt, ast.Assign)
    target = stmt.targets[0]
    assert isinstance(target, ast.Name)
    lam = stmt.value
    assert isinstance(lam, ast.Lambda)
    fn = ast.FunctionDef(
        name=target.id,
        args=copy.deepcopy(lam.args),
        body=[ast.Return(value=copy.deepcopy(lam.body))],
        decorator_list=[],
        returns=None,
        type_comment=None,
    )
    return _locate([fn], stmt)


# ---------------------------------------------------------------------------
# Rule 5: call chain splitting


def _chain_value(stmt: ast.stmt) -> ast.Call | None:
    value = _stmt_value(stmt)
    if (
        isinstance(value, ast.Call)
        and isinstance(value.func, ast.Attribute)
        and isinstance(value.func.value, ast.Call)
    ):
        return value
    return None


def _match_call_chain(stmt: ast.stmt) -> bool:
    return _is_simple_carrier(stmt) and _chain_value(stmt) is not None


def _build_call_chain(stmt: ast.stmt, namer: TempNamer) -> list[ast.stmt]:
    new_stmt = copy.deepcopy(stmt)
    top = _chain_value(new_stmt)
    assert top is not None

    # Walk down the chain spine; `segments` ends up outermost-last.
    segments: list[ast.Call] = []
    cur: ast.expr = top
    while (
        isinstance(cur, ast.Call)
        and isinstance(cur.func, ast.Attribute)
        and isinstance(cur.func.value, ast.Call)
    ):
        segments.append(cur)
        cur = cur.func.value
    segments.reverse()

    out: list[ast.stmt] = []
    receiver = namer.fresh()
    out.append(ast.Assign(targets=[ast.Name(id=receiver, ctx=ast.Store())], value=cur))
    for seg in segments[:-1]:
        assert isinstance(seg.func, ast.Attribute)
        call = ast.Call(
            func=ast.Attribute(value=_load(receiver), attr=seg.func.attr, ctx=ast.Load()),
            args=seg.args,
            keywords=seg.keywords,
        )
        receiver = namer.fresh()
        out.append(ast.Assign(targets=[ast.Name(id=receiver, ctx=ast.Store())], value=call))

    last = segments[-1]
    assert isinstance(last.func, ast.Attribute)
    last.func.value = _load(receiver)
    out.append(new_stmt)
    return _locate(out, stmt)


# ---------------------------------------------------------------------------
# Shared helpers and the rule table


def _load(name: str) -> ast.Name:
    return ast.Name(id=name, ctx=ast.Load())


def _is_simple_carrier(stmt: ast.stmt) -> bool:
    """Statements whose single value expression we may rewrite in place."""
    if isinstance(stmt, ast.Assign):
        return len(stmt.targets) == 1
    return isinstance(stmt, (ast.Expr, ast.Return))


def _stmt_value(stmt: ast.stmt) -> ast.expr | None:
    if isinstance(stmt, ast.Assign):
        return stmt.value
    if isinstance(stmt, (ast.Expr, ast.Return)):
        return stmt.value
    return None


def _locate(stmts: list[ast.stmt], origin: ast.stmt) -> list[ast.stmt]:
    for s in stmts:
        ast.copy_location(s, origin)
        ast.fix_missing_locations(s)
    return stmts


RULES: list[RewriteRule] = [
    RewriteRule(1, "ComprehensionUnfolding", _match_comprehension, _build_comprehension),
    RewriteRule(2, "NestedCallHandling", _match_nested_call, _build_nested_call),
    RewriteRule(3, "SubscriptionAssignment", _match_subscript_call, _build_subscript_call),
    RewriteRule(4, "LambdaConversion", _match_lambda, _build_lambda),
    RewriteRule(5, "CallChainSplitting", _match_call_chain, _build_call_chain),
]


def register_rule(rule: RewriteRule) -> None:
    """Add an extension rule (id must be 6 or higher and unused)."""
    if rule.id <= 5:
        raise ValueError("rule ids 1..5 are reserved for the built-in rules")
    if any(r.id == rule.id for r in RULES):
        raise ValueError(f"rule id {rule.id} already registered")
    RULES.append(rule)
    RULES.sort(key=lambda r: r.id)


def apply_rule(rule: RewriteRule, stmt: ast.stmt, namer: TempNamer) -> list[ast.stmt]:
    """Apply one rule to a statement its matcher accepts."""
    if not rule.matcher(stmt):
        raise ValueError(f"rule {rule.id} ({rule.name}) does not match this statement")
    return rule.builder(stmt, namer)


_BODY_FIELDS = ("body", "orelse")


def _rewrite_block(stmts: list[ast.stmt], namer: TempNamer, rules: list[RewriteRule],
                   budget: list[int]) -> tuple[list[ast.stmt], int]:
    """One scan of a statement list; produced statements are re-examined."""
    out = list(stmts)
    changed = 0
    i = 0
    while i < len(out):
        stmt = out[i]
        for fname in _BODY_FIELDS:
            inner = getattr(stmt, fname, None)
            if isinstance(inner, list) and inner and isinstance(inner[0], ast.stmt):
                new_inner, n = _rewrite_block(inner, namer, rules, budget)
                setattr(stmt, fname, new_inner)
                changed += n
        fired = False
        for rule in rules:
            if rule.matcher(stmt):
                replacement = rule.builder(stmt, namer)
                out[i : i + 1] = replacement
                changed += 1
                budget[0] -= 1
                if budget[0] <= 0:
                    raise FixpointError(
                        "rewrite did not settle; a rule keeps matching its own output"
                    )
                fired = True
                break
        if not fired:
            i += 1
    return out, changed


def simplify_module(module: ast.Module, rules: list[RewriteRule] | None = None) -> ast.Module:
    """Rewrite a module until no rule matches anywhere.

    The input tree is not modified.  Raises :class:`FixpointError` if the
    rules fail to settle within the pass limit.
    """
    active = RULES if rules is None else rules
    result = copy.deepcopy(module)
    namer = TempNamer.for_module(result)
    for _ in range(_MAX_PASSES):
        budget = [_MAX_REWRITES_PER_PASS]
        result.body, changed = _rewrite_block(result.body, namer, active, budget)
        if not changed:
            ast.fix_missing_locations(result)
            return result
    raise FixpointError(f"no fixpoint after {_MAX_PASSES} passes")


def simplify_source(text: str, path: str = "<string>") -> str:
    """Convenience wrapper: parse, simplify, unparse."""
    return unparse(simplify_module(parse_module(text, path)))


def run_transforms(module: ast.Module, hooks: list[TransformHook]) -> ast.Module:
    """Run user hooks in registration order, each seeing the previous output."""
    current = module
    for hook in hooks:
        try:
            current = hook.callback(current)
        except Exception as exc:
            raise TransformHookError(hook.name, exc) from exc
        if not isinstance(current, ast.Module):
            raise TransformHookError(
                hook.name, TypeError(f"hook returned {type(current).__name__}, expected Module")
            )
    return current


def refine_call_chains(
    module: ast.Module, return_types: dict[str, str] | None = None
) -> ast.Module:
    """Split chained attribute calls into one statement per link.

    The split is purely syntactic and always safe, so it is applied to every
    chain whether or not the receiver's return type is known; ``return_types``
    (callable FQN -> type name) is accepted so callers can re-run this step as
    analysis results accumulate, and richer maps keep the output stable:
    already-split code is a fixpoint.
    """
    del return_types  # reserved for callers' iterative refinement loops
    chain_rule = [r for r in RULES if r.id == 5]
    return simplify_module(module, rules=chain_rule)
