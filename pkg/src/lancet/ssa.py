"""SSA numbering, constant folding, and alias pairs over a CFG.

Merges are kept implicit: instead of materialized phi statements, every use
records the *set* of versions that reach it, so a variable read after an
if/else merge shows up as e.g. ``{'a': {1, 2}}``.  Versions are numbered
0, 1, 2, ... per variable, in the order definitions are encountered on a
reverse-post-order walk of the blocks (statement order within a block).

Scope rules: names are local to the CFG being analyzed (module level or a
single function); attribute and subscript stores are not versioned, and
bindings other than plain assignments (``def``, ``class``, imports) are not
tracked here.  ``x += e`` is both a use of the old versions and a new
definition.
"""

from __future__ import annotations

import ast
import operator
from dataclasses import dataclass, field, replace
from typing import Iterator

from .cfg import Block, Cfg, head_exprs

__all__ = [
    "DefValue",
    "ConstDict",
    "SsaUseMap",
    "AliasPair",
    "compute_ssa",
    "fold_constants",
    "alias_pairs",
    "to_json_dict",
]

_UNFOLDED = object()

KIND_LITERAL = "literal"
KIND_NAME = "name-reference"
KIND_ARITHMETIC = "arithmetic"
KIND_CALL = "call"
KIND_OTHER = "other"
KIND_UNKNOWN = "unknown"


@dataclass
class DefValue:
    """The right-hand side of one (name, version) definition.

    ``site`` is the (block id, statement index) of the defining statement,
    which is where the expression's free variables are resolved when folding.
    """

    expr: ast.expr | None
    kind: str
    site: tuple[int, int]
    folded: object = _UNFOLDED
    fold_failed: bool = False

    @property
    def is_folded(self) -> bool:
        return self.folded is not _UNFOLDED

    def folded_value(self) -> object:
        if not self.is_folded:
            raise ValueError("definition is not folded to a constant")
        return self.folded


@dataclass
class ConstDict:
    """(variable name, version) -> defining value, one entry per version."""

    entries: dict[tuple[str, int], DefValue] = field(default_factory=dict)

    def __getitem__(self, key: tuple[str, int]) -> DefValue:
        return self.entries[key]

    def __contains__(self, key: tuple[str, int]) -> bool:
        return key in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def items(self) -> Iterator[tuple[tuple[str, int], DefValue]]:
        return iter(sorted(self.entries.items()))


@dataclass
class SsaUseMap:
    """Per block, one dict per statement: variable -> reaching version set."""

    per_block: dict[int, list[dict[str, set[int]]]] = field(default_factory=dict)

    def __getitem__(self, block_id: int) -> list[dict[str, set[int]]]:
        return self.per_block[block_id]


@dataclass(frozen=True)
class AliasPair:
    """``alias`` was defined as a bare copy of ``target``."""

    alias: tuple[str, int]
    target: str


# ---------------------------------------------------------------------------
# Definition / use extraction


def _classify(expr: ast.expr | None) -> str:
    if expr is None:
        return KIND_UNKNOWN
    if isinstance(expr, ast.Constant):
        return KIND_LITERAL
    if isinstance(expr, ast.Name):
        return KIND_NAME
    if isinstance(expr, (ast.BinOp, ast.UnaryOp, ast.BoolOp, ast.Compare)):
        return KIND_ARITHMETIC
    if isinstance(expr, ast.Call):
        return KIND_CALL
    return KIND_OTHER


def _unpack(target: ast.expr, value: ast.expr | None) -> list[tuple[str, ast.expr | None]]:
    """(name, defining expr) pairs bound by one assignment target."""
    if isinstance(target, ast.Name):
        return [(target.id, value)]
    if isinstance(target, (ast.Tuple, ast.List)):
        elementwise = (
            isinstance(value, (ast.Tuple, ast.List))
            and len(value.elts) == len(target.elts)
            and not any(isinstance(e, ast.Starred) for e in target.elts)
            and not any(isinstance(e, ast.Starred) for e in value.elts)
        )
        out: list[tuple[str, ast.expr | None]] = []
        for i, elt in enumerate(target.elts):
            if isinstance(elt, ast.Starred):
                elt = elt.value
            out.extend(_unpack(elt, value.elts[i] if elementwise else None))
        return out
    # Attribute / subscript stores are not versioned.
    return []


def _definitions(stmt: ast.stmt) -> list[tuple[str, ast.expr | None, str]]:
    if isinstance(stmt, ast.Assign):
        pairs: list[tuple[str, ast.expr | None]] = []
        for target in stmt.targets:
            pairs.extend(_unpack(target, stmt.value))
        return [(name, expr, _classify(expr)) for name, expr in pairs]
    if isinstance(stmt, ast.AugAssign) and isinstance(stmt.target, ast.Name):
        combined = ast.BinOp(
            left=ast.Name(id=stmt.target.id, ctx=ast.Load()),
            op=stmt.op,
            right=stmt.value,
        )
        ast.copy_location(combined, stmt)
        ast.fix_missing_locations(combined)
        return [(stmt.target.id, combined, KIND_ARITHMETIC)]
    if isinstance(stmt, ast.For):
        return [(name, None, KIND_UNKNOWN) for name, _ in _unpack(stmt.target, None)]
    return []


def _uses(stmt: ast.stmt) -> set[str]:
    """Names read when the statement's head executes."""
    names: set[str] = set()
    for expr in head_exprs(stmt):
        _collect_loads(expr, names, shadowed=frozenset())
    if isinstance(stmt, ast.AugAssign) and isinstance(stmt.target, ast.Name):
        names.add(stmt.target.id)
    return names


def _collect_loads(node: ast.AST, out: set[str], shadowed: frozenset[str]) -> None:
    if isinstance(node, ast.Name):
        if isinstance(node.ctx, ast.Load) and node.id not in shadowed:
            out.add(node.id)
        return
    if isinstance(node, ast.Lambda):
        for default in node.args.defaults + [d for d in node.args.kw_defaults if d is not None]:
            _collect_loads(default, out, shadowed)
        return  # the body runs later, against its own scope
    if isinstance(node, (ast.ListComp, ast.SetComp, ast.DictComp, ast.GeneratorExp)):
        bound = set(shadowed)
        for gen in node.generators:
            bound.update(name for name, _ in _unpack(gen.target, None))
        inner = frozenset(bound)
        # The first iterable is evaluated in the enclosing scope.
        for i, gen in enumerate(node.generators):
            _collect_loads(gen.iter, out, shadowed if i == 0 else inner)
            for test in gen.ifs:
                _collect_loads(test, out, inner)
        if isinstance(node, ast.DictComp):
            _collect_loads(node.key, out, inner)
            _collect_loads(node.value, out, inner)
        else:
            _collect_loads(node.elt, out, inner)
        return
    for child in ast.iter_child_nodes(node):
        _collect_loads(child, out, shadowed)


# ---------------------------------------------------------------------------
# Reaching definitions


def _reverse_postorder(cfg: Cfg) -> list[int]:
    # Iterative DFS (exits visited in reverse order) so deep block chains
    # cannot hit the interpreter recursion limit; unreachable blocks go last.
    order: list[int] = []
    visited: set[int] = {cfg.entry.id}
    stack: list[tuple[Block, int]] = [(cfg.entry, 0)]
    while stack:
        block, idx = stack[-1]
        exits = block.exits
        advanced = False
        while idx < len(exits):
            target = exits[len(exits) - 1 - idx].target
            idx += 1
            if target.id not in visited:
                visited.add(target.id)
                stack[-1] = (block, idx)
                stack.append((target, 0))
                advanced = True
                break
        if not advanced:
            stack.pop()
            order.append(block.id)
    order.reverse()
    order.extend(sorted(set(cfg.blocks) - visited))
    return order


def compute_ssa(cfg: Cfg) -> tuple[SsaUseMap, ConstDict]:
    """Exact reaching-version sets at every use, plus the definition table."""
    rpo = _reverse_postorder(cfg)

    next_version: dict[str, int] = {}
    const = ConstDict()
    stmt_defs: dict[tuple[int, int], list[tuple[str, int]]] = {}
    for bid in rpo:
        block = cfg.blocks[bid]
        for idx, stmt in enumerate(block.statements):
            assigned: list[tuple[str, int]] = []
            for name, expr, kind in _definitions(stmt):
                version = next_version.get(name, 0)
                next_version[name] = version + 1
                const.entries[(name, version)] = DefValue(expr=expr, kind=kind, site=(bid, idx))
                assigned.append((name, version))
            if assigned:
                stmt_defs[(bid, idx)] = assigned

    versioned = set(next_version)

    # Block-level gen/kill.
    gen: dict[int, dict[str, int]] = {}
    killed: dict[int, set[str]] = {}
    for bid, block in cfg.blocks.items():
        last: dict[str, int] = {}
        for idx in range(len(block.statements)):
            for name, version in stmt_defs.get((bid, idx), ()):
                last[name] = version
        gen[bid] = last
        killed[bid] = set(last)

    in_sets: dict[int, set[tuple[str, int]]] = {bid: set() for bid in cfg.blocks}
    out_sets: dict[int, set[tuple[str, int]]] = {bid: set() for bid in cfg.blocks}
    changed = True
    while changed:
        changed = False
        for bid in rpo:
            block = cfg.blocks[bid]
            new_in: set[tuple[str, int]] = set()
            for edge in block.predecessors:
                new_in |= out_sets[edge.source.id]
            survivors = {(n, v) for (n, v) in new_in if n not in killed[bid]}
            new_out = survivors | {(n, v) for n, v in gen[bid].items()}
            if new_in != in_sets[bid] or new_out != out_sets[bid]:
                in_sets[bid] = new_in
                out_sets[bid] = new_out
                changed = True

    use_map = SsaUseMap()
    for bid, block in cfg.blocks.items():
        rows: list[dict[str, set[int]]] = []
        live = set(in_sets[bid])
        for idx, stmt in enumerate(block.statements):
            row = {
                name: {v for (n, v) in live if n == name}
                for name in sorted(_uses(stmt))
                if name in versioned
            }
            rows.append(row)
            for name, version in stmt_defs.get((bid, idx), ()):
                live = {(n, v) for (n, v) in live if n != name}
                live.add((name, version))
        use_map.per_block[bid] = rows
    return use_map, const


# ---------------------------------------------------------------------------
# Constant folding


_BIN_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.FloorDiv: operator.floordiv,
    ast.Mod: operator.mod,
    ast.Pow: operator.pow,
    ast.LShift: operator.lshift,
    ast.RShift: operator.rshift,
    ast.BitOr: operator.or_,
    ast.BitAnd: operator.and_,
    ast.BitXor: operator.xor,
}

_CMP_OPS = {
    ast.Eq: operator.eq,
    ast.NotEq: operator.ne,
    ast.Lt: operator.lt,
    ast.LtE: operator.le,
    ast.Gt: operator.gt,
    ast.GtE: operator.ge,
}


class _NotConstant(Exception):
    pass


class _FoldFault(Exception):
    pass


def _eval_expr(
    expr: ast.expr,
    env: dict[str, set[int]],
    folded: dict[tuple[str, int], object],
) -> object:
    if isinstance(expr, ast.Constant):
        if isinstance(expr.value, (int, float, bool, str)) or expr.value is None:
            return expr.value
        raise _NotConstant
    if isinstance(expr, ast.Name):
        versions = env.get(expr.id)
        if versions is None or len(versions) != 1:
            raise _NotConstant
        key = (expr.id, next(iter(versions)))
        if key not in folded:
            raise _NotConstant
        return folded[key]
    if isinstance(expr, ast.UnaryOp):
        value = _eval_expr(expr.operand, env, folded)
        try:
            if isinstance(expr.op, ast.USub):
                return -value  # type: ignore[operator]
            if isinstance(expr.op, ast.UAdd):
                return +value  # type: ignore[operator]
            if isinstance(expr.op, ast.Invert):
                return ~value  # type: ignore[operator]
            if isinstance(expr.op, ast.Not):
                return not value
        except TypeError:
            raise _FoldFault from None
        raise _NotConstant
    if isinstance(expr, ast.BinOp):
        fn = _BIN_OPS.get(type(expr.op))
        if fn is None:
            raise _NotConstant
        left = _eval_expr(expr.left, env, folded)
        right = _eval_expr(expr.right, env, folded)
        try:
            return fn(left, right)
        except (ZeroDivisionError, TypeError, ValueError, OverflowError):
            raise _FoldFault from None
    if isinstance(expr, ast.BoolOp):
        result = _eval_expr(expr.values[0], env, folded)
        for value in expr.values[1:]:
            if isinstance(expr.op, ast.And):
                if not result:
                    return result
            else:
                if result:
                    return result
            result = _eval_expr(value, env, folded)
        return result
    if isinstance(expr, ast.Compare):
        left = _eval_expr(expr.left, env, folded)
        for op, comparator in zip(expr.ops, expr.comparators):
            fn = _CMP_OPS.get(type(op))
            if fn is None:
                raise _NotConstant
            right = _eval_expr(comparator, env, folded)
            try:
                if not fn(left, right):
                    return False
            except TypeError:
                raise _FoldFault from None
            left = right
        return True
    raise _NotConstant


def fold_constants(const_dict: ConstDict, use_map: SsaUseMap) -> ConstDict:
    """Populate ``folded`` wherever a definition evaluates to a constant.

    A definition folds when each free variable has a single reaching version
    at the defining statement and that version is itself folded.  Arithmetic
    faults (division by zero and friends) leave the entry unfolded with
    ``fold_failed`` set.  The input is not modified.
    """
    result = ConstDict(
        entries={key: replace(value) for key, value in const_dict.entries.items()}
    )
    folded: dict[tuple[str, int], object] = {}

    progress = True
    while progress:
        progress = False
        for key, value in result.entries.items():
            if key in folded or value.fold_failed:
                continue
            if value.expr is None or value.kind in (KIND_CALL, KIND_OTHER, KIND_UNKNOWN):
                continue
            bid, idx = value.site
            env = use_map.per_block[bid][idx]
            try:
                constant = _eval_expr(value.expr, env, folded)
            except _NotConstant:
                continue
            except _FoldFault:
                value.fold_failed = True
                continue
            value.folded = constant
            folded[key] = constant
            progress = True
    return result


def alias_pairs(const_dict: ConstDict) -> list[AliasPair]:
    """Every definition that is a bare copy of another name, in key order."""
    pairs: list[AliasPair] = []
    for key, value in sorted(const_dict.entries.items()):
        if value.kind == KIND_NAME and isinstance(value.expr, ast.Name):
            pairs.append(AliasPair(alias=key, target=value.expr.id))
    return pairs


# ---------------------------------------------------------------------------
# Serialization


def to_json_dict(use_map: SsaUseMap, const_dict: ConstDict) -> dict:
    blocks = {
        str(bid): [
            {name: sorted(versions) for name, versions in row.items()} for row in rows
        ]
        for bid, rows in use_map.per_block.items()
    }
    constants = {}
    for (name, version), value in const_dict.entries.items():
        constants[f"{name}#{version}"] = {
            "kind": value.kind,
            "folded": value.folded if value.is_folded else None,
            "source": ast.unparse(value.expr) if value.expr is not None else None,
        }
    return {"blocks": blocks, "constants": constants}
