"""Heuristic type inference for variables, returns, and parameters.

The inference is deliberately lightweight: a flat vocabulary of type names
("str", "int", "float", "bool", "List", "Dict", "Tuple", "Set", "None",
"callable", class FQNs, and "Any" for no-evidence cases), no generics.
Evidence comes from three directions:

* forward evaluation of expressions - literals, operators via a rule table,
  calls via a seeded signature table (``data/signatures.txt``, overridable
  through the ``LANCET_SIGNATURES`` environment variable) and the return
  types of project functions, iterated to a fixpoint;
* call sites - a parameter's type includes every argument type observed;
* backward constraints - using a parameter with a known method
  (``s.upper()``) or concatenating it with a string pins its type.

Each function return, each distinct local variable, and each parameter
yields one :class:`TypeRecord`; records sort by (file, line).  Rewriter
temporaries are analysis artifacts and are not reported.
"""

from __future__ import annotations

import ast
import os
from dataclasses import dataclass, field
from pathlib import Path

from .frontend import ParseError, SourceFile, module_name_for_path, parse_module, walk
from .modgraph import NameContext, Unresolved, build_name_context, resolve_fqn
from .rewriter import TEMP_PREFIX, simplify_module

__all__ = [
    "TypeRecord",
    "HeuristicTable",
    "load_signature_table",
    "default_table",
    "infer_types",
    "infer_types_report",
    "type_of_expr",
    "infer_parameters",
]

ANY = "Any"

_NUMERIC_TOWER = {"bool": 0, "int": 1, "float": 2}


@dataclass
class TypeRecord:
    """One inferred fact: a return value, a variable, or a parameter.

    Exactly one of ``variable``/``parameter`` is set for those record kinds;
    both are absent for a return record.
    """

    file: str
    line_number: int
    type: set[str]
    function: str | None = None
    variable: str | None = None
    parameter: str | None = None

    def to_json_dict(self) -> dict:
        out: dict = {"file": self.file, "line_number": self.line_number}
        if self.function is not None:
            out["function"] = self.function
        if self.variable is not None:
            out["variable"] = self.variable
        if self.parameter is not None:
            out["parameter"] = self.parameter
        out["type"] = sorted(self.type)
        return out


def _default_operator_rules() -> dict[tuple[str, str, str], str]:
    rules: dict[tuple[str, str, str], str] = {}
    numeric = ("bool", "int", "float")
    for op in ("Add", "Sub", "Mult", "FloorDiv", "Mod", "Pow"):
        for left in numeric:
            for right in numeric:
                level = max(_NUMERIC_TOWER[left], _NUMERIC_TOWER[right], 1)
                rules[(op, left, right)] = "float" if level == 2 else "int"
    for left in numeric:
        for right in numeric:
            rules[("Div", left, right)] = "float"
    rules[("Add", "str", "str")] = "str"
    rules[("Mult", "str", "int")] = "str"
    rules[("Mult", "int", "str")] = "str"
    rules[("Mod", "str", "str")] = "str"
    rules[("Add", "List", "List")] = "List"
    rules[("Mult", "List", "int")] = "List"
    rules[("Mult", "int", "List")] = "List"
    rules[("Add", "Tuple", "Tuple")] = "Tuple"
    return rules


# Method name -> (receiver type, result type).  Only entries whose runtime
# result type matches the vocabulary exactly belong here.
_DEFAULT_METHODS: dict[str, tuple[str, str]] = {
    "upper": ("str", "str"),
    "lower": ("str", "str"),
    "strip": ("str", "str"),
    "lstrip": ("str", "str"),
    "rstrip": ("str", "str"),
    "title": ("str", "str"),
    "capitalize": ("str", "str"),
    "casefold": ("str", "str"),
    "swapcase": ("str", "str"),
    "replace": ("str", "str"),
    "format": ("str", "str"),
    "join": ("str", "str"),
    "zfill": ("str", "str"),
    "split": ("str", "List"),
    "rsplit": ("str", "List"),
    "splitlines": ("str", "List"),
    "startswith": ("str", "bool"),
    "endswith": ("str", "bool"),
    "isdigit": ("str", "bool"),
    "isalpha": ("str", "bool"),
    "isalnum": ("str", "bool"),
    "isupper": ("str", "bool"),
    "islower": ("str", "bool"),
    "find": ("str", "int"),
    "rfind": ("str", "int"),
    "count": ("str", "int"),
    "append": ("List", "None"),
    "extend": ("List", "None"),
    "insert": ("List", "None"),
    "remove": ("List", "None"),
    "sort": ("List", "None"),
    "reverse": ("List", "None"),
    "copy": ("List", "List"),
    "index": ("List", "int"),
    "update": ("Dict", "None"),
    "clear": ("Dict", "None"),
    "add": ("Set", "None"),
    "discard": ("Set", "None"),
    "union": ("Set", "Set"),
    "intersection": ("Set", "Set"),
    "issubset": ("Set", "bool"),
}


@dataclass
class HeuristicTable:
    """Lookup tables behind the inference rules; misses resolve to ``Any``."""

    known_signatures: dict[str, str] = field(default_factory=dict)
    operator_rules: dict[tuple[str, str, str], str] = field(default_factory=_default_operator_rules)
    method_signatures: dict[str, tuple[str, str]] = field(default_factory=lambda: dict(_DEFAULT_METHODS))

    def signature(self, fqn: str) -> str | None:
        return self.known_signatures.get(fqn)


def load_signature_table(path: str | Path) -> dict[str, str]:
    """Parse a ``<fqn> <type>`` signature file; ``#`` starts a comment."""
    table: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}: malformed signature line: {raw!r}")
        table[parts[0]] = parts[1]
    return table


def default_table() -> HeuristicTable:
    """Table seeded from the bundled signature file (or LANCET_SIGNATURES)."""
    override = os.environ.get("LANCET_SIGNATURES")
    path = Path(override) if override else Path(__file__).parent / "data" / "signatures.txt"
    return HeuristicTable(known_signatures=load_signature_table(path))


# ---------------------------------------------------------------------------
# Expression typing


def _literal_type(value: object) -> str:
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, int):
        return "int"
    if isinstance(value, float):
        return "float"
    if isinstance(value, str):
        return "str"
    if value is None:
        return "None"
    return ANY


def _binop_types(op: ast.operator, left: set[str], right: set[str],
                 table: HeuristicTable, diagnostics: list[str] | None) -> set[str]:
    # Empty operand sets mean "no evidence yet" during the fixpoint and must
    # stay empty; they are normalized to Any only when records are emitted.
    op_name = type(op).__name__
    out: set[str] = set()
    for l in left:
        for r in right:
            if l == ANY or r == ANY:
                out.add(ANY)
                continue
            rule = table.operator_rules.get((op_name, l, r))
            if rule is not None:
                out.add(rule)
            else:
                if op_name == "Add" and {l, r} == {"str", "int"} and diagnostics is not None:
                    diagnostics.append(f"suspicious str/int concatenation ({l} + {r})")
                out.add(ANY)
    return out


def type_of_expr(
    expr: ast.expr,
    env: dict[str, set[str]],
    table: HeuristicTable,
    *,
    resolver: "_Resolver | None" = None,
    diagnostics: list[str] | None = None,
) -> set[str]:
    """Type set of an expression under ``env`` (name -> type set).

    Literals map directly; operators consult the rule table; calls consult
    the signature table and, when a resolver is supplied, project function
    returns and class constructors.  Anything else is ``Any``.
    """
    if isinstance(expr, ast.Constant):
        return {_literal_type(expr.value)}
    if isinstance(expr, ast.Name):
        return set(env.get(expr.id, {ANY}))
    if isinstance(expr, (ast.List, ast.ListComp)):
        return {"List"}
    if isinstance(expr, (ast.Dict, ast.DictComp)):
        return {"Dict"}
    if isinstance(expr, ast.SetComp):
        return {"Set"}
    if isinstance(expr, ast.Tuple):
        return {"Tuple"}
    if isinstance(expr, ast.Lambda):
        return {"callable"}
    if isinstance(expr, ast.BoolOp):
        out: set[str] = set()
        for value in expr.values:
            out |= type_of_expr(value, env, table, resolver=resolver, diagnostics=diagnostics)
        return out
    if isinstance(expr, ast.Compare):
        return {"bool"}
    if isinstance(expr, ast.UnaryOp):
        if isinstance(expr.op, ast.Not):
            return {"bool"}
        inner = type_of_expr(expr.operand, env, table, resolver=resolver, diagnostics=diagnostics)
        if isinstance(expr.op, (ast.USub, ast.UAdd)):
            return {("int" if t == "bool" else t) if t in ("bool", "int", "float") else ANY for t in inner}
        return {ANY}
    if isinstance(expr, ast.BinOp):
        left = type_of_expr(expr.left, env, table, resolver=resolver, diagnostics=diagnostics)
        right = type_of_expr(expr.right, env, table, resolver=resolver, diagnostics=diagnostics)
        return _binop_types(expr.op, left, right, table, diagnostics)
    if isinstance(expr, ast.Call):
        return _type_of_call(expr, env, table, resolver, diagnostics)
    return {ANY}


def _type_of_call(
    call: ast.Call,
    env: dict[str, set[str]],
    table: HeuristicTable,
    resolver: "_Resolver | None",
    diagnostics: list[str] | None,
) -> set[str]:
    func = call.func
    # Method call on a value whose type we know.
    if isinstance(func, ast.Attribute):
        receiver = type_of_expr(func.value, env, table, resolver=resolver, diagnostics=diagnostics)
        method = table.method_signatures.get(func.attr)
        if method is not None and method[0] in receiver:
            return {method[1]}
        if resolver is not None:
            for recv_type in sorted(receiver):
                ret = resolver.method_return(recv_type, func.attr)
                if ret is not None:
                    return set(ret)
    if resolver is not None:
        resolved = resolver.call_target(func)
        if resolved is not None:
            return set(resolved)
    # Fallback: a bare name that appears verbatim in the signature table.
    if isinstance(func, (ast.Name, ast.Attribute)):
        dotted = ast.unparse(func)
        sig = table.signature(dotted)
        if sig is not None:
            return {sig}
    return {ANY}


# ---------------------------------------------------------------------------
# Project model


@dataclass
class _FuncInfo:
    fqn: str
    name: str
    node: ast.FunctionDef
    module: "_ModuleInfo"
    class_fqn: str | None = None
    has_yield: bool = False


@dataclass
class _ClassInfo:
    fqn: str
    methods: dict[str, str] = field(default_factory=dict)  # name -> function fqn


@dataclass
class _ModuleInfo:
    fqn: str
    file: str
    tree: ast.Module
    ctx: NameContext


class _Resolver:
    """Resolves call targets for one module against project-wide results."""

    def __init__(self, engine: "_Engine", module: _ModuleInfo) -> None:
        self.engine = engine
        self.module = module

    def call_target(self, func: ast.expr) -> set[str] | None:
        fqn = resolve_fqn(func, self.module.ctx)
        if isinstance(fqn, Unresolved):
            return None
        engine = self.engine
        if fqn in engine.classes:
            return {fqn}
        if fqn in engine.functions:
            info = engine.functions[fqn]
            if info.has_yield:
                return {ANY}
            # Not-yet-computed returns are bottom, not Any; the fixpoint
            # fills them in.
            return set(engine.returns.get(fqn, set()))
        sig = engine.table.signature(fqn)
        if sig is not None:
            return {sig}
        return None

    def method_return(self, receiver_type: str, attr: str) -> set[str] | None:
        cls = self.engine.classes.get(receiver_type)
        if cls is None or attr not in cls.methods:
            return None
        method_fqn = cls.methods[attr]
        info = self.engine.functions.get(method_fqn)
        if info is not None and info.has_yield:
            return {ANY}
        return set(self.engine.returns.get(method_fqn, set()))


class _DiagnosticLog(list):
    """List of diagnostics that ignores repeats (fixpoint sweeps re-walk code)."""

    def append(self, item: str) -> None:
        if item not in self:
            super().append(item)


class _Engine:
    def __init__(self, table: HeuristicTable, simplify: bool) -> None:
        self.table = table
        self.simplify = simplify
        self.modules: list[_ModuleInfo] = []
        self.functions: dict[str, _FuncInfo] = {}
        self.classes: dict[str, _ClassInfo] = {}
        self.returns: dict[str, set[str]] = {}
        self.params: dict[str, dict[str, set[str]]] = {}
        self.diagnostics: list[str] = _DiagnosticLog()

    # -- loading -------------------------------------------------------------

    def load_file(self, path: Path, display: str, module_name: str) -> None:
        try:
            source = SourceFile.load(path)
            tree = parse_module(source.text, display)
            if self.simplify:
                tree = simplify_module(tree)
        except ParseError as exc:
            self.diagnostics.append(str(exc))
            return
        ctx = build_name_context(tree, module_name, is_package=path.name == "__init__.py")
        module = _ModuleInfo(fqn=module_name, file=display, tree=tree, ctx=ctx)
        self.modules.append(module)
        self._collect(module, tree.body, prefix=module_name, class_fqn=None)

    def _collect(self, module: _ModuleInfo, body: list[ast.stmt], prefix: str,
                 class_fqn: str | None) -> None:
        for stmt in body:
            if isinstance(stmt, ast.FunctionDef):
                fqn = f"{prefix}.{stmt.name}"
                info = _FuncInfo(
                    fqn=fqn,
                    name=stmt.name,
                    node=stmt,
                    module=module,
                    class_fqn=class_fqn,
                    has_yield=_has_own_yield(stmt),
                )
                self.functions[fqn] = info
                if class_fqn is not None:
                    self.classes[class_fqn].methods[stmt.name] = fqn
                self._collect(module, stmt.body, prefix=fqn, class_fqn=None)
            elif isinstance(stmt, ast.ClassDef):
                fqn = f"{prefix}.{stmt.name}"
                self.classes[fqn] = _ClassInfo(fqn=fqn)
                self._collect(module, stmt.body, prefix=fqn, class_fqn=fqn)
            elif isinstance(stmt, (ast.If, ast.While, ast.For)):
                self._collect(module, list(stmt.body) + list(stmt.orelse), prefix, class_fqn)

    # -- environment walks -----------------------------------------------------

    def _param_env(self, info: _FuncInfo) -> dict[str, set[str]]:
        env: dict[str, set[str]] = {}
        inferred = self.params.get(info.fqn, {})
        for i, arg in enumerate(_positional_params(info.node.args)):
            if i == 0 and info.class_fqn is not None and arg.arg in ("self", "cls"):
                env[arg.arg] = {info.class_fqn}
            else:
                env[arg.arg] = set(inferred.get(arg.arg, set()))
        return env

    def _walk_body(
        self,
        info_module: _ModuleInfo,
        body: list[ast.stmt],
        env: dict[str, set[str]],
        bindings: dict[str, tuple[int, set[str]]] | None,
        returns: list[tuple[int, set[str], bool]] | None,
        call_sink: dict[str, list[tuple[list[set[str]], dict[str, set[str]]]]] | None,
    ) -> None:
        """Flow-insensitive walk: types accumulate as unions in ``env``."""
        resolver = _Resolver(self, info_module)
        for stmt in body:
            if isinstance(stmt, (ast.FunctionDef, ast.ClassDef)):
                kind = "callable" if isinstance(stmt, ast.FunctionDef) else ANY
                env[stmt.name] = {kind}
                continue
            if call_sink is not None:
                self._record_calls(stmt, env, resolver, call_sink)
            if isinstance(stmt, ast.Assign):
                value_types = type_of_expr(
                    stmt.value, env, self.table, resolver=resolver, diagnostics=self.diagnostics
                )
                for target in stmt.targets:
                    self._bind_target(target, stmt, value_types, env, bindings, resolver)
            elif isinstance(stmt, ast.AugAssign) and isinstance(stmt.target, ast.Name):
                value_types = type_of_expr(
                    stmt.value, env, self.table, resolver=resolver, diagnostics=self.diagnostics
                )
                combined = _binop_types(
                    stmt.op, env.get(stmt.target.id, {ANY}), value_types, self.table, None
                )
                env[stmt.target.id] = env.get(stmt.target.id, set()) | combined
                if bindings is not None and stmt.target.id in bindings:
                    bindings[stmt.target.id][1].update(combined)
            elif isinstance(stmt, ast.For):
                for name in _target_names(stmt.target):
                    env[name] = env.get(name, set()) | {ANY}
            elif isinstance(stmt, ast.Return) and returns is not None:
                if stmt.value is None:
                    returns.append((stmt.lineno, {"None"}, True))
                else:
                    returns.append(
                        (
                            stmt.lineno,
                            type_of_expr(
                                stmt.value, env, self.table,
                                resolver=resolver, diagnostics=self.diagnostics,
                            ),
                            False,
                        )
                    )
            if isinstance(stmt, (ast.If, ast.While, ast.For)):
                self._walk_body(
                    info_module, list(stmt.body) + list(stmt.orelse),
                    env, bindings, returns, call_sink,
                )

    def _bind_target(
        self,
        target: ast.expr,
        stmt: ast.stmt,
        value_types: set[str],
        env: dict[str, set[str]],
        bindings: dict[str, tuple[int, set[str]]] | None,
        resolver: "_Resolver | None" = None,
    ) -> None:
        if isinstance(target, ast.Name):
            env[target.id] = env.get(target.id, set()) | value_types
            if bindings is not None:
                if target.id not in bindings:
                    bindings[target.id] = (stmt.lineno, set(value_types))
                else:
                    bindings[target.id][1].update(value_types)
        elif isinstance(target, (ast.Tuple, ast.List)):
            value = stmt.value if isinstance(stmt, ast.Assign) else None
            elementwise = (
                isinstance(value, (ast.Tuple, ast.List))
                and len(value.elts) == len(target.elts)
            )
            for i, elt in enumerate(target.elts):
                if elementwise:
                    inner = type_of_expr(value.elts[i], env, self.table, resolver=resolver)
                else:
                    inner = {ANY}
                if isinstance(elt, ast.Name):
                    env[elt.id] = env.get(elt.id, set()) | inner
                    if bindings is not None:
                        if elt.id not in bindings:
                            bindings[elt.id] = (stmt.lineno, set(inner))
                        else:
                            bindings[elt.id][1].update(inner)

    def _record_calls(
        self,
        stmt: ast.stmt,
        env: dict[str, set[str]],
        resolver: _Resolver,
        call_sink: dict[str, list[tuple[list[set[str]], dict[str, set[str]]]]],
    ) -> None:
        for node in walk(stmt):
            if not isinstance(node, ast.Call):
                continue
            fqn = resolve_fqn(node.func, resolver.module.ctx)
            if isinstance(fqn, Unresolved) or fqn not in self.functions:
                continue
            pos = [
                type_of_expr(arg, env, self.table, resolver=resolver)
                for arg in node.args
                if not isinstance(arg, ast.Starred)
            ]
            kw = {
                k.arg: type_of_expr(k.value, env, self.table, resolver=resolver)
                for k in node.keywords
                if k.arg is not None
            }
            call_sink.setdefault(fqn, []).append((pos, kw))

    # -- fixpoint ----------------------------------------------------------------

    def run(self) -> None:
        for _ in range(10):
            changed = False
            call_sites: dict[str, list[tuple[list[set[str]], dict[str, set[str]]]]] = {}

            for module in self.modules:
                env: dict[str, set[str]] = {}
                self._walk_body(module, module.tree.body, env, None, None, call_sites)
            for fqn in sorted(self.functions):
                info = self.functions[fqn]
                env = self._param_env(info)
                returns: list[tuple[int, set[str], bool]] = []
                self._walk_body(info.module, info.node.body, env, None, returns, call_sites)
                new_ret = self._return_set(info, returns)
                if new_ret != self.returns.get(fqn):
                    self.returns[fqn] = new_ret
                    changed = True

            for fqn in sorted(self.functions):
                info = self.functions[fqn]
                new_params = self._infer_params(info, call_sites.get(fqn, []))
                if new_params != self.params.get(fqn):
                    self.params[fqn] = new_params
                    changed = True
            if not changed:
                break

    def _return_set(self, info: _FuncInfo, returns: list[tuple[int, set[str], bool]]) -> set[str]:
        if info.has_yield:
            return {ANY}
        if not returns:
            return {"None"}
        out: set[str] = set()
        bare = False
        for _, types, is_bare in returns:
            out |= types
            bare = bare or is_bare
        body = info.node.body
        falls_through = not isinstance(body[-1], ast.Return)
        if falls_through and not bare:
            out.add("None")
        return out

    def _infer_params(
        self,
        info: _FuncInfo,
        sites: list[tuple[list[set[str]], dict[str, set[str]]]],
    ) -> dict[str, set[str]]:
        constraints = _backward_constraints(info.node, self.table)
        params = [a.arg for a in _positional_params(info.node.args)]
        skip_self = 1 if info.class_fqn is not None and params and params[0] in ("self", "cls") else 0
        out: dict[str, set[str]] = {}
        for i, name in enumerate(params):
            if i < skip_self:
                continue
            evidence: set[str] = set(constraints.get(name, set()))
            for pos, kw in sites:
                slot = i - skip_self
                if slot < len(pos):
                    evidence |= pos[slot]
                if name in kw:
                    evidence |= kw[name]
            out[name] = evidence
        return out

    # -- records -------------------------------------------------------------------

    def records(self) -> list[TypeRecord]:
        records: list[TypeRecord] = []
        for module in self.modules:
            env: dict[str, set[str]] = {}
            bindings: dict[str, tuple[int, set[str]]] = {}
            self._walk_body(module, module.tree.body, env, bindings, None, None)
            for name in sorted(bindings):
                if name.startswith(TEMP_PREFIX):
                    continue
                line, types = bindings[name]
                records.append(
                    TypeRecord(
                        file=module.file, line_number=line, variable=name,
                        type=set(types) or {ANY},
                    )
                )

        for fqn in sorted(self.functions):
            info = self.functions[fqn]
            returns: list[tuple[int, set[str], bool]] = []
            env = self._param_env(info)
            bindings = {}
            self._walk_body(info.module, info.node.body, env, bindings, returns, None)

            ret_line = returns[0][0] if returns else info.node.lineno
            records.append(
                TypeRecord(
                    file=info.module.file,
                    line_number=ret_line,
                    function=info.name,
                    type=set(self.returns.get(fqn, {"None"})) or {ANY},
                )
            )
            for name in sorted(bindings):
                if name.startswith(TEMP_PREFIX):
                    continue
                line, types = bindings[name]
                records.append(
                    TypeRecord(
                        file=info.module.file,
                        line_number=line,
                        function=info.name,
                        variable=name,
                        type=set(types) or {ANY},
                    )
                )
            inferred = self.params.get(fqn, {})
            for name in inferred:
                records.append(
                    TypeRecord(
                        file=info.module.file,
                        line_number=info.node.lineno,
                        function=info.name,
                        parameter=name,
                        type=set(inferred[name]) or {ANY},
                    )
                )

        records.sort(
            key=lambda r: (
                r.file,
                r.line_number,
                r.variable or "",
                r.parameter or "",
                r.function or "",
            )
        )
        return records


def _backward_constraints(fn: ast.FunctionDef, table: HeuristicTable) -> dict[str, set[str]]:
    """Types forced on parameters by how the body uses them."""
    params = {a.arg for a in _positional_params(fn.args)}
    out: dict[str, set[str]] = {}
    for node in ast.walk(fn):
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Attribute):
            base = node.func.value
            if isinstance(base, ast.Name) and base.id in params:
                method = table.method_signatures.get(node.func.attr)
                if method is not None:
                    out.setdefault(base.id, set()).add(method[0])
        elif isinstance(node, ast.BinOp) and isinstance(node.op, ast.Add):
            for param_side, other in ((node.left, node.right), (node.right, node.left)):
                if isinstance(param_side, ast.Name) and param_side.id in params:
                    if isinstance(other, ast.Constant) and isinstance(other.value, str):
                        out.setdefault(param_side.id, set()).add("str")
    return out


def infer_parameters(
    function: ast.FunctionDef,
    call_sites: list[tuple[list[set[str]], dict[str, set[str]]]],
    body_constraints: dict[str, set[str]] | None = None,
    *,
    file: str = "<string>",
    table: HeuristicTable | None = None,
) -> list[TypeRecord]:
    """Parameter records from call-site argument types plus body constraints.

    ``call_sites`` holds (positional type sets, keyword type sets) per
    observed call; with no evidence at all a parameter is ``Any``.
    """
    table = table or default_table()
    constraints = dict(body_constraints or {})
    for name, types in _backward_constraints(function, table).items():
        constraints.setdefault(name, set()).update(types)
    records = []
    params = [a.arg for a in _positional_params(function.args)]
    for i, name in enumerate(params):
        evidence: set[str] = set(constraints.get(name, set()))
        for pos, kw in call_sites:
            if i < len(pos):
                evidence |= pos[i]
            if name in kw:
                evidence |= kw[name]
        records.append(
            TypeRecord(
                file=file,
                line_number=function.lineno,
                function=function.name,
                parameter=name,
                type=evidence or {ANY},
            )
        )
    return records


def _positional_params(args: ast.arguments) -> list[ast.arg]:
    return list(args.posonlyargs) + list(args.args)


def _target_names(target: ast.expr) -> list[str]:
    if isinstance(target, ast.Name):
        return [target.id]
    if isinstance(target, (ast.Tuple, ast.List)):
        out: list[str] = []
        for elt in target.elts:
            if isinstance(elt, ast.Starred):
                elt = elt.value
            out.extend(_target_names(elt))
        return out
    return []


def _has_own_yield(fn: ast.FunctionDef) -> bool:
    """Yield anywhere in the function's own body (nested defs excluded)."""

    def scan(stmts: list[ast.stmt]) -> bool:
        for stmt in stmts:
            if isinstance(stmt, (ast.FunctionDef, ast.ClassDef)):
                continue
            if isinstance(stmt, (ast.If, ast.While, ast.For)):
                heads = [stmt.test] if isinstance(stmt, (ast.If, ast.While)) else [stmt.iter]
                if any(isinstance(n, ast.Yield) for h in heads for n in ast.walk(h)):
                    return True
                if scan(list(stmt.body) + list(stmt.orelse)):
                    return True
                continue
            if any(isinstance(node, ast.Yield) for node in ast.walk(stmt)):
                return True
        return False

    return scan(fn.body)


def infer_types(
    name: str,
    entry: str | Path,
    *,
    simplify: bool = True,
    table: HeuristicTable | None = None,
) -> list[TypeRecord]:
    """Infer type records for a file or for every module under a directory.

    ``name`` labels the analysis run; it does not affect the results.
    Unparsable files are skipped, the rest are analyzed.
    """
    del name
    records, _ = infer_types_report(entry, simplify=simplify, table=table)
    return records


def infer_types_report(
    entry: str | Path,
    *,
    simplify: bool = True,
    table: HeuristicTable | None = None,
) -> tuple[list[TypeRecord], list[str]]:
    """Like :func:`infer_types`, but also returns the diagnostics collected
    (skipped files, suspicious operations)."""
    engine, records = _run_engine(entry, simplify=simplify, table=table)
    return records, list(engine.diagnostics)


def _run_engine(
    entry: str | Path,
    *,
    simplify: bool = True,
    table: HeuristicTable | None = None,
) -> tuple[_Engine, list[TypeRecord]]:
    engine = _Engine(table or default_table(), simplify)
    entry_path = Path(entry)
    if entry_path.is_dir():
        for path in sorted(entry_path.rglob("*.py")):
            try:
                module_name = module_name_for_path(entry_path, path)
            except ValueError:
                continue
            engine.load_file(path, str(path), module_name)
    else:
        engine.load_file(entry_path, str(entry), entry_path.stem)
    engine.run()
    return engine, engine.records()
