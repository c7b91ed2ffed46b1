"""Project call graphs via a flow-insensitive value-set fixpoint.

Every module, function, and class gets a fully qualified name; every
variable, parameter, and return slot gets a value set of callables that may
flow into it.  Assignments, argument passing, and returns propagate those
sets until nothing grows, then each syntactic call contributes edges from
its enclosing definition (module-body calls attach to the module node) to
every callable in its callee's value set.

Design points:

* one value set per qualified name - no context, flow, or field
  sensitivity; instantiation flows the class FQN itself, so a later
  ``obj.method()`` resolves through the class;
* calling a class yields edges to both the class node and its ``__init__``
  when one is defined;
* nested definitions keep parent-qualified names (``m.outer.inner``);
* names that never resolve to a project value produce an edge only when
  their root was bound by an import (recorded as an external callee);
  everything else - builtins included - is dropped;
* dynamic features (``eval``, ``exec``, ``getattr``, decorated callables)
  are ignored with a per-site diagnostic.

Modules are simplified (see :mod:`lancet.rewriter`) before extraction, so
lambda assignments and call chains resolve like ordinary definitions.
"""

from __future__ import annotations

import ast
import json
from dataclasses import dataclass, field
from pathlib import Path

from .cfg import head_exprs, iter_calls
from .frontend import ParseError, module_name_for_path, parse_module
from .modgraph import resolve_relative
from .rewriter import FixpointError, simplify_module

__all__ = [
    "CgNode",
    "AssignmentGraph",
    "CallGraph",
    "analyze",
    "output_edges",
    "output_mods",
    "to_simple_json",
]

RETURN_SLOT = "<ret>"

_DYNAMIC_NAMES = {"eval", "exec", "getattr", "globals", "locals", "vars", "__import__"}

Value = tuple[str, str]  # ("func" | "class" | "mod" | "ext", fqn)


@dataclass(frozen=True)
class CgNode:
    fqn: str
    kind: str  # "module" | "function" | "class" | "external"


@dataclass
class AssignmentGraph:
    """Flows-to relation over qualified names, with the value sets they carry."""

    nodes: set[str] = field(default_factory=set)
    edges: set[tuple[str, str]] = field(default_factory=set)
    value_sets: dict[str, set[Value]] = field(default_factory=dict)


@dataclass
class CallGraph:
    edges: dict[str, set[str]] = field(default_factory=dict)
    nodes: dict[str, str] = field(default_factory=dict)
    internal_mods: set[str] = field(default_factory=set)
    external_mods: set[str] = field(default_factory=set)
    diagnostics: list[str] = field(default_factory=list)
    assignment_graph: AssignmentGraph = field(default_factory=AssignmentGraph)

    def node_list(self) -> list[CgNode]:
        return [CgNode(fqn=fqn, kind=self.nodes[fqn]) for fqn in sorted(self.nodes)]


# ---------------------------------------------------------------------------
# Scopes


class _Scope:
    def __init__(self, fqn: str, kind: str, parent: "_Scope | None", module_fqn: str) -> None:
        self.fqn = fqn
        self.kind = kind  # "module" | "function" | "class"
        self.parent = parent
        self.module_fqn = module_fqn
        self.statements: list[ast.stmt] = []
        # local name -> ("slot", fqn) | ("ext", dotted) | ("mod", module fqn)
        self.bindings: dict[str, tuple[str, str]] = {}
        self.params: list[str] = []
        self.methods: dict[str, str] = {}  # class scopes: method name -> fqn

    def slot(self, name: str) -> str:
        return f"{self.fqn}.{name}"

    def lookup(self, name: str) -> tuple[str, str] | None:
        scope: _Scope | None = self
        while scope is not None:
            # Class bodies are invisible to the scopes nested inside them.
            if name in scope.bindings and (scope is self or scope.kind != "class"):
                return scope.bindings[name]
            scope = scope.parent
        return None


class _Analyzer:
    def __init__(self, package_root: Path | None) -> None:
        self.package_root = package_root
        self.modules: dict[str, ast.Module] = {}
        self.module_paths: dict[str, Path] = {}
        self.scopes: list[_Scope] = []
        self.module_scopes: dict[str, _Scope] = {}
        self.definitions: dict[str, str] = {}  # fqn -> "function" | "class"
        self.func_params: dict[str, list[str]] = {}
        self.class_scopes: dict[str, _Scope] = {}
        self.values: dict[str, set[Value]] = {}
        self.call_edges: set[tuple[str, str]] = set()
        self.flow_edges: set[tuple[str, str]] = set()
        self.external_mods: set[str] = set()
        self.diagnostics: list[str] = []
        self._diag_seen: set[str] = set()

    # -- module loading ------------------------------------------------------

    def module_fqn_for(self, path: Path) -> str:
        if self.package_root is not None:
            try:
                return module_name_for_path(self.package_root, path)
            except ValueError:
                pass
        return path.stem

    def internal_path(self, dotted: str) -> Path | None:
        """File for a dotted name when it lives under the package root."""
        if self.package_root is None:
            return None
        parts = dotted.split(".")
        if parts[0] != self.package_root.name:
            return None
        base = self.package_root.joinpath(*parts[1:])
        if base.with_suffix(".py").is_file():
            return base.with_suffix(".py")
        if (base / "__init__.py").is_file():
            return base / "__init__.py"
        return None

    def load(self, path: Path, fqn: str) -> None:
        if fqn in self.modules:
            return
        try:
            text = path.read_bytes().decode("utf-8")
            module = parse_module(text, str(path))
            module = simplify_module(module)
        except (ParseError, FixpointError, OSError, UnicodeDecodeError) as exc:
            self.diagnostics.append(f"{path}: skipped: {exc}")
            return
        self.modules[fqn] = module
        self.module_paths[fqn] = path
        scope = _Scope(fqn, "module", None, fqn)
        self.module_scopes[fqn] = scope
        self._collect_scope(scope, module.body, is_package=path.name == "__init__.py")

    def _collect_scope(self, scope: _Scope, body: list[ast.stmt], *, is_package: bool = False) -> None:
        self.scopes.append(scope)
        scope.statements = body
        for stmt in body:
            self._collect_statement(scope, stmt, is_package)

    def _collect_statement(self, scope: _Scope, stmt: ast.stmt, is_package: bool) -> None:
        if isinstance(stmt, ast.FunctionDef):
            fqn = scope.slot(stmt.name)
            scope.bindings[stmt.name] = ("slot", fqn)
            if scope.kind == "class":
                scope.methods[stmt.name] = fqn
            self.definitions[fqn] = "function"
            child = _Scope(fqn, "function", scope, scope.module_fqn)
            child.params = [a.arg for a in _positional_params(stmt.args)]
            self.func_params[fqn] = child.params
            for name in child.params:
                child.bindings[name] = ("slot", child.slot(name))
            if stmt.decorator_list:
                self._diagnose(scope, stmt, "decorated definition; wrapper effects ignored")
            self._collect_scope(child, stmt.body)
        elif isinstance(stmt, ast.ClassDef):
            fqn = scope.slot(stmt.name)
            scope.bindings[stmt.name] = ("slot", fqn)
            self.definitions[fqn] = "class"
            child = _Scope(fqn, "class", scope, scope.module_fqn)
            self.class_scopes[fqn] = child
            if stmt.decorator_list:
                self._diagnose(scope, stmt, "decorated definition; wrapper effects ignored")
            self._collect_scope(child, stmt.body)
        elif isinstance(stmt, ast.Import):
            for alias in stmt.names:
                self._bind_import(scope, alias)
        elif isinstance(stmt, ast.ImportFrom):
            self._bind_import_from(scope, stmt, is_package)
        elif isinstance(stmt, (ast.Assign, ast.AugAssign, ast.For)):
            targets = list(stmt.targets) if isinstance(stmt, ast.Assign) else [stmt.target]
            for target in targets:
                for name in _target_names(target):
                    scope.bindings.setdefault(name, ("slot", scope.slot(name)))
        if isinstance(stmt, (ast.If, ast.While, ast.For)):
            for inner in list(stmt.body) + list(stmt.orelse):
                self._collect_statement(scope, inner, is_package)

    def _bind_import(self, scope: _Scope, alias: ast.alias) -> None:
        dotted = alias.name
        target = self.internal_path(dotted)
        if target is not None:
            self.load(target, dotted)
            bound = alias.asname or dotted.split(".")[0]
            if alias.asname:
                scope.bindings[bound] = ("mod", dotted)
            else:
                scope.bindings[bound] = ("mod", dotted.split(".")[0])
                # Ensure the top-level package is loadable for attribute walks.
                top = self.internal_path(dotted.split(".")[0])
                if top is not None:
                    self.load(top, dotted.split(".")[0])
        else:
            self.external_mods.add(dotted)
            bound = alias.asname or dotted.split(".")[0]
            scope.bindings[bound] = ("ext", dotted if alias.asname else dotted.split(".")[0])

    def _bind_import_from(self, scope: _Scope, stmt: ast.ImportFrom, is_package: bool) -> None:
        resolved = resolve_relative(scope.module_fqn, is_package, stmt.level, stmt.module)
        if resolved is None:
            self.diagnostics.append(
                f"{scope.module_fqn}: unresolvable relative import at line {stmt.lineno}"
            )
            return
        target = self.internal_path(resolved)
        if target is not None:
            self.load(target, resolved)
            for alias in stmt.names:
                if alias.name == "*":
                    self._diagnose(scope, stmt, "star import; names not tracked")
                    continue
                submodule = self.internal_path(f"{resolved}.{alias.name}")
                if submodule is not None:
                    self.load(submodule, f"{resolved}.{alias.name}")
                    scope.bindings[alias.asname or alias.name] = ("mod", f"{resolved}.{alias.name}")
                else:
                    scope.bindings[alias.asname or alias.name] = ("slot", f"{resolved}.{alias.name}")
        else:
            self.external_mods.add(resolved)
            for alias in stmt.names:
                if alias.name == "*":
                    continue
                scope.bindings[alias.asname or alias.name] = ("ext", f"{resolved}.{alias.name}")

    # -- value propagation -----------------------------------------------------

    def _get(self, slot: str) -> set[Value]:
        return self.values.setdefault(slot, set())

    def _add(self, slot: str, values: set[Value]) -> bool:
        if not values:
            return False
        current = self._get(slot)
        before = len(current)
        current |= values
        return len(current) != before

    def eval_expr(self, expr: ast.expr, scope: _Scope) -> set[Value]:
        if isinstance(expr, ast.Name):
            binding = scope.lookup(expr.id)
            if binding is None:
                return set()
            return self._binding_values(binding)
        if isinstance(expr, ast.Attribute):
            out: set[Value] = set()
            for value in self.eval_expr(expr.value, scope):
                out |= self._attr_values(value, expr.attr)
            return out
        if isinstance(expr, ast.Call):
            out = set()
            for target in self.eval_expr(expr.func, scope):
                kind, fqn = target
                if kind == "func":
                    out |= self._get(f"{fqn}.{RETURN_SLOT}")
                elif kind == "class":
                    out.add(("class", fqn))
            return out
        if isinstance(expr, (ast.Tuple, ast.List)):
            return set()
        return set()

    def _binding_values(self, binding: tuple[str, str]) -> set[Value]:
        kind, ref = binding
        if kind == "slot":
            return set(self._get(ref))
        if kind == "mod":
            return {("mod", ref)}
        return {("ext", ref)}

    def _attr_values(self, value: Value, attr: str) -> set[Value]:
        kind, fqn = value
        if kind == "ext":
            return {("ext", f"{fqn}.{attr}")}
        if kind == "mod":
            dotted = f"{fqn}.{attr}"
            if dotted in self.modules:
                return {("mod", dotted)}
            mod_scope = self.module_scopes.get(fqn)
            if mod_scope is not None and attr in mod_scope.bindings:
                return self._binding_values(mod_scope.bindings[attr])
            return set()
        if kind == "class":
            class_scope = self.class_scopes.get(fqn)
            if class_scope is None:
                return set()
            if attr in class_scope.methods:
                return {("func", class_scope.methods[attr])}
            if attr in class_scope.bindings:
                return self._binding_values(class_scope.bindings[attr])
            return set()
        return set()

    def sweep(self) -> bool:
        changed = False
        for scope in self.scopes:
            for stmt in _iter_scope_statements(scope.statements):
                changed |= self._sweep_statement(scope, stmt)
        return changed

    def _sweep_statement(self, scope: _Scope, stmt: ast.stmt) -> bool:
        changed = False
        if isinstance(stmt, ast.FunctionDef):
            fqn = scope.slot(stmt.name)
            changed |= self._add(fqn, {("func", fqn)})
            params = self.func_params.get(fqn, [])
            defaults = stmt.args.defaults
            for name, default in zip(reversed(params), reversed(defaults)):
                changed |= self._add(f"{fqn}.{name}", self.eval_expr(default, scope))
        elif isinstance(stmt, ast.ClassDef):
            fqn = scope.slot(stmt.name)
            changed |= self._add(fqn, {("class", fqn)})
        elif isinstance(stmt, ast.Assign):
            values = self.eval_expr(stmt.value, scope)
            for target in stmt.targets:
                changed |= self._assign_target(scope, target, stmt.value, values)
        elif isinstance(stmt, ast.Return) and stmt.value is not None and scope.kind == "function":
            ret = f"{scope.fqn}.{RETURN_SLOT}"
            src = self.eval_expr(stmt.value, scope)
            if isinstance(stmt.value, ast.Name):
                self._note_flow(scope, stmt.value.id, ret)
            changed |= self._add(ret, src)

        for expr in head_exprs(stmt):
            for call in iter_calls(expr):
                changed |= self._process_call(scope, call)
        return changed

    def _assign_target(self, scope: _Scope, target: ast.expr, value_expr: ast.expr,
                       values: set[Value]) -> bool:
        changed = False
        if isinstance(target, ast.Name):
            binding = scope.lookup(target.id) or ("slot", scope.slot(target.id))
            if binding[0] == "slot":
                if isinstance(value_expr, ast.Name):
                    self._note_flow(scope, value_expr.id, binding[1])
                changed |= self._add(binding[1], values)
        elif isinstance(target, (ast.Tuple, ast.List)):
            elementwise = (
                isinstance(value_expr, (ast.Tuple, ast.List))
                and len(value_expr.elts) == len(target.elts)
            )
            for i, elt in enumerate(target.elts):
                if elementwise:
                    inner_expr = value_expr.elts[i]
                    inner_vals = self.eval_expr(inner_expr, scope)
                else:
                    inner_expr, inner_vals = elt, set()
                changed |= self._assign_target(scope, elt, inner_expr, inner_vals)
        return changed

    def _note_flow(self, scope: _Scope, src_name: str, dst_slot: str) -> None:
        binding = scope.lookup(src_name)
        if binding is not None and binding[0] == "slot":
            self.flow_edges.add((binding[1], dst_slot))

    def _process_call(self, scope: _Scope, call: ast.Call) -> bool:
        changed = False
        caller = scope.fqn
        func = call.func

        if isinstance(func, ast.Name) and func.id in _DYNAMIC_NAMES and scope.lookup(func.id) is None:
            self._diagnose(scope, call, f"dynamic feature {func.id!r} ignored")
            return False

        receivers: set[Value] = set()
        if isinstance(func, ast.Attribute):
            receivers = self.eval_expr(func.value, scope)
        targets = self.eval_expr(func, scope)

        for kind, fqn in sorted(targets):
            if kind == "func":
                changed |= self._edge(caller, fqn)
                self_offset = 0
                if isinstance(func, ast.Attribute) and any(k == "class" for k, _ in receivers):
                    params = self.func_params.get(fqn, [])
                    if params:
                        for r_kind, r_fqn in receivers:
                            if r_kind == "class":
                                changed |= self._add(f"{fqn}.{params[0]}", {("class", r_fqn)})
                        self_offset = 1
                changed |= self._flow_arguments(scope, call, fqn, self_offset)
            elif kind == "class":
                changed |= self._edge(caller, fqn)
                init = self._attr_values(("class", fqn), "__init__")
                for i_kind, i_fqn in init:
                    if i_kind == "func":
                        changed |= self._edge(caller, i_fqn)
                        params = self.func_params.get(i_fqn, [])
                        if params:
                            changed |= self._add(f"{i_fqn}.{params[0]}", {("class", fqn)})
                        changed |= self._flow_arguments(scope, call, i_fqn, 1)
            elif kind == "ext":
                changed |= self._edge(caller, fqn)
        return changed

    def _flow_arguments(self, scope: _Scope, call: ast.Call, fqn: str, offset: int) -> bool:
        changed = False
        params = self.func_params.get(fqn, [])
        for i, arg in enumerate(call.args):
            if isinstance(arg, ast.Starred):
                continue
            slot_index = i + offset
            if slot_index < len(params):
                slot = f"{fqn}.{params[slot_index]}"
                if isinstance(arg, ast.Name):
                    self._note_flow(scope, arg.id, slot)
                changed |= self._add(slot, self.eval_expr(arg, scope))
        for kw in call.keywords:
            if kw.arg is not None and kw.arg in params:
                slot = f"{fqn}.{kw.arg}"
                if isinstance(kw.value, ast.Name):
                    self._note_flow(scope, kw.value.id, slot)
                changed |= self._add(slot, self.eval_expr(kw.value, scope))
        return changed

    def _edge(self, caller: str, callee: str) -> bool:
        edge = (caller, callee)
        if edge in self.call_edges:
            return False
        self.call_edges.add(edge)
        return True

    def _diagnose(self, scope: _Scope, node: ast.AST, message: str) -> None:
        line = getattr(node, "lineno", 0)
        text = f"{scope.module_fqn}:{line}: {message}"
        if text not in self._diag_seen:
            self._diag_seen.add(text)
            self.diagnostics.append(text)

    # -- result assembly -------------------------------------------------------

    def result(self) -> CallGraph:
        graph = CallGraph()
        graph.internal_mods = set(self.modules)
        graph.external_mods = set(self.external_mods)
        graph.diagnostics = list(self.diagnostics)

        for fqn in self.modules:
            graph.nodes[fqn] = "module"
        for fqn, kind in self.definitions.items():
            graph.nodes[fqn] = kind
        for caller, callee in self.call_edges:
            graph.nodes.setdefault(callee, "external")
            graph.nodes.setdefault(caller, "external")
        for fqn in graph.nodes:
            graph.edges.setdefault(fqn, set())
        for caller, callee in self.call_edges:
            graph.edges[caller].add(callee)

        graph.assignment_graph = AssignmentGraph(
            nodes=set(self.values),
            edges=set(self.flow_edges),
            value_sets={slot: set(vals) for slot, vals in self.values.items()},
        )
        return graph


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


def _iter_scope_statements(body: list[ast.stmt]):
    """Statements of one scope, descending into branches but not definitions."""
    for stmt in body:
        yield stmt
        if isinstance(stmt, (ast.If, ast.While, ast.For)):
            yield from _iter_scope_statements(list(stmt.body) + list(stmt.orelse))


_MAX_ROUNDS = 1000


def analyze(entry_points: list[str | Path], package_root: str | Path | None = None) -> CallGraph:
    """Build the call graph reachable from ``entry_points``.

    ``package_root`` names the project directory; imports that resolve to
    files under it are followed and become internal modules, everything else
    is external.  Entry files missing from disk raise ``OSError``; files that
    fail to parse are skipped with a diagnostic.
    """
    root = Path(package_root).resolve() if package_root is not None else None
    analyzer = _Analyzer(root)
    for entry in entry_points:
        path = Path(entry)
        if not path.is_file():
            raise FileNotFoundError(f"entry point not found: {entry}")
        path = path.resolve()
        analyzer.load(path, analyzer.module_fqn_for(path))

    for _ in range(_MAX_ROUNDS):
        if not analyzer.sweep():
            break
    return analyzer.result()


def output_edges(cg: CallGraph) -> list[tuple[str, str]]:
    """Flattened (caller, callee) pairs, lexicographically sorted."""
    return sorted((caller, callee) for caller, callees in cg.edges.items() for callee in callees)


def output_mods(cg: CallGraph) -> tuple[list[str], list[str]]:
    return sorted(cg.internal_mods), sorted(cg.external_mods)


def to_simple_json(cg: CallGraph) -> str:
    """Every node mapped to its sorted callee list; deterministic bytes."""
    payload = {fqn: sorted(callees) for fqn, callees in cg.edges.items()}
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"
