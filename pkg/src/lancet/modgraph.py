"""Project directory trees, import graphs, and qualified-name resolution.

:func:`build_dir_tree` mirrors a project directory as a :class:`TreeNode`
tree with every ``.py`` file parsed and attached; :func:`parse_imports`
turns each import statement into an :class:`ImportRelation` with relative
imports resolved against the importer's package.  A module is a *leaf* when
it has no outgoing project-internal imports - the bottom of the dependency
hierarchy, analyzable without project context.

:func:`resolve_fqn` maps a call name (a ``Name`` or dotted attribute chain)
to its fully qualified dotted path by substituting import bindings at the
leftmost position, optionally composing with SSA alias pairs
(``g = getcwd; g()`` resolves through ``getcwd``).  Unknown roots come back
as :class:`Unresolved`, a ``str`` subclass carrying the syntactic dotted
text unchanged, so resolution is idempotent.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field
from pathlib import Path

from .frontend import ParseError, parse_module, walk
from .ssa import AliasPair

__all__ = [
    "TreeNode",
    "ImportRelation",
    "ImportGraph",
    "NameContext",
    "Unresolved",
    "build_dir_tree",
    "parse_imports",
    "build_import_graph",
    "leaf_nodes",
    "resolve_relative",
    "build_name_context",
    "resolve_fqn",
    "call_sites",
]

_SKIP_DIRS = {"__pycache__"}


@dataclass
class TreeNode:
    """One directory or module file; ``module`` is set only for ``.py`` leaves."""

    name: str
    full_name: str
    path: str
    children: list["TreeNode"] = field(default_factory=list)
    module: ast.Module | None = None
    parse_error: ParseError | None = None

    @property
    def is_module(self) -> bool:
        return self.module is not None or self.parse_error is not None

    def iter_modules(self):
        if self.is_module:
            yield self
        for child in self.children:
            yield from child.iter_modules()


@dataclass(frozen=True)
class ImportRelation:
    """One import statement seen in ``importer``.

    ``symbols`` holds (name, alias) pairs for ``from``-imports and the plain
    ``import`` binding; a ``*`` name records a wildcard import.
    ``relative_level`` counts leading dots (0 = absolute); ``resolved`` is
    False when a relative import reaches above the project root, in which
    case ``imported_module`` keeps the unanchored text.
    """

    importer: str
    imported_module: str
    symbols: tuple[tuple[str, str | None], ...] = ()
    relative_level: int = 0
    resolved: bool = True


@dataclass
class ImportGraph:
    tree: TreeNode
    module_dict: dict[str, list[ImportRelation]] = field(default_factory=dict)
    internal_edges: set[tuple[str, str]] = field(default_factory=set)
    diagnostics: list[str] = field(default_factory=list)


def build_dir_tree(root: str | Path) -> TreeNode:
    """Mirror ``root`` as a tree, parsing every ``.py`` file found.

    Files that fail to parse keep their node with ``parse_error`` set;
    non-source files are skipped.  Raises ``OSError`` when ``root`` itself is
    unreadable or not a directory.
    """
    rootp = Path(root).resolve()
    if not rootp.is_dir():
        raise NotADirectoryError(f"not a directory: {root}")
    return _build_node(rootp, rootp.name)


def _build_node(path: Path, full_name: str) -> TreeNode:
    node = TreeNode(name=path.name, full_name=full_name, path=str(path))
    taken: set[str] = set()
    for entry in sorted(path.iterdir(), key=lambda p: p.name):
        if entry.is_dir():
            if entry.name in _SKIP_DIRS or entry.name.startswith("."):
                continue
            node.children.append(_build_node(entry, f"{full_name}.{entry.name}"))
            taken.add(entry.name)
        elif entry.suffix == ".py":
            stem = entry.stem
            if stem in taken:
                continue  # a sibling package shadows the module, as in imports
            child_full = full_name if stem == "__init__" else f"{full_name}.{stem}"
            child = TreeNode(name=stem, full_name=child_full, path=str(entry))
            try:
                text = entry.read_bytes().decode("utf-8")
                child.module = parse_module(text, str(entry))
            except UnicodeDecodeError as exc:
                child.parse_error = ParseError(str(entry), 1, 0, f"not valid UTF-8: {exc.reason}")
            except ParseError as exc:
                child.parse_error = exc
            node.children.append(child)
            taken.add(stem)
    return node


def resolve_relative(importer: str, is_package: bool, level: int, module: str | None) -> str | None:
    """Anchor a relative import at the importer's package; None if it escapes."""
    if level == 0:
        return module
    parts = importer.split(".")
    if not is_package:
        parts = parts[:-1]
    strip = level - 1
    if strip > len(parts):
        return None
    if strip:
        parts = parts[:-strip]
    if not parts and not module:
        return None
    if module:
        parts = parts + module.split(".")
    return ".".join(parts) if parts else None


def _relations_for(node: TreeNode) -> tuple[list[ImportRelation], list[str]]:
    relations: list[ImportRelation] = []
    diagnostics: list[str] = []
    assert node.module is not None
    is_package = node.name == "__init__"
    for stmt in walk(node.module):
        if isinstance(stmt, ast.Import):
            for alias in stmt.names:
                relations.append(
                    ImportRelation(
                        importer=node.full_name,
                        imported_module=alias.name,
                        symbols=((alias.name, alias.asname),),
                        relative_level=0,
                    )
                )
        elif isinstance(stmt, ast.ImportFrom):
            resolved = resolve_relative(node.full_name, is_package, stmt.level, stmt.module)
            symbols = tuple((a.name, a.asname) for a in stmt.names)
            if resolved is None:
                diagnostics.append(
                    f"{node.path}:{stmt.lineno}: relative import reaches above the project root"
                )
                relations.append(
                    ImportRelation(
                        importer=node.full_name,
                        imported_module="." * stmt.level + (stmt.module or ""),
                        symbols=symbols,
                        relative_level=stmt.level,
                        resolved=False,
                    )
                )
            else:
                relations.append(
                    ImportRelation(
                        importer=node.full_name,
                        imported_module=resolved,
                        symbols=symbols,
                        relative_level=stmt.level,
                    )
                )
    return relations, diagnostics


def parse_imports(tree: TreeNode) -> dict[str, list[ImportRelation]]:
    """Import relations per module, for every parsed module in the tree."""
    module_dict: dict[str, list[ImportRelation]] = {}
    for node in tree.iter_modules():
        if node.module is None:
            continue
        relations, _ = _relations_for(node)
        module_dict[node.full_name] = relations
    return module_dict


def build_import_graph(root: str | Path) -> ImportGraph:
    """Directory tree + import relations + project-internal edge set."""
    tree = build_dir_tree(root)
    graph = ImportGraph(tree=tree)
    project = {node.full_name for node in tree.iter_modules() if node.module is not None}
    for node in tree.iter_modules():
        if node.module is None:
            if node.parse_error is not None:
                graph.diagnostics.append(str(node.parse_error))
            continue
        relations, diagnostics = _relations_for(node)
        graph.module_dict[node.full_name] = relations
        graph.diagnostics.extend(diagnostics)
        for rel in relations:
            if not rel.resolved:
                continue
            if rel.imported_module in project:
                graph.internal_edges.add((rel.importer, rel.imported_module))
            for symbol, _alias in rel.symbols:
                candidate = f"{rel.imported_module}.{symbol}"
                if candidate in project:
                    graph.internal_edges.add((rel.importer, candidate))
    return graph


def leaf_nodes(graph: ImportGraph) -> list[TreeNode]:
    """Modules with no outgoing project-internal imports, by full name."""
    importers_with_edges = {importer for importer, _ in graph.internal_edges}
    leaves = [
        node
        for node in graph.tree.iter_modules()
        if node.module is not None and node.full_name not in importers_with_edges
    ]
    return sorted(leaves, key=lambda n: n.full_name)


def external_modules(graph: ImportGraph) -> set[str]:
    """Imported module names that do not belong to the project."""
    project = {node.full_name for node in graph.tree.iter_modules() if node.module is not None}
    out: set[str] = set()
    for relations in graph.module_dict.values():
        for rel in relations:
            if rel.resolved and rel.imported_module not in project:
                out.add(rel.imported_module)
    return out


# ---------------------------------------------------------------------------
# Fully qualified name resolution


class Unresolved(str):
    """A dotted name whose root could not be bound; compares equal to its text."""

    __slots__ = ()

    def __repr__(self) -> str:
        return f"Unresolved({str.__repr__(self)})"


@dataclass
class NameContext:
    """Bindings visible in one module: import aliases, local definitions,
    and (optionally) SSA alias pairs used to chase name copies."""

    module: str
    bindings: dict[str, str] = field(default_factory=dict)
    alias_map: dict[str, str] = field(default_factory=dict)


def build_name_context(
    module: ast.Module,
    module_name: str,
    *,
    is_package: bool = False,
    alias_pairs: list[AliasPair] | None = None,
) -> NameContext:
    ctx = NameContext(module=module_name)
    for stmt in walk(module):
        if isinstance(stmt, ast.Import):
            for alias in stmt.names:
                if alias.asname:
                    ctx.bindings[alias.asname] = alias.name
                else:
                    root = alias.name.split(".")[0]
                    ctx.bindings[root] = root
        elif isinstance(stmt, ast.ImportFrom):
            resolved = resolve_relative(module_name, is_package, stmt.level, stmt.module)
            if resolved is None:
                continue
            for alias in stmt.names:
                if alias.name == "*":
                    continue
                ctx.bindings[alias.asname or alias.name] = f"{resolved}.{alias.name}"
    for stmt in module.body:
        if isinstance(stmt, (ast.FunctionDef, ast.ClassDef)):
            ctx.bindings[stmt.name] = f"{module_name}.{stmt.name}"

    if alias_pairs:
        by_name: dict[str, set[str]] = {}
        for pair in alias_pairs:
            by_name.setdefault(pair.alias[0], set()).add(pair.target)
        for name, targets in by_name.items():
            if len(targets) == 1:
                ctx.alias_map[name] = next(iter(targets))
    return ctx


def _dotted_parts(expr: ast.expr) -> list[str] | None:
    if isinstance(expr, ast.Name):
        return [expr.id]
    if isinstance(expr, ast.Attribute):
        base = _dotted_parts(expr.value)
        if base is None:
            return None
        return base + [expr.attr]
    return None


def resolve_fqn(call_name: ast.expr, ctx: NameContext) -> str:
    """Fully qualified dotted name for a call target, or :class:`Unresolved`."""
    parts = _dotted_parts(call_name)
    if not parts:
        return Unresolved(ast.unparse(call_name))
    syntactic = ".".join(parts)

    root = parts[0]
    seen: set[str] = set()
    while root not in ctx.bindings and root in ctx.alias_map and root not in seen:
        seen.add(root)
        root = ctx.alias_map[root]
    if root in ctx.bindings:
        return ".".join([ctx.bindings[root]] + parts[1:])
    return Unresolved(syntactic)


def call_sites(module: ast.Module) -> list[ast.Call]:
    """All call expressions in the module, in source (pre-)order."""
    return [node for node in walk(module) if isinstance(node, ast.Call)]
