from __future__ import annotations

import ast

import pytest

from lancet.cfg import build_from_ast
from lancet.frontend import parse_module
from lancet.modgraph import (
    ImportRelation,
    Unresolved,
    build_dir_tree,
    build_import_graph,
    build_name_context,
    call_sites,
    leaf_nodes,
    parse_imports,
    resolve_fqn,
    resolve_relative,
)
from lancet.ssa import alias_pairs, compute_ssa

from helpers import CORPUS

EXAMPLE = CORPUS / "imports" / "example"


def test_dir_tree_mirrors_example_package():
    tree = build_dir_tree(EXAMPLE)
    assert tree.name == "example"
    assert [child.name for child in tree.children] == ["module_a", "module_b", "module_c"]
    assert all(child.module is not None for child in tree.children)
    assert [child.full_name for child in tree.children] == [
        "example.module_a",
        "example.module_b",
        "example.module_c",
    ]


def test_dir_tree_empty_directory(tmp_path):
    (tmp_path / "proj").mkdir()
    tree = build_dir_tree(tmp_path / "proj")
    assert tree.children == []


def test_dir_tree_nested_packages(tmp_path):
    root = tmp_path / "pkg"
    (root / "sub").mkdir(parents=True)
    (root / "sub" / "mod.py").write_text("x = 1\n")
    (root / "sub" / "__init__.py").write_text("")
    tree = build_dir_tree(root)
    (sub,) = tree.children
    assert sub.full_name == "pkg.sub"
    names = {child.name: child.full_name for child in sub.children}
    assert names == {"__init__": "pkg.sub", "mod": "pkg.sub.mod"}


def test_dir_tree_collects_parse_errors_without_failing(tmp_path):
    root = tmp_path / "proj"
    root.mkdir()
    (root / "good.py").write_text("x = 1\n")
    (root / "bad.py").write_text("def broken(:\n")
    tree = build_dir_tree(root)
    by_name = {c.name: c for c in tree.children}
    assert by_name["good"].module is not None
    assert by_name["bad"].module is None
    assert by_name["bad"].parse_error is not None
    graph = build_import_graph(root)
    assert graph.diagnostics


def test_dir_tree_rejects_missing_root(tmp_path):
    with pytest.raises(OSError):
        build_dir_tree(tmp_path / "absent")


def test_package_shadows_module_of_same_name(tmp_path):
    root = tmp_path / "proj"
    (root / "sub").mkdir(parents=True)
    (root / "sub" / "__init__.py").write_text("")
    (root / "sub.py").write_text("x = 1\n")
    tree = build_dir_tree(root)
    names = [child.name for child in tree.children]
    assert names.count("sub") == 1
    (sub,) = tree.children
    assert sub.path.endswith("sub")


def test_parse_imports_relations():
    tree = build_dir_tree(EXAMPLE)
    module_dict = parse_imports(tree)
    a_rels = module_dict["example.module_a"]
    assert [r.imported_module for r in a_rels] == ["example.module_b", "example.module_c"]
    assert all(r.relative_level == 1 for r in a_rels)
    assert a_rels[0].symbols == (("B", None),)

    c_rels = module_dict["example.module_c"]
    assert c_rels == [
        ImportRelation(
            importer="example.module_c",
            imported_module="os",
            symbols=(("os", None),),
            relative_level=0,
        )
    ]


def test_parse_imports_no_imports(tmp_path):
    root = tmp_path / "p"
    root.mkdir()
    (root / "plain.py").write_text("x = 1\n")
    module_dict = parse_imports(build_dir_tree(root))
    assert module_dict["p.plain"] == []


def test_internal_edges_and_leaves():
    graph = build_import_graph(EXAMPLE)
    assert graph.internal_edges == {
        ("example.module_a", "example.module_b"),
        ("example.module_a", "example.module_c"),
        ("example.module_b", "example.module_c"),
    }
    assert [n.full_name for n in leaf_nodes(graph)] == ["example.module_c"]


def test_every_non_leaf_has_an_outgoing_internal_edge():
    graph = build_import_graph(EXAMPLE)
    leaves = {n.full_name for n in leaf_nodes(graph)}
    importers = {importer for importer, _ in graph.internal_edges}
    for node in graph.tree.iter_modules():
        if node.module is None:
            continue
        if node.full_name not in leaves:
            assert node.full_name in importers


def test_mutually_importing_modules_have_no_leaves(tmp_path):
    root = tmp_path / "cycle"
    root.mkdir()
    (root / "one.py").write_text("from .two import f\n\ndef g():\n    return f\n")
    (root / "two.py").write_text("from .one import g\n\ndef f():\n    return g\n")
    graph = build_import_graph(root)
    assert leaf_nodes(graph) == []


def test_unresolvable_relative_import_is_diagnosed(tmp_path):
    root = tmp_path / "proj"
    root.mkdir()
    (root / "mod.py").write_text("from ...far import thing\n")
    graph = build_import_graph(root)
    assert graph.diagnostics
    (relation,) = graph.module_dict["proj.mod"]
    assert not relation.resolved


def test_resolve_relative_anchoring():
    assert resolve_relative("example.module_a", False, 1, "module_b") == "example.module_b"
    assert resolve_relative("pkg.sub", True, 1, "mod") == "pkg.sub.mod"
    assert resolve_relative("pkg.sub.mod", False, 2, "other") == "pkg.other"
    assert resolve_relative("pkg.mod", False, 0, "os.path") == "os.path"
    assert resolve_relative("pkg.mod", False, 3, "x") is None


# ---------------------------------------------------------------------------
# FQN resolution


def _ctx_for(source: str, module_name: str = "m", with_aliases: bool = False):
    tree = parse_module(source)
    pairs = None
    if with_aliases:
        _, const = compute_ssa(build_from_ast(module_name, tree))
        pairs = alias_pairs(const)
    return tree, build_name_context(tree, module_name, alias_pairs=pairs)


def test_from_import_binding():
    tree, ctx = _ctx_for("from os import getcwd\ngetcwd()\n")
    (call,) = call_sites(tree)
    assert resolve_fqn(call.func, ctx) == "os.getcwd"


def test_import_alias_substitution():
    tree, ctx = _ctx_for("import a.b as ab\nab.f()\n")
    (call,) = call_sites(tree)
    assert resolve_fqn(call.func, ctx) == "a.b.f"


def test_alias_pair_composition():
    tree, ctx = _ctx_for("from os import getcwd\ng = getcwd\ng()\n", with_aliases=True)
    (call,) = call_sites(tree)
    assert resolve_fqn(call.func, ctx) == "os.getcwd"


def test_local_definitions_resolve_to_module_qualified_names():
    tree, ctx = _ctx_for("def f():\n    return 1\n\nf()\n")
    (call,) = call_sites(tree)
    assert resolve_fqn(call.func, ctx) == "m.f"


def test_unknown_roots_are_unresolved_with_syntactic_text():
    tree, ctx = _ctx_for("mystery.fn()\n")
    (call,) = call_sites(tree)
    result = resolve_fqn(call.func, ctx)
    assert isinstance(result, Unresolved)
    assert result == "mystery.fn"


def test_star_imports_do_not_bind_names():
    tree, ctx = _ctx_for("from os import *\ngetcwd()\n")
    (call,) = call_sites(tree)
    assert isinstance(resolve_fqn(call.func, ctx), Unresolved)


def test_resolution_is_idempotent_on_qualified_names():
    _, ctx = _ctx_for("x = 1\n")
    expr = ast.parse("os.path.join", mode="eval").body
    once = resolve_fqn(expr, ctx)
    assert once == "os.path.join"
    again = resolve_fqn(ast.parse(str(once), mode="eval").body, ctx)
    assert again == once


def test_non_dotted_callees_are_unresolved():
    tree, ctx = _ctx_for("(lambda: 1)()\n")
    (call,) = call_sites(tree)
    assert isinstance(resolve_fqn(call.func, ctx), Unresolved)
