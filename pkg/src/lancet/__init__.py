"""lancet: static analysis toolkit for Python 3 source code.

Submodules:

* :mod:`lancet.frontend` - parsing, unparsing, traversal, module naming
* :mod:`lancet.rewriter` - source simplification rules and transform hooks
* :mod:`lancet.cfg` - control-flow graphs with DOT/JSON export
* :mod:`lancet.ssa` - SSA use sets, constant folding, alias pairs
* :mod:`lancet.modgraph` - directory trees, import graphs, FQN resolution
* :mod:`lancet.callgraph` - project call graphs
* :mod:`lancet.typeinfer` - heuristic type inference
* :mod:`lancet.cli` - the ``lancet`` command
"""

from .cfg import Block, Cfg, Link, build_from_file, build_from_source, to_dot
from .frontend import ParseError, SourceFile, module_name_for_path, parse_module, unparse, walk
from .rewriter import RewriteRule, TempNamer, TransformHook, run_transforms, simplify_module
from .ssa import AliasPair, ConstDict, SsaUseMap, alias_pairs, compute_ssa, fold_constants
from .modgraph import ImportGraph, TreeNode, build_import_graph, leaf_nodes, resolve_fqn
from .callgraph import CallGraph, analyze, output_edges, output_mods, to_simple_json
from .typeinfer import HeuristicTable, TypeRecord, infer_types, type_of_expr

__version__ = "0.1.0"

__all__ = [
    "Block",
    "Cfg",
    "Link",
    "build_from_file",
    "build_from_source",
    "to_dot",
    "ParseError",
    "SourceFile",
    "module_name_for_path",
    "parse_module",
    "unparse",
    "walk",
    "RewriteRule",
    "TempNamer",
    "TransformHook",
    "run_transforms",
    "simplify_module",
    "AliasPair",
    "ConstDict",
    "SsaUseMap",
    "alias_pairs",
    "compute_ssa",
    "fold_constants",
    "ImportGraph",
    "TreeNode",
    "build_import_graph",
    "leaf_nodes",
    "resolve_fqn",
    "CallGraph",
    "analyze",
    "output_edges",
    "output_mods",
    "to_simple_json",
    "HeuristicTable",
    "TypeRecord",
    "infer_types",
    "type_of_expr",
    "__version__",
]
