"""First traversal: no transformations, only facts about the source.

Collects function and loop line spans plus the direct-dependency map: for
every assignment target, the variables and functions read on the right-hand
side. Names are scope-qualified (``fib.val``) so downstream closure
computation is plain graph reachability.
"""

from __future__ import annotations

import ast

from .. import scopes
from ..model import SourceSpan, StaticInfo


def loop_key(line: int) -> str:
    """Static identity of a loop: the line its header starts on."""
    return f"L{line}"


def collect_static_info(source: str | ast.Module, filename: str = "<subject>") -> StaticInfo:
    tree = scopes.parse_source(source, filename) if isinstance(source, str) else source
    table = scopes.build_scope_table(tree)
    collector = _Collector(table, filename)
    collector.visit(tree)
    function_spans = {
        qual: SourceSpan(filename, info.line, info.end_line, info.col, info.end_col)
        for qual, info in table.functions.items()
    }
    return StaticInfo(
        function_spans=function_spans,
        loop_spans=collector.loop_spans,
        direct_deps={k: frozenset(v) for k, v in collector.deps.items()},
    )


class _Collector(ast.NodeVisitor):
    def __init__(self, table: scopes.ScopeTable, filename: str):
        self.table = table
        self.filename = filename
        self.stack = [scopes.MODULE_SCOPE]
        self.deps: dict[str, set[str]] = {}
        self.loop_spans: dict[str, SourceSpan] = {}

    @property
    def scope(self) -> str:
        return self.stack[-1]

    def _qualify(self, name: str) -> str:
        return self.table.resolve(name, self.scope) or name

    def _rhs_names(self, expr: ast.expr) -> set[str]:
        """Identifiers and call targets read by an expression, qualified."""
        names: set[str] = set()
        for node in ast.walk(expr):
            if isinstance(node, ast.Name) and isinstance(node.ctx, ast.Load):
                names.add(self._qualify(node.id))
            elif isinstance(node, ast.Call):
                dotted = scopes.dotted_call_name(node.func)
                if dotted and "." in dotted:
                    # method/module calls keep their dotted form to match call
                    # blocks; the root object is picked up by the Name walk
                    names.add(dotted)
        return names

    def _add_deps(self, target: ast.expr, rhs: set[str]) -> None:
        for node in ast.walk(target):
            if isinstance(node, ast.Name):
                key = scopes.child_scope(self.scope, node.id) if self.scope else node.id
                self.deps.setdefault(key, set()).update(rhs)

    def visit_Assign(self, node: ast.Assign) -> None:
        rhs = self._rhs_names(node.value)
        for target in node.targets:
            self._add_deps(target, rhs)
        self.generic_visit(node)

    def visit_AnnAssign(self, node: ast.AnnAssign) -> None:
        if node.value is not None:
            self._add_deps(node.target, self._rhs_names(node.value))
        self.generic_visit(node)

    def visit_AugAssign(self, node: ast.AugAssign) -> None:
        # augmented assignment reads its own target
        rhs = self._rhs_names(node.value)
        rhs.update(self._rhs_names(_as_load(node.target)))
        self._add_deps(node.target, rhs)
        self.generic_visit(node)

    def visit_For(self, node: ast.For) -> None:
        self._add_deps(node.target, self._rhs_names(node.iter))
        self._loop_span(node)
        self.generic_visit(node)

    def visit_While(self, node: ast.While) -> None:
        self._loop_span(node)
        self.generic_visit(node)

    def _comprehension(self, node) -> None:
        for gen in node.generators:
            self._add_deps(gen.target, self._rhs_names(gen.iter))
        self.generic_visit(node)

    visit_ListComp = _comprehension
    visit_SetComp = _comprehension
    visit_DictComp = _comprehension
    visit_GeneratorExp = _comprehension

    def _loop_span(self, node) -> None:
        self.loop_spans[loop_key(node.lineno)] = SourceSpan(
            self.filename, node.lineno, node.end_lineno or node.lineno, node.col_offset, node.end_col_offset or 0
        )

    def visit_FunctionDef(self, node: ast.FunctionDef) -> None:
        self.stack.append(scopes.child_scope(self.scope, node.name))
        for stmt in node.body:
            self.visit(stmt)
        self.stack.pop()

    visit_AsyncFunctionDef = visit_FunctionDef

    def visit_ClassDef(self, node: ast.ClassDef) -> None:
        pass  # class bodies are outside the traced subset


def _as_load(target: ast.expr) -> ast.expr:
    copied = ast.parse(ast.unparse(target), mode="eval").body
    return copied
