"""Static scope analysis of subject source.

Walks a parsed module and records, per scope, where every name is bound.
A scope is identified by the dotted chain of enclosing function names;
the module scope is the empty string. Class bodies are opaque: nothing
inside them is a trackable binding (v1 traces module- and function-level
code only).
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field

from .errors import ParseError

MODULE_SCOPE = ""


def parse_source(text: str, filename: str = "<subject>") -> ast.Module:
    try:
        return ast.parse(text, filename=filename)
    except SyntaxError as exc:
        raise ParseError(f"{filename}: {exc.msg}", filename=filename, line=exc.lineno) from exc


def child_scope(parent: str, name: str) -> str:
    return name if parent == MODULE_SCOPE else f"{parent}.{name}"


def scope_chain(scope: str) -> list[str]:
    """Innermost-to-outermost chain, always ending at the module scope."""
    if scope == MODULE_SCOPE:
        return [MODULE_SCOPE]
    parts = scope.split(".")
    chain = [".".join(parts[:i]) for i in range(len(parts), 0, -1)]
    chain.append(MODULE_SCOPE)
    return chain


@dataclass(frozen=True)
class Binding:
    name: str
    scope: str
    kind: str  # assign | param | for | comp | def | import
    line: int
    end_line: int
    col: int
    end_col: int


@dataclass(frozen=True)
class FunctionInfo:
    qualname: str
    line: int
    end_line: int
    col: int
    end_col: int
    is_generator: bool


@dataclass
class ScopeTable:
    """First-binding-per-name tables for every scope in a module."""

    bindings: dict[str, dict[str, Binding]] = field(default_factory=dict)
    functions: dict[str, FunctionInfo] = field(default_factory=dict)
    import_aliases: dict[str, str] = field(default_factory=dict)  # alias -> module path

    def scopes_defining(self, name: str) -> list[str]:
        return [s for s, names in self.bindings.items() if name in names]

    def lookup(self, name: str, scope: str) -> Binding | None:
        names = self.bindings.get(scope)
        return names.get(name) if names else None

    def resolve(self, name: str, scope: str) -> str | None:
        """Qualified name of ``name`` as read from ``scope``, or None.

        Walks the scope chain innermost-first, so shadowing resolves to the
        nearest definition.
        """
        for s in scope_chain(scope):
            if self.lookup(name, s) is not None:
                return child_scope(s, name) if s else name
        return None

    def scope_of_line(self, line: int) -> str:
        """Innermost function scope whose span contains ``line``."""
        best = MODULE_SCOPE
        best_size = None
        for info in self.functions.values():
            if info.line <= line <= info.end_line:
                size = info.end_line - info.line
                if best_size is None or size < best_size:
                    best, best_size = info.qualname, size
        return best


class _ScopeWalker(ast.NodeVisitor):
    def __init__(self) -> None:
        self.table = ScopeTable()
        self.stack = [MODULE_SCOPE]
        self.table.bindings[MODULE_SCOPE] = {}

    @property
    def scope(self) -> str:
        return self.stack[-1]

    def _bind(self, name: str, kind: str, node: ast.AST) -> None:
        names = self.table.bindings.setdefault(self.scope, {})
        if name not in names:  # keep the first binding site
            names[name] = Binding(
                name=name,
                scope=self.scope,
                kind=kind,
                line=node.lineno,
                end_line=getattr(node, "end_lineno", node.lineno) or node.lineno,
                col=node.col_offset,
                end_col=getattr(node, "end_col_offset", 0) or 0,
            )

    def _bind_target(self, target: ast.expr, kind: str) -> None:
        for node in ast.walk(target):
            if isinstance(node, ast.Name):
                self._bind(node.id, kind, node)

    def visit_FunctionDef(self, node: ast.FunctionDef) -> None:
        self._bind(node.name, "def", node)
        qualname = child_scope(self.scope, node.name)
        self.table.functions[qualname] = FunctionInfo(
            qualname=qualname,
            line=node.lineno,
            end_line=node.end_lineno or node.lineno,
            col=node.col_offset,
            end_col=node.end_col_offset or 0,
            is_generator=_is_generator(node),
        )
        self.stack.append(qualname)
        self.table.bindings.setdefault(qualname, {})
        args = node.args
        for arg in [*args.posonlyargs, *args.args, *args.kwonlyargs]:
            self._bind(arg.arg, "param", arg)
        for arg in (args.vararg, args.kwarg):
            if arg is not None:
                self._bind(arg.arg, "param", arg)
        for stmt in node.body:
            self.visit(stmt)
        self.stack.pop()

    visit_AsyncFunctionDef = visit_FunctionDef  # same binding structure

    def visit_ClassDef(self, node: ast.ClassDef) -> None:
        self._bind(node.name, "def", node)
        # opaque: members inside class bodies are not trackable

    def visit_Assign(self, node: ast.Assign) -> None:
        for target in node.targets:
            self._bind_target(target, "assign")
        self.visit(node.value)

    def visit_AnnAssign(self, node: ast.AnnAssign) -> None:
        if node.value is not None:
            self._bind_target(node.target, "assign")
            self.visit(node.value)

    def visit_AugAssign(self, node: ast.AugAssign) -> None:
        self._bind_target(node.target, "assign")
        self.visit(node.value)

    def visit_For(self, node: ast.For) -> None:
        self._bind_target(node.target, "for")
        self.generic_visit(node)

    def visit_comprehension_targets(self, node) -> None:
        # comprehension variables land in the enclosing scope: expansion into
        # explicit loops makes that the runtime reality
        for gen in node.generators:
            self._bind_target(gen.target, "comp")
        self.generic_visit(node)

    visit_ListComp = visit_comprehension_targets
    visit_SetComp = visit_comprehension_targets
    visit_DictComp = visit_comprehension_targets
    visit_GeneratorExp = visit_comprehension_targets

    def visit_With(self, node: ast.With) -> None:
        for item in node.items:
            if item.optional_vars is not None:
                self._bind_target(item.optional_vars, "assign")
        self.generic_visit(node)

    def visit_NamedExpr(self, node: ast.NamedExpr) -> None:
        self._bind_target(node.target, "assign")
        self.visit(node.value)

    def visit_Import(self, node: ast.Import) -> None:
        for alias in node.names:
            local = alias.asname or alias.name.split(".")[0]
            self._bind(local, "import", node)
            self.table.import_aliases[local] = alias.name
    def visit_ImportFrom(self, node: ast.ImportFrom) -> None:
        for alias in node.names:
            if alias.name == "*":
                continue
            local = alias.asname or alias.name
            self._bind(local, "import", node)
            if node.module:
                self.table.import_aliases[local] = f"{node.module}.{alias.name}"


def _is_generator(node: ast.FunctionDef) -> bool:
    for sub in ast.walk(node):
        if isinstance(sub, (ast.Yield, ast.YieldFrom)):
            # yields inside nested defs belong to the nested function
            if _owning_function(node, sub) is node:
                return True
    return False


def _owning_function(root: ast.FunctionDef, target: ast.AST) -> ast.AST | None:
    owner = None

    def walk(node, current):
        nonlocal owner
        if node is target:
            owner = current
            return
        for child in ast.iter_child_nodes(node):
            nxt = child if isinstance(child, (ast.FunctionDef, ast.AsyncFunctionDef, ast.Lambda)) else current
            walk(child, nxt)

    walk(root, root)
    return owner


def build_scope_table(tree: ast.Module) -> ScopeTable:
    walker = _ScopeWalker()
    walker.visit(tree)
    return walker.table


def all_identifiers(tree: ast.Module) -> set[str]:
    """Every identifier appearing anywhere in the tree (for collision scans)."""
    found: set[str] = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.Name):
            found.add(node.id)
        elif isinstance(node, ast.arg):
            found.add(node.arg)
        elif isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            found.add(node.name)
        elif isinstance(node, ast.Attribute):
            found.add(node.attr)
        elif isinstance(node, ast.alias):
            found.add(node.asname or node.name.split(".")[0])
    return found


def dotted_call_name(func: ast.expr) -> str | None:
    """Dotted name of a call target: ``f``, ``mod.f``, ``a.b.c``; None if dynamic."""
    parts: list[str] = []
    node = func
    while isinstance(node, ast.Attribute):
        parts.append(node.attr)
        node = node.value
    if isinstance(node, ast.Name):
        parts.append(node.id)
        return ".".join(reversed(parts))
    return None
