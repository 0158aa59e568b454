"""Syntax-tree rewriting: call separation, comprehension expansion, hooks.

Normalization pulls every nested call out into ``<tmp> = call(...)``
immediately before its statement (left-to-right evaluation order preserved)
and expands list comprehensions into explicit loops, so call bookkeeping can
bracket single statements. Instrumentation then inserts recorder hooks for
calls, loops, tracked assignments, tracked expressions, and iterator
variables.

Lifting is only performed where it cannot change semantics: operands of
``and``/``or`` after the first, conditional-expression branches, lambda
bodies, and generator expressions are left untouched, so calls inside them
execute normally but stay invisible to the trace.
"""

from __future__ import annotations

import ast
import copy
import json
import re

from .. import scopes
from ..errors import EmitError, UnsupportedConstruct
from ..model import StaticInfo, TraceSpec

LABEL_CAP = 80

#: expression contexts whose children are never lifted or matched
_FROZEN = (ast.Lambda, ast.GeneratorExp, ast.SetComp, ast.DictComp, ast.NamedExpr, ast.Await, ast.Yield, ast.YieldFrom)


class RewritePlan:
    """Reserved-name factory; the prefix is guaranteed collision-free."""

    def __init__(self, identifiers: set[str]):
        root = "__tr"
        n = 0
        while any(name.startswith(root) for name in identifiers):
            n += 1
            root = f"__tr{n}"
        self.root = root
        self.runtime_alias = f"{root}_rt"
        self._counters: dict[str, int] = {}

    def fresh(self, family: str = "tmp") -> str:
        k = self._counters.get(family, 0)
        self._counters[family] = k + 1
        return f"{self.root}_{family}_{k}"

    def owns(self, name: str) -> bool:
        return name.startswith(self.root)


def _const(value) -> ast.Constant:
    return ast.Constant(value=value)


def _name(ident: str, store: bool = False) -> ast.Name:
    return ast.Name(id=ident, ctx=ast.Store() if store else ast.Load())


def _at(node: ast.AST, anchor: ast.AST) -> ast.AST:
    ast.copy_location(node, anchor)
    for child in ast.walk(node):
        if not hasattr(child, "lineno"):
            continue
        if getattr(child, "lineno", None) is None:
            ast.copy_location(child, anchor)
    return node


def _short(text: str) -> str:
    return text if len(text) <= LABEL_CAP else text[: LABEL_CAP - 3] + "..."


def _is_synthetic(node: ast.AST) -> bool:
    return bool(getattr(node, "_tr_synthetic", False))


# --- normalization -----------------------------------------------------------


def normalize(tree: ast.Module) -> ast.Module:
    """Separate nested calls into temp assignments; expand list comprehensions.

    Returns a new tree; the input is not modified. The returned tree carries
    the rewrite plan and the temp-origin map used later for tracked-expression
    matching.
    """
    tree = copy.deepcopy(tree)
    plan = RewritePlan(scopes.all_identifiers(tree))
    norm = _Normalizer(plan)
    tree.body = norm.body(tree.body)
    ast.fix_missing_locations(tree)
    tree._tr_plan = plan
    tree._tr_origins = norm.origins
    return tree


class _Normalizer:
    def __init__(self, plan: RewritePlan):
        self.plan = plan
        self.origins: dict[str, str] = {}
        self._origin_pat = re.compile(rf"\b{re.escape(plan.root)}_tmp_\d+\b")

    # statements -------------------------------------------------------------

    def body(self, stmts: list[ast.stmt]) -> list[ast.stmt]:
        out: list[ast.stmt] = []
        for stmt in stmts:
            out.extend(self.stmt(stmt))
        return out

    def stmt(self, node: ast.stmt) -> list[ast.stmt]:
        handler = getattr(self, f"_stmt_{type(node).__name__}", None)
        return handler(node) if handler else [node]

    def _value_stmt(self, node) -> list[ast.stmt]:
        pending: list[ast.stmt] = []
        node.value = self.lift(node.value, pending)
        return [*pending, node]

    def _stmt_Assign(self, node: ast.Assign) -> list[ast.stmt]:
        return self._value_stmt(node)

    def _stmt_AugAssign(self, node: ast.AugAssign) -> list[ast.stmt]:
        return self._value_stmt(node)

    def _stmt_AnnAssign(self, node: ast.AnnAssign) -> list[ast.stmt]:
        return self._value_stmt(node) if node.value is not None else [node]

    def _stmt_Return(self, node: ast.Return) -> list[ast.stmt]:
        return self._value_stmt(node) if node.value is not None else [node]

    def _stmt_Expr(self, node: ast.Expr) -> list[ast.stmt]:
        pending: list[ast.stmt] = []
        if isinstance(node.value, ast.Call):
            # statement-level call is already separated: keep it in place
            node.value = self._lift_call_children(node.value, pending)
        else:
            node.value = self.lift(node.value, pending)
        return [*pending, node]

    def _stmt_If(self, node: ast.If) -> list[ast.stmt]:
        pending: list[ast.stmt] = []
        node.test = self.lift(node.test, pending)
        node.body = self.body(node.body)
        node.orelse = self.body(node.orelse)
        return [*pending, node]

    def _stmt_For(self, node: ast.For) -> list[ast.stmt]:
        pending: list[ast.stmt] = []
        node.iter = self.lift(node.iter, pending)  # evaluated once, safe to hoist
        node.body = self.body(node.body)
        node.orelse = self.body(node.orelse)
        return [*pending, node]

    def _stmt_While(self, node: ast.While) -> list[ast.stmt]:
        has_liftable = any(
            isinstance(sub, (ast.Call, ast.ListComp)) and not _is_synthetic(sub)
            for sub in ast.walk(node.test)
        )
        if has_liftable and not node.orelse:
            # re-evaluate the test each iteration: rotate it into the body
            pending: list[ast.stmt] = []
            new_test = self.lift(node.test, pending)
            breaker = _at(ast.If(test=ast.UnaryOp(op=ast.Not(), operand=new_test), body=[ast.Break()], orelse=[]), node)
            prefix = [*pending, breaker]
            node.test = _at(_const(True), node)
            node.body = [*prefix, *self.body(node.body)]
            node._tr_while_prefix = len(prefix)
            return [node]
        node.body = self.body(node.body)
        node.orelse = self.body(node.orelse)
        return [node]

    def _stmt_FunctionDef(self, node: ast.FunctionDef) -> list[ast.stmt]:
        node.body = self.body(node.body)
        return [node]

    _stmt_AsyncFunctionDef = _stmt_FunctionDef

    def _stmt_Try(self, node: ast.Try) -> list[ast.stmt]:
        node.body = self.body(node.body)
        for handler in node.handlers:
            handler.body = self.body(handler.body)
        node.orelse = self.body(node.orelse)
        node.finalbody = self.body(node.finalbody)
        return [node]

    def _stmt_With(self, node: ast.With) -> list[ast.stmt]:
        node.body = self.body(node.body)
        return [node]

    # expressions ------------------------------------------------------------

    def lift(self, node: ast.expr, pending: list[ast.stmt]) -> ast.expr:
        if isinstance(node, _FROZEN):
            return node
        if isinstance(node, ast.Call):
            return self._lift_Call(node, pending)
        if isinstance(node, ast.ListComp):
            return self._lift_ListComp(node, pending)
        if isinstance(node, ast.BoolOp):
            node.values[0] = self.lift(node.values[0], pending)
            return node  # later operands short-circuit: frozen
        if isinstance(node, ast.IfExp):
            node.test = self.lift(node.test, pending)
            return node  # branches are conditional: frozen
        if isinstance(node, ast.Dict):
            for i, (k, v) in enumerate(zip(node.keys, node.values)):
                if k is not None:
                    node.keys[i] = self.lift(k, pending)
                node.values[i] = self.lift(v, pending)  # interleaved k1,v1,k2,v2
            return node
        if isinstance(node, ast.expr):
            for field, value in ast.iter_fields(node):
                if isinstance(value, ast.expr):
                    setattr(node, field, self.lift(value, pending))
                elif isinstance(value, list):
                    setattr(node, field, [self.lift(v, pending) if isinstance(v, ast.expr) else v for v in value])
        return node

    def _lift_call_children(self, node: ast.Call, pending: list[ast.stmt]) -> ast.Call:
        node.func = self.lift(node.func, pending)
        node.args = [self.lift(a, pending) for a in node.args]
        for kw in node.keywords:
            kw.value = self.lift(kw.value, pending)
        return node

    def _lift_Call(self, node: ast.Call, pending: list[ast.stmt]) -> ast.expr:
        node = self._lift_call_children(node, pending)
        if _is_synthetic(node):
            return node
        tmp = self.plan.fresh("tmp")
        self.origins[tmp] = self._origin_text(node)
        pending.append(_at(ast.Assign(targets=[_name(tmp, store=True)], value=node), node))
        return _at(_name(tmp), node)

    def _lift_ListComp(self, node: ast.ListComp, pending: list[ast.stmt]) -> ast.expr:
        origin = self._origin_text(node)
        tmp = self.plan.fresh("tmp")
        pending.append(_at(ast.Assign(targets=[_name(tmp, store=True)], value=ast.List(elts=[], ctx=ast.Load())), node))
        append = ast.Call(
            func=ast.Attribute(value=_name(tmp), attr="append", ctx=ast.Load()),
            args=[node.elt],
            keywords=[],
        )
        append._tr_synthetic = True
        inner: list[ast.stmt] = [ast.Expr(value=append)]
        for gen in reversed(node.generators):
            if gen.is_async:
                raise UnsupportedConstruct("async comprehensions are not supported", node.lineno)
            for cond in reversed(gen.ifs):
                inner = [ast.If(test=cond, body=inner, orelse=[])]
            inner = [ast.For(target=gen.target, iter=gen.iter, body=inner, orelse=[])]
        for stmt in inner:
            _at(stmt, node)
        ast.fix_missing_locations(inner[0])
        pending.extend(self.body(inner))  # nested calls/comps lift inside the loop
        self.origins[tmp] = origin
        return _at(_name(tmp), node)

    def _origin_text(self, node: ast.expr) -> str:
        text = ast.unparse(node)
        return self._origin_pat.sub(lambda m: self.origins.get(m.group(0), m.group(0)), text)


# --- instrumentation ----------------------------------------------------------


def instrument(tree: ast.Module, spec: TraceSpec, static_info: StaticInfo) -> ast.Module:
    """Insert recorder hooks into a normalized tree.

    The spec must be validated against the same source. Hooks call the
    runtime through a reserved module alias imported in the prologue.
    """
    plan = getattr(tree, "_tr_plan", None) or RewritePlan(scopes.all_identifiers(tree))
    origins = getattr(tree, "_tr_origins", {})
    worker = _Instrumenter(plan, origins, spec, static_info, _import_aliases(tree))
    rest = worker.body(tree.body, scopes.MODULE_SCOPE)
    tree.body = _split_preamble(rest, worker.prologue())
    ast.fix_missing_locations(tree)
    tree._tr_plan = plan
    return tree


def _import_aliases(tree: ast.Module) -> dict[str, str]:
    aliases: dict[str, str] = {}
    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            for alias in node.names:
                aliases[alias.asname or alias.name.split(".")[0]] = alias.name
        elif isinstance(node, ast.ImportFrom) and node.module:
            for alias in node.names:
                if alias.name != "*":
                    aliases[alias.asname or alias.name] = f"{node.module}.{alias.name}"
    return aliases


def _split_preamble(body: list[ast.stmt], prologue: list[ast.stmt]) -> list[ast.stmt]:
    """Keep docstring and __future__ imports ahead of the prologue."""
    idx = 0
    if body and isinstance(body[0], ast.Expr) and isinstance(body[0].value, ast.Constant) and isinstance(body[0].value.value, str):
        idx = 1
    while idx < len(body) and isinstance(body[idx], ast.ImportFrom) and body[idx].module == "__future__":
        idx += 1
    return [*body[:idx], *prologue, *body[idx:]]


class _Instrumenter:
    def __init__(self, plan: RewritePlan, origins: dict[str, str], spec: TraceSpec, static_info: StaticInfo, aliases: dict[str, str]):
        self.plan = plan
        self.origins = origins
        self.spec = spec
        self.static_info = static_info
        self.aliases = aliases
        self.exclusions = set(spec.exclusions)
        self._origin_pat = re.compile(rf"\b{re.escape(plan.root)}_tmp_\d+\b")
        self.tracked: dict[str, set[str]] = {}
        self.expr_targets: list[dict] = []
        for target in spec.targets:
            if target.kind == "variable":
                self.tracked.setdefault(target.scope or "", set()).add(target.name)
            else:
                self.expr_targets.append(
                    {"text": target.name, "line": target.span.start_line if target.span else None, "consumed": False}
                )
        self.customs: dict[str, list] = {}
        for custom in spec.customs:
            self.customs.setdefault(custom.anchor_name, []).append(custom)

    # hook builders -----------------------------------------------------------

    def _rt(self, method: str, *args: ast.expr, **kwargs: ast.expr) -> ast.Call:
        return ast.Call(
            func=ast.Attribute(value=_name(self.plan.runtime_alias), attr=method, ctx=ast.Load()),
            args=list(args),
            keywords=[ast.keyword(arg=k, value=v) for k, v in kwargs.items()],
        )

    def prologue(self) -> list[ast.stmt]:
        meta = json.dumps({"spec": self.spec.to_dict(), "static_info": self.static_info.to_dict()})
        imp = ast.ImportFrom(module="tracelens", names=[ast.alias(name="runtime", asname=self.plan.runtime_alias)], level=0)
        start = ast.Expr(value=self._rt("start", meta_json=_const(meta)))
        for node in (imp, start):
            ast.fix_missing_locations(_at(node, ast.Pass(lineno=1, col_offset=0)))
        return [imp, start]

    def _record_stmt(self, name: str, value: ast.expr, line: int, is_variable: bool, label: str, anchor: ast.AST) -> ast.stmt:
        call = self._rt("record_value", _const(name), value, _const(line), _const(is_variable), _const(label))
        return _at(ast.Expr(value=call), anchor)

    def _custom_stmts(self, anchor_name: str, scope: str, line: int, anchor: ast.AST) -> list[ast.stmt]:
        out = []
        for custom in self.customs.get(anchor_name, []):
            if custom.anchor_scope is not None and custom.anchor_scope != scope:
                continue
            expr = ast.parse(custom.expression_text, mode="eval").body
            thunk = ast.Lambda(args=ast.arguments(posonlyargs=[], args=[], kwonlyargs=[], kw_defaults=[], defaults=[]), body=expr)
            call = self._rt("record_custom", _const(custom.label), _const(line), thunk)
            out.append(_at(ast.Expr(value=call), anchor))
        return out

    def _sub_origins(self, text: str) -> str:
        return self._origin_pat.sub(lambda m: self.origins.get(m.group(0), m.group(0)), text)

    # exclusion ---------------------------------------------------------------

    def _is_excluded(self, dotted: str) -> bool:
        parts = dotted.split(".")
        candidates = {dotted, parts[0], parts[-1]}
        resolved = self.aliases.get(parts[0])
        if resolved:
            candidates.add(resolved)
            candidates.add(resolved.split(".")[0])
        return bool(candidates & self.exclusions)

    # statement walk ----------------------------------------------------------

    def body(self, stmts: list[ast.stmt], scope: str) -> list[ast.stmt]:
        out: list[ast.stmt] = []
        for stmt in stmts:
            out.extend(self.stmt(stmt, scope))
        return out

    def stmt(self, node: ast.stmt, scope: str) -> list[ast.stmt]:
        handler = getattr(self, f"_stmt_{type(node).__name__}", None)
        return handler(node, scope) if handler else [node]

    def _assign_like(self, node: ast.stmt, scope: str) -> list[ast.stmt]:
        hoists = self._expand_expr_targets(node, "value", scope)
        out: list[ast.stmt] = []
        for stmt in [*hoists, node]:
            out.extend(self._hooks_for(stmt, scope))
        return out

    _stmt_Assign = _assign_like
    _stmt_AnnAssign = _assign_like
    _stmt_AugAssign = _assign_like
    _stmt_Expr = _assign_like

    def _stmt_Return(self, node: ast.Return, scope: str) -> list[ast.stmt]:
        if node.value is None:
            return [node]
        hoists = self._expand_expr_targets(node, "value", scope)
        out: list[ast.stmt] = []
        for stmt in hoists:
            out.extend(self._hooks_for(stmt, scope))
        out.append(node)
        return out

    def _stmt_If(self, node: ast.If, scope: str) -> list[ast.stmt]:
        hoists = self._expand_expr_targets(node, "test", scope)
        out: list[ast.stmt] = []
        for stmt in hoists:
            out.extend(self._hooks_for(stmt, scope))
        node.body = self.body(node.body, scope)
        node.orelse = self.body(node.orelse, scope)
        out.append(node)
        return out

    def _stmt_For(self, node: ast.For, scope: str) -> list[ast.stmt]:
        hoists = self._expand_expr_targets(node, "iter", scope)
        out: list[ast.stmt] = []
        for stmt in hoists:
            out.extend(self._hooks_for(stmt, scope))
        lid = self.plan.fresh("l")
        header = _short(f"for {ast.unparse(node.target)} in {ast.unparse(node.iter)}:")
        begin = _at(ast.Assign(targets=[_name(lid, store=True)], value=self._rt("begin_loop", _const(node.lineno), _const(f"{node.lineno}: {header}"))), node)
        iter_records: list[ast.stmt] = []
        for name_node in ast.walk(node.target):
            if isinstance(name_node, ast.Name) and name_node.id in self.tracked.get(scope, set()):
                label = f"{node.lineno}: {header}"
                iter_records.append(self._record_stmt(name_node.id, _name(name_node.id), node.lineno, True, label, node))
                iter_records.extend(self._custom_stmts(name_node.id, scope, node.lineno, node))
        node.body = [
            _at(ast.Expr(value=self._rt("begin_iteration", _name(lid))), node),
            *iter_records,
            *self.body(node.body, scope),
        ]
        node.orelse = self.body(node.orelse, scope)
        end = _at(ast.Expr(value=self._rt("end_loop", _name(lid))), node)
        return [*out, begin, node, end]

    def _stmt_While(self, node: ast.While, scope: str) -> list[ast.stmt]:
        prefix_len = getattr(node, "_tr_while_prefix", 0)
        lid = self.plan.fresh("l")
        header = _short(f"while {ast.unparse(node.test)}:") if not prefix_len else "while ...:"
        begin = _at(ast.Assign(targets=[_name(lid, store=True)], value=self._rt("begin_loop", _const(node.lineno), _const(f"{node.lineno}: {header}"))), node)
        prefix = self.body(node.body[:prefix_len], scope)
        rest = self.body(node.body[prefix_len:], scope)
        node.body = [*prefix, _at(ast.Expr(value=self._rt("begin_iteration", _name(lid))), node), *rest]
        node.orelse = self.body(node.orelse, scope)
        end = _at(ast.Expr(value=self._rt("end_loop", _name(lid))), node)
        return [begin, node, end]

    def _stmt_FunctionDef(self, node: ast.FunctionDef, scope: str) -> list[ast.stmt]:
        if scopes._is_generator(node):
            return [node]  # generator frames interleave; leave uninstrumented
        qual = scopes.child_scope(scope, node.name)
        node.body = self.body(node.body, qual)
        if node.name in self.exclusions or qual in self.exclusions:
            # excluded function: suspend recording for its whole dynamic extent
            suspend = _at(ast.Expr(value=self._rt("push_suspend")), node)
            resume = _at(ast.Expr(value=self._rt("pop_suspend")), node)
            guarded = _at(ast.Try(body=node.body, handlers=[], orelse=[], finalbody=[resume]), node)
            node.body = [suspend, guarded]
        return [node]

    def _stmt_Try(self, node: ast.Try, scope: str) -> list[ast.stmt]:
        node.body = self.body(node.body, scope)
        for handler in node.handlers:
            handler.body = self.body(handler.body, scope)
        node.orelse = self.body(node.orelse, scope)
        node.finalbody = self.body(node.finalbody, scope)
        return [node]

    def _stmt_With(self, node: ast.With, scope: str) -> list[ast.stmt]:
        node.body = self.body(node.body, scope)
        return [node]

    # call brackets + value records --------------------------------------------

    def _hooks_for(self, node: ast.stmt, scope: str) -> list[ast.stmt]:
        before: list[ast.stmt] = []
        after: list[ast.stmt] = []
        value = getattr(node, "value", None)
        if isinstance(value, ast.Call) and not _is_synthetic(value):
            dotted = scopes.dotted_call_name(value.func) or ast.unparse(value.func)
            if not self.plan.owns(dotted.split(".")[0]) and not self._is_excluded(dotted):
                cid = self.plan.fresh("c")
                label = _short(f"{node.lineno}: {self._sub_origins(ast.unparse(value))}")
                before.append(_at(ast.Assign(targets=[_name(cid, store=True)], value=self._rt("enter_call", _const(dotted), _const(node.lineno), _const(label))), node))
                after.append(_at(ast.Expr(value=self._rt("exit_call", _name(cid))), node))
        if isinstance(node, (ast.Assign, ast.AnnAssign, ast.AugAssign)) and getattr(node, "value", None) is not None:
            label = _short(f"{node.lineno}: {self._sub_origins(ast.unparse(node))}")
            targets = node.targets if isinstance(node, ast.Assign) else [node.target]
            for target in targets:
                for name_node in ast.walk(target):
                    if isinstance(name_node, ast.Name) and isinstance(name_node.ctx, ast.Store):
                        if name_node.id in self.tracked.get(scope, set()):
                            after.append(self._record_stmt(name_node.id, _name(name_node.id), node.lineno, True, label, node))
                            after.extend(self._custom_stmts(name_node.id, scope, node.lineno, node))
        return [*before, node, *after]

    # tracked-expression matching -----------------------------------------------

    def _expand_expr_targets(self, node: ast.stmt, attr: str, scope: str) -> list[ast.stmt]:
        if not self.expr_targets:
            return []
        value = getattr(node, attr, None)
        if value is None or not isinstance(value, ast.expr):
            return []
        hoists: list[ast.stmt] = []
        setattr(node, attr, self._match_expr(value, scope, hoists, node))
        return hoists

    def _match_expr(self, node: ast.expr, scope: str, hoists: list[ast.stmt], anchor: ast.stmt) -> ast.expr:
        if isinstance(node, _FROZEN):
            return node
        target = self._matching_target(node)
        if target is not None:
            target["consumed"] = True
            te = self.plan.fresh("e")
            text = target["text"]
            hoists.append(_at(ast.Assign(targets=[_name(te, store=True)], value=node), anchor))
            label = _short(f"{anchor.lineno}: {text}")
            hoists.append(self._record_stmt(text, _name(te), anchor.lineno, False, label, anchor))
            hoists.extend(self._custom_stmts(text, scope, anchor.lineno, anchor))
            return _at(_name(te), node)
        if isinstance(node, ast.BoolOp):
            node.values[0] = self._match_expr(node.values[0], scope, hoists, anchor)
            return node
        if isinstance(node, ast.IfExp):
            node.test = self._match_expr(node.test, scope, hoists, anchor)
            return node
        for field, value in ast.iter_fields(node):
            if isinstance(value, ast.expr):
                setattr(node, field, self._match_expr(value, scope, hoists, anchor))
            elif isinstance(value, list):
                setattr(node, field, [self._match_expr(v, scope, hoists, anchor) if isinstance(v, ast.expr) else v for v in value])
        return node

    def _matching_target(self, node: ast.expr) -> dict | None:
        line = getattr(node, "lineno", None)
        if line is None:
            return None
        live = [t for t in self.expr_targets if not t["consumed"] and (t["line"] is None or t["line"] == line)]
        if not live:
            return None
        try:
            text = self._origin_pat.sub(lambda m: self.origins.get(m.group(0), m.group(0)), ast.unparse(node))
        except Exception:  # pragma: no cover
            return None
        for target in live:
            if target["text"] == text:
                return target
        return None


# --- emit ----------------------------------------------------------------------


def emit(tree: ast.Module) -> str:
    """Unparse an instrumented tree into runnable source text."""
    ast.fix_missing_locations(tree)
    try:
        text = ast.unparse(tree)
        compile(text, "<instrumented>", "exec")
    except Exception as exc:
        raise EmitError(f"emitted source does not compile: {exc}") from exc
    return text + "\n"
