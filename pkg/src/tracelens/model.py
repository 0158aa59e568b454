"""Core domain types, the trace specification, and the on-disk trace format.

The hierarchical trace file is JSON with one object per block:
``{id, type, line, ts, parent, label, children[], value?, name?, iter?, is_var?}``
under a top-level ``format_version``. Non-finite numbers are encoded as
reserved string sentinels so they survive the interchange format; compound
values are recorded as a truncated textual rendering behind an opaque-value
prefix and are not plottable.
"""

from __future__ import annotations

import ast
import json
import math
from dataclasses import dataclass, field, replace
from typing import Any, Iterator

from . import scopes
from .errors import MalformedTrace, SpecValidationError

FORMAT_VERSION = 1

NAN = "__NaN__"
POS_INF = "__Inf__"
NEG_INF = "__-Inf__"
NONFINITE_SENTINELS = (NAN, POS_INF, NEG_INF)
OPAQUE_PREFIX = "__obj__"
OPAQUE_RENDER_CAP = 256

#: Functions and libraries ignored by default; extensible per spec.
DEFAULT_EXCLUSIONS = ("math", "numpy", "print", "len")

BLOCK_TYPES = ("root", "call", "loop", "iteration", "tracked", "custom")
#: Block types that live in the relational ``block`` table.
STRUCTURAL_TYPES = ("root", "call", "loop", "iteration")


def coerce_value(value: Any) -> Any:
    """Snapshot a runtime value as a scalar payload.

    Numbers keep their value except non-finite floats, which become reserved
    sentinels. Strings, booleans, and None pass through. Anything else is
    rendered textually, capped, and marked opaque.
    """
    if value is None or isinstance(value, (bool, str, int)):
        return value
    if isinstance(value, float):
        if math.isnan(value):
            return NAN
        if math.isinf(value):
            return POS_INF if value > 0 else NEG_INF
        return value
    return OPAQUE_PREFIX + repr(value)[:OPAQUE_RENDER_CAP]


def is_nonfinite_sentinel(value: Any) -> bool:
    return isinstance(value, str) and value in NONFINITE_SENTINELS


def is_opaque(value: Any) -> bool:
    return isinstance(value, str) and value.startswith(OPAQUE_PREFIX)


@dataclass(frozen=True)
class SourceSpan:
    file: str
    start_line: int  # 1-based
    end_line: int
    start_col: int = 0  # 0-based
    end_col: int = 0

    def __post_init__(self):
        if self.start_line > self.end_line:
            raise ValueError("span start_line > end_line")
        if self.start_line < 1 or self.start_col < 0 or self.end_col < 0:
            raise ValueError("span out of range")

    def to_dict(self) -> dict:
        return {
            "file": self.file,
            "start_line": self.start_line,
            "end_line": self.end_line,
            "start_col": self.start_col,
            "end_col": self.end_col,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SourceSpan":
        return cls(d["file"], d["start_line"], d["end_line"], d.get("start_col", 0), d.get("end_col", 0))


@dataclass(frozen=True)
class TrackTarget:
    """One variable or expression the user asked to record."""

    name: str
    kind: str = "variable"  # variable | expression
    scope: str | None = None  # qualified scope path; None = resolve automatically
    span: SourceSpan | None = None

    def __post_init__(self):
        if self.kind not in ("variable", "expression"):
            raise ValueError(f"bad target kind {self.kind!r}")
        if self.kind == "variable" and not self.name.isidentifier():
            raise ValueError(f"variable target {self.name!r} is not an identifier")

    def to_dict(self) -> dict:
        d: dict = {"name": self.name, "kind": self.kind}
        if self.scope is not None:
            d["scope"] = self.scope
        if self.span is not None:
            d["span"] = self.span.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrackTarget":
        span = SourceSpan.from_dict(d["span"]) if d.get("span") else None
        return cls(d["name"], d.get("kind", "variable"), d.get("scope"), span)


@dataclass(frozen=True)
class CustomExpression:
    """Auxiliary expression evaluated at its anchor target's recording points."""

    label: str
    expression_text: str
    anchor_name: str
    anchor_scope: str | None = None

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "expression_text": self.expression_text,
            "anchor_name": self.anchor_name,
            "anchor_scope": self.anchor_scope,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CustomExpression":
        return cls(d["label"], d["expression_text"], d["anchor_name"], d.get("anchor_scope"))


@dataclass(frozen=True)
class TraceSpec:
    """What to record and what to ignore when tracing a subject program."""

    targets: tuple[TrackTarget, ...] = ()
    customs: tuple[CustomExpression, ...] = ()
    exclusions: tuple[str, ...] = DEFAULT_EXCLUSIONS
    subject_entry: str = "<subject>"

    @classmethod
    def build(
        cls,
        targets=(),
        customs=(),
        extra_exclusions=(),
        subject_entry="<subject>",
        use_default_exclusions=True,
    ) -> "TraceSpec":
        base = DEFAULT_EXCLUSIONS if use_default_exclusions else ()
        seen = list(dict.fromkeys([*base, *extra_exclusions]))
        return cls(tuple(targets), tuple(customs), tuple(seen), subject_entry)

    def to_dict(self) -> dict:
        return {
            "targets": [t.to_dict() for t in self.targets],
            "customs": [c.to_dict() for c in self.customs],
            "exclusions": list(self.exclusions),
            "subject_entry": self.subject_entry,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TraceSpec":
        return cls(
            tuple(TrackTarget.from_dict(t) for t in d.get("targets", [])),
            tuple(CustomExpression.from_dict(c) for c in d.get("customs", [])),
            tuple(d.get("exclusions", DEFAULT_EXCLUSIONS)),
            d.get("subject_entry", "<subject>"),
        )

    def variable_names_in_scope(self, scope: str) -> set[str]:
        return {t.name for t in self.targets if t.kind == "variable" and t.scope == scope}


@dataclass(frozen=True)
class StaticInfo:
    """Per-source facts: function/loop spans and the direct-dependency map.

    ``direct_deps`` maps a scope-qualified assignment target to the
    scope-qualified variables and functions read on its right-hand sides.
    """

    function_spans: dict[str, SourceSpan] = field(default_factory=dict)
    loop_spans: dict[str, SourceSpan] = field(default_factory=dict)
    direct_deps: dict[str, frozenset[str]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "function_spans": {k: v.to_dict() for k, v in self.function_spans.items()},
            "loop_spans": {k: v.to_dict() for k, v in self.loop_spans.items()},
            "direct_deps": {k: sorted(v) for k, v in self.direct_deps.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StaticInfo":
        return cls(
            {k: SourceSpan.from_dict(v) for k, v in d.get("function_spans", {}).items()},
            {k: SourceSpan.from_dict(v) for k, v in d.get("loop_spans", {}).items()},
            {k: frozenset(v) for k, v in d.get("direct_deps", {}).items()},
        )


@dataclass
class TraceNode:
    """One node of the execution hierarchy.

    Structural nodes (root/call/loop/iteration) may have children; tracked
    and custom records are leaves carrying a value payload.
    """

    id: int
    type: str
    line: int
    ts: int
    parent_id: int | None
    label: str = ""
    children: list["TraceNode"] = field(default_factory=list)
    name: str | None = None
    value: Any = None
    has_value: bool = False  # distinguishes value=None from no value
    iteration: int | None = None
    is_variable: bool | None = None
    aborted: bool = False

    def to_dict(self) -> dict:
        d: dict = {
            "id": self.id,
            "type": self.type,
            "line": self.line,
            "ts": self.ts,
            "parent": self.parent_id,
            "label": self.label,
            "children": [c.to_dict() for c in self.children],
        }
        if self.name is not None:
            d["name"] = self.name
        if self.has_value:
            d["value"] = self.value
        if self.iteration is not None:
            d["iter"] = self.iteration
        if self.is_variable is not None:
            d["is_var"] = self.is_variable
        if self.aborted:
            d["aborted"] = True
        return d

    @classmethod
    def from_dict(cls, d: dict, parent_id: int | None = None) -> "TraceNode":
        for key in ("id", "type", "line", "ts"):
            if key not in d:
                raise MalformedTrace(f"block missing {key!r}")
        if d["type"] not in BLOCK_TYPES:
            raise MalformedTrace(f"unknown block type {d['type']!r}")
        if d.get("parent") != parent_id:
            raise MalformedTrace(f"block {d['id']}: parent field {d.get('parent')} != enclosing {parent_id}")
        node = cls(
            id=d["id"],
            type=d["type"],
            line=d["line"],
            ts=d["ts"],
            parent_id=d.get("parent"),
            label=d.get("label", ""),
            name=d.get("name"),
            value=d.get("value"),
            has_value="value" in d,
            iteration=d.get("iter"),
            is_variable=d.get("is_var"),
            aborted=bool(d.get("aborted", False)),
        )
        node.children = [cls.from_dict(c, d["id"]) for c in d.get("children", [])]
        return node

    def walk(self) -> Iterator["TraceNode"]:
        """Depth-first, left-to-right; iterative so deep traces cannot blow the stack."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


@dataclass
class Trace:
    """A complete recorded execution: spec, block hierarchy, static facts."""

    spec: TraceSpec
    root: TraceNode
    static_info: StaticInfo = field(default_factory=StaticInfo)
    aborted: bool = False
    truncated: bool = False

    @property
    def blocks(self) -> list[TraceNode]:
        return [n for n in self.root.walk() if n.type in STRUCTURAL_TYPES]

    @property
    def values(self) -> list[TraceNode]:
        return [n for n in self.root.walk() if n.type == "tracked"]

    @property
    def customs(self) -> list[TraceNode]:
        return [n for n in self.root.walk() if n.type == "custom"]

    def node(self, node_id: int) -> TraceNode | None:
        for n in self.root.walk():
            if n.id == node_id:
                return n
        return None


def empty_trace(spec: TraceSpec | None = None) -> Trace:
    return Trace(spec or TraceSpec(), TraceNode(0, "root", 0, 0, None, label="<root>"))


# --- serialization -----------------------------------------------------------


def serialize_trace(trace: Trace) -> bytes:
    _check_tree(trace.root)
    doc = {
        "format_version": FORMAT_VERSION,
        "aborted": trace.aborted,
        "truncated": trace.truncated,
        "spec": trace.spec.to_dict(),
        "static_info": trace.static_info.to_dict(),
        "root": trace.root.to_dict(),
    }
    # sentinels keep the payload strictly JSON-safe; reject stray non-finites
    return json.dumps(doc, allow_nan=False, separators=(",", ":")).encode("utf-8")


def deserialize_trace(data: bytes | str) -> Trace:
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedTrace(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "root" not in doc:
        raise MalformedTrace("missing top-level root block")
    if doc.get("format_version") != FORMAT_VERSION:
        raise MalformedTrace(f"unsupported format_version {doc.get('format_version')!r}")
    root = TraceNode.from_dict(doc["root"])
    trace = Trace(
        spec=TraceSpec.from_dict(doc.get("spec", {})),
        root=root,
        static_info=StaticInfo.from_dict(doc.get("static_info", {})),
        aborted=bool(doc.get("aborted", False)),
        truncated=bool(doc.get("truncated", False)),
    )
    _check_tree(root)
    return trace


def _check_tree(root: TraceNode) -> None:
    """Well-formedness: unique ids, one root, parents precede children, ts strictly increasing in DFS order."""
    if root.type != "root" or root.parent_id is not None:
        raise MalformedTrace("top block must be a parentless root")
    seen: set[int] = set()
    last_ts = -1
    for node in root.walk():
        if node.id in seen:
            raise MalformedTrace(f"duplicate id {node.id}")
        seen.add(node.id)
        if node.ts <= last_ts:
            raise MalformedTrace(f"timestamp not increasing at id {node.id}")
        last_ts = node.ts
        for child in node.children:
            if child.parent_id != node.id:
                raise MalformedTrace(f"block {child.id} parent mismatch")
            if child.id <= node.id:
                raise MalformedTrace(f"child id {child.id} does not follow parent {node.id}")
        if node.type in ("tracked", "custom") and node.children:
            raise MalformedTrace(f"record {node.id} must be a leaf")


# --- spec validation ---------------------------------------------------------


@dataclass(frozen=True)
class SpecError:
    code: str  # UnresolvableTarget | DuplicateTarget
    message: str
    name: str
    scope: str | None = None

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "name": self.name, "scope": self.scope}


def validate_spec(spec: TraceSpec, source: str, filename: str = "<subject>") -> TraceSpec:
    """Resolve every target to a unique scope + definition span.

    Variables must name a binding in their claimed scope; with no scope
    given, the name must bind in exactly one scope. Expression targets must
    parse and are anchored to the line where the text occurs.

    Raises SpecValidationError listing every failed target.
    """
    tree = scopes.parse_source(source, filename)
    table = scopes.build_scope_table(tree)
    errors: list[SpecError] = []
    resolved: list[TrackTarget] = []
    seen: set[tuple[str, str]] = set()

    for target in spec.targets:
        if target.kind == "variable":
            out = _resolve_variable(target, table, filename, errors)
        else:
            out = _resolve_expression(target, tree, table, filename, errors)
        if out is None:
            continue
        key = (out.name, out.scope or "")
        if key in seen:
            errors.append(SpecError("DuplicateTarget", f"duplicate target {out.name!r} in scope {out.scope!r}", out.name, out.scope))
            continue
        seen.add(key)
        resolved.append(out)

    for custom in spec.customs:
        candidates = [
            t for t in resolved
            if t.name == custom.anchor_name and custom.anchor_scope in (None, t.scope)
        ]
        if not candidates:
            errors.append(SpecError("UnresolvableTarget", f"custom expression {custom.label!r} anchors to untracked {custom.anchor_name!r}", custom.anchor_name, custom.anchor_scope))
            continue
        try:
            expr = ast.parse(custom.expression_text, mode="eval")
        except SyntaxError:
            errors.append(SpecError("UnresolvableTarget", f"custom expression {custom.label!r} does not parse", custom.anchor_name, custom.anchor_scope))
            continue
        # the expression may reference only names visible in the anchor's scope
        import builtins

        scope = candidates[0].scope or ""
        for node in ast.walk(expr):
            if isinstance(node, ast.Name) and isinstance(node.ctx, ast.Load):
                if table.resolve(node.id, scope) is None and not hasattr(builtins, node.id):
                    errors.append(SpecError("UnresolvableTarget", f"custom expression {custom.label!r} reads {node.id!r}, not visible from scope {scope!r}", custom.anchor_name, scope))
                    break

    if errors:
        raise SpecValidationError(errors)
    return replace(spec, targets=tuple(resolved))


def _resolve_variable(target: TrackTarget, table: scopes.ScopeTable, filename: str, errors: list[SpecError]) -> TrackTarget | None:
    if target.scope is not None:
        binding = table.lookup(target.name, target.scope)
        if binding is None:
            errors.append(SpecError("UnresolvableTarget", f"variable {target.name!r} is never bound in scope {target.scope!r}", target.name, target.scope))
            return None
        scope = target.scope
    else:
        defining = table.scopes_defining(target.name)
        if not defining:
            errors.append(SpecError("UnresolvableTarget", f"variable {target.name!r} is never bound", target.name, None))
            return None
        if len(defining) > 1:
            listing = ", ".join(repr(s or "<module>") for s in sorted(defining))
            errors.append(SpecError("UnresolvableTarget", f"variable {target.name!r} binds in several scopes ({listing}); qualify one", target.name, None))
            return None
        scope = defining[0]
        binding = table.lookup(target.name, scope)
    span = SourceSpan(filename, binding.line, binding.end_line, binding.col, binding.end_col)
    return replace(target, scope=scope, span=span)


def _resolve_expression(target: TrackTarget, tree: ast.Module, table: scopes.ScopeTable, filename: str, errors: list[SpecError]) -> TrackTarget | None:
    try:
        wanted = ast.unparse(ast.parse(target.name, mode="eval").body)
    except SyntaxError:
        errors.append(SpecError("UnresolvableTarget", f"expression {target.name!r} does not parse", target.name, target.scope))
        return None
    line_hint = target.span.start_line if target.span else None
    hit = None
    for node in ast.walk(tree):
        if not isinstance(node, ast.expr) or not hasattr(node, "lineno"):
            continue
        if line_hint is not None and node.lineno != line_hint:
            continue
        try:
            if ast.unparse(node) == wanted:
                hit = node
                break
        except Exception:  # pragma: no cover - unparse of odd nodes
            continue
    if hit is None:
        where = f" at line {line_hint}" if line_hint else ""
        errors.append(SpecError("UnresolvableTarget", f"expression {wanted!r} not found in source{where}", target.name, target.scope))
        return None
    span = SourceSpan(filename, hit.lineno, hit.end_lineno or hit.lineno, hit.col_offset, hit.end_col_offset or 0)
    scope = target.scope if target.scope is not None else table.scope_of_line(hit.lineno)
    return replace(target, name=wanted, scope=scope, span=span)
