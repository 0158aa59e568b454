"""Relational view of a trace and the declarative queries behind every plot.

The hierarchy is flattened into SQLite tables: ``block`` holds structural
blocks (root/call/loop/iteration), ``tracked`` the recorded variable and
expression occurrences, ``function_name`` and ``for_loop`` extra facts per
block type, and ``custom`` the custom-expression records. Each node also
gets a precomputed (enter, exit) preorder interval so subtree membership is
a single comparison.

Values keep SQLite's natural ordering (numbers sort before text), which
makes range filters total: every row falls on one side of a cut, so
disjoint filters partition results even when sentinels or strings are
present.
"""

from __future__ import annotations

import sqlite3
from dataclasses import dataclass, field
from typing import Any, Iterable

from .errors import (
    Incompatible,
    InvalidPlotKind,
    SchemaViolation,
    TooManyGroups,
    UnknownBlock,
    UnknownName,
)
from .instrument.static import loop_key
from .model import (
    STRUCTURAL_TYPES,
    Trace,
    TraceNode,
    is_nonfinite_sentinel,
    is_opaque,
)

SCHEMA_VERSION = 1
DEFAULT_GROUP_CAP = 50

PLOT_KINDS = ("histogram", "bar", "scatter", "parallel_coordinates", "small_multiples", "box")

QUANTITATIVE = "Q"
NOMINAL = "N"
OPAQUE = "O"

_SCHEMA = """
CREATE TABLE block (
    id INTEGER PRIMARY KEY,
    type TEXT NOT NULL,
    line INTEGER NOT NULL,
    ts INTEGER NOT NULL,
    parent_id INTEGER,
    label TEXT NOT NULL DEFAULT '',
    aborted INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE tracked (
    id INTEGER PRIMARY KEY,
    name TEXT NOT NULL,
    line INTEGER NOT NULL,
    ts INTEGER NOT NULL,
    value,
    value_kind TEXT NOT NULL,
    parent_id INTEGER NOT NULL,
    iteration INTEGER,
    is_variable INTEGER NOT NULL,
    label TEXT NOT NULL DEFAULT ''
);
CREATE TABLE function_name (
    block_id INTEGER PRIMARY KEY,
    name TEXT NOT NULL
);
CREATE TABLE for_loop (
    block_id INTEGER PRIMARY KEY,
    span TEXT,
    n_iterations INTEGER NOT NULL
);
CREATE TABLE custom (
    id INTEGER PRIMARY KEY,
    label TEXT NOT NULL,
    ts INTEGER NOT NULL,
    value,
    value_kind TEXT NOT NULL,
    parent_id INTEGER NOT NULL,
    line INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE node_interval (
    id INTEGER PRIMARY KEY,
    enter INTEGER NOT NULL,
    exit INTEGER NOT NULL,
    depth INTEGER NOT NULL
);
CREATE TABLE meta (key TEXT PRIMARY KEY, value TEXT);
CREATE INDEX idx_tracked_name ON tracked(name);
CREATE INDEX idx_tracked_parent ON tracked(parent_id);
CREATE INDEX idx_block_parent ON block(parent_id);
"""


def _encode_value(value: Any) -> tuple[Any, str]:
    """(stored value, kind tag). Lossless: decode inverts exactly."""
    if value is None:
        return "None", "none"
    if isinstance(value, bool):
        return ("True" if value else "False"), "bool"
    if isinstance(value, int):
        return value, "int"
    if isinstance(value, float):
        return value, "float"
    if is_nonfinite_sentinel(value):
        return value, "sentinel"
    if is_opaque(value):
        return value, "opaque"
    return value, "str"


def _decode_value(stored: Any, kind: str) -> Any:
    if kind == "none":
        return None
    if kind == "bool":
        return stored == "True"
    if kind == "int":
        return int(stored)
    if kind == "float":
        return float(stored)
    return stored


@dataclass(frozen=True)
class ValueRow:
    id: int
    name: str
    line: int
    ts: int
    value: Any
    parent_id: int
    iteration: int | None


@dataclass(frozen=True)
class Filters:
    """Conjunctive row filters: value range, id set, subtree root."""

    value_min: Any = None
    value_max: Any = None
    ids: frozenset[int] | None = None
    subtree_root: int | None = None

    @classmethod
    def from_dict(cls, d: dict | None) -> "Filters":
        d = d or {}
        ids = d.get("ids")
        return cls(
            value_min=d.get("value_min"),
            value_max=d.get("value_max"),
            ids=frozenset(ids) if ids is not None else None,
            subtree_root=d.get("subtree_root"),
        )


@dataclass(frozen=True)
class GroupBy:
    kind: str  # "loop" | "name"
    key: Any  # loop header line | tracked name

    @classmethod
    def from_dict(cls, d: dict | None) -> "GroupBy | None":
        if not d:
            return None
        return cls(d["kind"], d["key"])


@dataclass(frozen=True)
class PlotQuery:
    """Declarative description of a value query behind one plot."""

    names: tuple[str, ...]
    plot_kind: str
    with_time: bool = False
    filters: Filters = field(default_factory=Filters)
    group_by: GroupBy | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "PlotQuery":
        return cls(
            names=tuple(d["names"]),
            plot_kind=d["plot_kind"],
            with_time=bool(d.get("with_time", False)),
            filters=Filters.from_dict(d.get("filters")),
            group_by=GroupBy.from_dict(d.get("group_by")),
        )


def allowed_plots(signature: tuple[str, ...], grouped: bool = False) -> frozenset[str]:
    """Admissible plot kinds for a data-type signature.

    Ungrouped: Q -> histogram, N -> bar, QxQ -> scatter, three or more Q ->
    parallel coordinates. Grouped N/Q/QxQ -> small multiples, with box plots
    additionally available for grouped single-Q data.
    """
    if OPAQUE in signature or not signature:
        return frozenset()
    if grouped:
        if signature == (QUANTITATIVE,):
            return frozenset({"small_multiples", "box"})
        if signature in ((NOMINAL,), (QUANTITATIVE, QUANTITATIVE)):
            return frozenset({"small_multiples"})
        return frozenset()
    if signature == (QUANTITATIVE,):
        return frozenset({"histogram"})
    if signature == (NOMINAL,):
        return frozenset({"bar"})
    if signature == (QUANTITATIVE, QUANTITATIVE):
        return frozenset({"scatter"})
    if len(signature) >= 3 and set(signature) == {QUANTITATIVE}:
        return frozenset({"parallel_coordinates"})
    return frozenset()


class TraceStore:
    """Read-only after ingest; queries are safe to run concurrently."""

    def __init__(self, path: str = ":memory:"):
        self._db = sqlite3.connect(path, check_same_thread=False)
        self._db.executescript(_SCHEMA)
        self._db.execute("INSERT INTO meta VALUES ('schema_version', ?)", (str(SCHEMA_VERSION),))
        self._type_cache: dict[str, str] = {}

    @classmethod
    def open(cls, path: str) -> "TraceStore":
        """Reopen a persisted store; the schema version must match."""
        store = cls.__new__(cls)
        store._db = sqlite3.connect(path, check_same_thread=False)
        store._type_cache = {}
        try:
            row = store._db.execute("SELECT value FROM meta WHERE key='schema_version'").fetchone()
        except sqlite3.OperationalError as exc:
            raise SchemaViolation(f"{path} is not a trace store: {exc}") from exc
        if row is None or row[0] != str(SCHEMA_VERSION):
            raise SchemaViolation(f"{path} has schema version {row[0] if row else None!r}, need {SCHEMA_VERSION}")
        return store

    @classmethod
    def ingest(cls, trace: Trace, path: str = ":memory:") -> "TraceStore":
        """Flatten a hierarchical trace into the relational tables."""
        store = cls(path)
        db = store._db
        counter = 0

        def walk(node: TraceNode, depth: int) -> int:
            nonlocal counter
            enter = counter
            counter += 1
            if node.type in STRUCTURAL_TYPES:
                db.execute(
                    "INSERT INTO block VALUES (?,?,?,?,?,?,?)",
                    (node.id, node.type, node.line, node.ts, node.parent_id, node.label, int(node.aborted)),
                )
                if node.type == "call":
                    db.execute("INSERT INTO function_name VALUES (?,?)", (node.id, node.name or ""))
            elif node.type == "tracked":
                stored, kind = _encode_value(node.value)
                db.execute(
                    "INSERT INTO tracked VALUES (?,?,?,?,?,?,?,?,?,?)",
                    (node.id, node.name, node.line, node.ts, stored, kind, node.parent_id, node.iteration, int(bool(node.is_variable)), node.label),
                )
            elif node.type == "custom":
                stored, kind = _encode_value(node.value)
                db.execute(
                    "INSERT INTO custom VALUES (?,?,?,?,?,?,?)",
                    (node.id, node.name or node.label, node.ts, stored, kind, node.parent_id, node.line),
                )
            else:  # pragma: no cover - model validation rejects these
                raise SchemaViolation(f"unknown block type {node.type!r}")
            for child in node.children:
                walk(child, depth + 1)
            db.execute("INSERT INTO node_interval VALUES (?,?,?,?)", (node.id, enter, counter, depth))
            return counter

        walk(trace.root, 0)
        for row in db.execute("SELECT id, line FROM block WHERE type='loop'").fetchall():
            block_id, line = row
            n_iter = db.execute("SELECT COUNT(*) FROM block WHERE parent_id=? AND type='iteration'", (block_id,)).fetchone()[0]
            span = trace.static_info.loop_spans.get(loop_key(line))
            span_text = f"{span.start_line}-{span.end_line}" if span else None
            db.execute("INSERT INTO for_loop VALUES (?,?,?)", (block_id, span_text, n_iter))
        db.commit()
        return store

    # --- hierarchy -----------------------------------------------------------

    def reconstruct(self) -> TraceNode:
        """Rebuild the block tree from parent ids (root outward)."""
        nodes: dict[int, TraceNode] = {}
        for id_, type_, line, ts, parent_id, label, aborted in self._db.execute(
            "SELECT id,type,line,ts,parent_id,label,aborted FROM block"
        ):
            nodes[id_] = TraceNode(id_, type_, line, ts, parent_id, label, aborted=bool(aborted))
        for block_id, name in self._db.execute("SELECT block_id,name FROM function_name"):
            nodes[block_id].name = name
        for id_, name, line, ts, value, kind, parent_id, iteration, is_var, label in self._db.execute(
            "SELECT id,name,line,ts,value,value_kind,parent_id,iteration,is_variable,label FROM tracked"
        ):
            nodes[id_] = TraceNode(
                id_, "tracked", line, ts, parent_id, label,
                name=name, value=_decode_value(value, kind), has_value=True,
                iteration=iteration, is_variable=bool(is_var),
            )
        for id_, label, ts, value, kind, parent_id, line in self._db.execute(
            "SELECT id,label,ts,value,value_kind,parent_id,line FROM custom"
        ):
            nodes[id_] = TraceNode(
                id_, "custom", line, ts, parent_id, label,
                name=label, value=_decode_value(value, kind), has_value=True,
            )
        root = None
        for node in sorted(nodes.values(), key=lambda n: n.id):
            if node.parent_id is None:
                root = node
            else:
                nodes[node.parent_id].children.append(node)
        if root is None:
            raise SchemaViolation("no root block")
        # iteration indices are consecutive from 0 within each loop: derive them
        for node in nodes.values():
            if node.type == "loop":
                for idx, child in enumerate(c for c in node.children if c.type == "iteration"):
                    child.iteration = idx
        return root

    def interval(self, node_id: int) -> tuple[int, int]:
        row = self._db.execute("SELECT enter, exit FROM node_interval WHERE id=?", (node_id,)).fetchone()
        if row is None:
            raise UnknownBlock(f"no block with id {node_id}")
        return row

    def node_brief(self, node_id: int) -> dict | None:
        row = self._db.execute("SELECT id,type,line,ts,parent_id,label,aborted FROM block WHERE id=?", (node_id,)).fetchone()
        if row:
            d = dict(zip(("id", "type", "line", "ts", "parent_id", "label", "aborted"), row))
            if d["type"] == "call":
                fn = self._db.execute("SELECT name FROM function_name WHERE block_id=?", (node_id,)).fetchone()
                d["name"] = fn[0] if fn else None
            return d
        row = self._db.execute(
            "SELECT id,name,line,ts,value,value_kind,parent_id,iteration,is_variable FROM tracked WHERE id=?", (node_id,)
        ).fetchone()
        if row:
            d = dict(zip(("id", "name", "line", "ts", "value", "value_kind", "parent_id", "iteration", "is_variable"), row))
            d["type"] = "tracked"
            d["value"] = _decode_value(d.pop("value"), d.pop("value_kind"))
            return d
        row = self._db.execute("SELECT id,label,ts,value,value_kind,parent_id,line FROM custom WHERE id=?", (node_id,)).fetchone()
        if row:
            d = dict(zip(("id", "label", "ts", "value", "value_kind", "parent_id", "line"), row))
            d["type"] = "custom"
            d["value"] = _decode_value(d.pop("value"), d.pop("value_kind"))
            return d
        return None

    # --- value queries -----------------------------------------------------------

    def names(self) -> list[str]:
        tracked = [r[0] for r in self._db.execute("SELECT DISTINCT name FROM tracked")]
        customs = [r[0] for r in self._db.execute("SELECT DISTINCT label FROM custom")]
        return sorted({*tracked, *customs})

    def _table_for(self, name: str) -> str:
        """Value queries serve tracked records and custom-expression records alike."""
        if self._db.execute("SELECT 1 FROM tracked WHERE name=? LIMIT 1", (name,)).fetchone():
            return "tracked"
        if self._db.execute("SELECT 1 FROM custom WHERE label=? LIMIT 1", (name,)).fetchone():
            return "custom"
        raise UnknownName(f"no tracked or custom records named {name!r}")

    def _require_name(self, name: str) -> None:
        self._table_for(name)

    def select_values(self, name: str, filters: Filters | None = None) -> list[ValueRow]:
        """All records of one name, timestamp-ordered, filters conjunctive."""
        table = self._table_for(name)
        filters = filters or Filters()
        if table == "tracked":
            sql = [
                "SELECT t.id, t.name, t.line, t.ts, t.value, t.value_kind, t.parent_id, t.iteration FROM tracked t"
            ]
            name_clause = "t.name = ?"
        else:
            sql = [
                "SELECT t.id, t.label, t.line, t.ts, t.value, t.value_kind, t.parent_id, NULL FROM custom t"
            ]
            name_clause = "t.label = ?"
        args: list[Any] = []
        where = [name_clause]
        args.append(name)
        if filters.subtree_root is not None:
            enter, exit_ = self.interval(filters.subtree_root)
            sql.append("JOIN node_interval ni ON ni.id = t.id")
            where.append("ni.enter >= ? AND ni.exit <= ?")
            args.extend([enter, exit_])
        if filters.value_min is not None:
            where.append("t.value >= ?")
            args.append(filters.value_min)
        if filters.value_max is not None:
            where.append("t.value <= ?")
            args.append(filters.value_max)
        if filters.ids is not None:
            placeholders = ",".join("?" for _ in filters.ids) or "NULL"
            where.append(f"t.id IN ({placeholders})")
            args.extend(sorted(filters.ids))
        sql.append("WHERE " + " AND ".join(where))
        sql.append("ORDER BY t.ts")
        rows = self._db.execute(" ".join(sql), args).fetchall()
        return [
            ValueRow(r[0], r[1], r[2], r[3], _decode_value(r[4], r[5]), r[6], r[7])
            for r in rows
        ]

    def value_type(self, name: str) -> str:
        """Q if every finite value parses as a number, N otherwise, O if opaque."""
        if name in self._type_cache:
            return self._type_cache[name]
        table = self._table_for(name)
        kind = QUANTITATIVE
        key_column = "name" if table == "tracked" else "label"
        for (value, vkind) in self._db.execute(f"SELECT value, value_kind FROM {table} WHERE {key_column}=?", (name,)):
            if vkind == "opaque":
                kind = OPAQUE
                break
            if vkind in ("int", "float", "sentinel"):
                continue
            try:
                float(value)
            except (TypeError, ValueError):
                kind = NOMINAL
                break
        self._type_cache[name] = kind
        return kind

    def value_stats(self, name: str) -> dict:
        """Aggregates used by color scales and axes: numeric extent + counts."""
        rows = self.select_values(name)
        nums = [r.value for r in rows if isinstance(r.value, (int, float)) and not isinstance(r.value, bool)]
        nonfinite = sum(1 for r in rows if is_nonfinite_sentinel(r.value))
        return {
            "name": name,
            "count": len(rows),
            "n_nonfinite": nonfinite,
            "min": min(nums) if nums else None,
            "max": max(nums) if nums else None,
            "type": self.value_type(name),
        }

    def signature(self, names: Iterable[str], with_time: bool = False) -> tuple[str, ...]:
        sig = tuple(self.value_type(n) for n in names)
        if with_time:
            sig = sig + (QUANTITATIVE,)
        return sig

    # --- join / group / subtree -----------------------------------------------------

    def join_values(self, names: list[str], within: int | None = None) -> list[dict]:
        """Align variables 1-1 under their minimal common-ancestor instances.

        Returns one tuple per instance: ``{"instance": block_id, "ts": ...,
        "rows": {name: ValueRow}}``. Raises Incompatible, naming the failing
        pair, when any instance does not hold exactly one record of each name.
        """
        if not names:
            return []
        unique = list(dict.fromkeys(names))
        base_filter = Filters(subtree_root=within) if within is not None else Filters()
        if len(unique) == 1:
            rows = self.select_values(unique[0], base_filter)
            return [{"instance": r.parent_id, "ts": r.ts, "rows": {n: r for n in names}} for r in rows]

        rows_by_name = {n: self.select_values(n, base_filter) for n in unique}
        for n, rows in rows_by_name.items():
            if not rows:
                raise Incompatible(f"{n!r} has no records to join", (unique[0], n))

        parents = self._parent_map()
        # count per ancestor how many records of each name it contains
        counts: dict[int, dict[str, int]] = {}
        for n, rows in rows_by_name.items():
            for row in rows:
                cursor: int | None = row.parent_id
                while cursor is not None:
                    counts.setdefault(cursor, {}).setdefault(n, 0)
                    counts[cursor][n] += 1
                    cursor = parents.get(cursor)

        with_all = [b for b, c in counts.items() if all(c.get(n) for n in unique)]
        if not with_all:
            raise Incompatible(f"{unique[0]!r} and {unique[1]!r} share no common ancestor", (unique[0], unique[1]))
        intervals = {b: self.interval(b) for b in with_all}
        minimal = [
            b for b in with_all
            if not any(
                other != b
                and intervals[other][0] >= intervals[b][0]
                and intervals[other][1] <= intervals[b][1]
                for other in with_all
            )
        ]

        out = []
        for block in minimal:
            per_name = {}
            for n in unique:
                enter, exit_ = intervals[block]
                inside = [
                    r for r in rows_by_name[n]
                    if enter <= self.interval(r.id)[0] < exit_
                ]
                if len(inside) != 1:
                    raise Incompatible(
                        f"{unique[0]!r} and {n!r} are not 1-1 within block {block} ({len(inside)} instances of {n!r})",
                        (unique[0], n),
                    )
                per_name[n] = inside[0]
            ts = min(r.ts for r in per_name.values())
            out.append({"instance": block, "ts": ts, "rows": {n: per_name[n] for n in names}})
        out.sort(key=lambda t: t["ts"])
        return out

    def group_values(self, name: str, splitter: GroupBy, cap: int = DEFAULT_GROUP_CAP, filters: Filters | None = None) -> list[dict]:
        """Split one name's rows by loop instances or by another name's value.

        Groups are ordered by first timestamp; their union is exactly the
        ungrouped selection (rows outside every splitter instance fall into a
        residual group).
        """
        rows = self.select_values(name, filters)
        if splitter.kind == "loop":
            instances = [
                r[0] for r in self._db.execute(
                    "SELECT id FROM block WHERE type='loop' AND line=? ORDER BY ts", (int(splitter.key),)
                )
            ]
            if not instances:
                raise UnknownBlock(f"no loop at line {splitter.key}")
            spans = {b: self.interval(b) for b in instances}
            groups: dict[Any, list[ValueRow]] = {b: [] for b in instances}
            residual: list[ValueRow] = []
            for row in rows:
                enter = self.interval(row.id)[0]
                for b in instances:
                    if spans[b][0] <= enter < spans[b][1]:
                        groups[b].append(row)
                        break
                else:
                    residual.append(row)
            out = [
                {"key": f"instance {i}", "block": b, "rows": groups[b]}
                for i, b in enumerate(instances)
            ]
            if residual:
                out.append({"key": "(outside)", "block": None, "rows": residual})
        elif splitter.kind == "name":
            keys_rows = self.select_values(str(splitter.key))
            groups_by_key: dict[Any, list[ValueRow]] = {}
            order: list[Any] = []
            for row in rows:
                current = None
                for krow in keys_rows:  # key = splitter's value in effect at row time
                    if krow.ts <= row.ts:
                        current = krow.value
                    else:
                        break
                key = "(unset)" if current is None and not any(k.ts <= row.ts for k in keys_rows) else current
                if key not in groups_by_key:
                    groups_by_key[key] = []
                    order.append(key)
                groups_by_key[key].append(row)
            out = [{"key": k, "block": None, "rows": groups_by_key[k]} for k in order]
        else:
            raise SchemaViolation(f"unknown splitter kind {splitter.kind!r}")
        if len(out) > cap:
            raise TooManyGroups(f"{len(out)} groups exceeds cap {cap}")
        return out

    def subtree_values(self, name: str, root_id: int, include_parent_context: bool = False) -> dict:
        """Rows of ``name`` inside the subtree at ``root_id``; optionally the
        rows under the parent's subtree as context."""
        rows = self.select_values(name, Filters(subtree_root=root_id))
        context: list[ValueRow] = []
        if include_parent_context:
            brief = self.node_brief(root_id)
            if brief is None:
                raise UnknownBlock(f"no block with id {root_id}")
            parent = brief.get("parent_id")
            if parent is not None:
                context = self.select_values(name, Filters(subtree_root=parent))
        return {"rows": rows, "context": context}

    def blocks_for_values(self, row_ids: Iterable[int]) -> set[int]:
        """Value records are leaf blocks: the mapping is identity, validated."""
        ids = set(row_ids)
        if not ids:
            return set()
        placeholders = ",".join("?" for _ in ids)
        found = {
            r[0] for r in self._db.execute(f"SELECT id FROM tracked WHERE id IN ({placeholders})", sorted(ids))
        }
        found |= {
            r[0] for r in self._db.execute(f"SELECT id FROM custom WHERE id IN ({placeholders})", sorted(ids))
        }
        return found

    def values_for_blocks(self, block_ids: Iterable[int], name: str) -> list[ValueRow]:
        """Records of ``name`` inside any of the given blocks' subtrees."""
        out: dict[int, ValueRow] = {}
        for block_id in block_ids:
            for row in self.select_values(name, Filters(subtree_root=block_id)):
                out[row.id] = row
        return sorted(out.values(), key=lambda r: r.ts)

    # --- helpers --------------------------------------------------------------------

    def _parent_map(self) -> dict[int, int | None]:
        parents: dict[int, int | None] = {}
        for id_, parent in self._db.execute("SELECT id, parent_id FROM block"):
            parents[id_] = parent
        for id_, parent in self._db.execute("SELECT id, parent_id FROM tracked"):
            parents[id_] = parent
        for id_, parent in self._db.execute("SELECT id, parent_id FROM custom"):
            parents[id_] = parent
        return parents

    def children_of(self, block_id: int) -> list[dict]:
        rows = []
        for table, sql in (
            ("block", "SELECT id, ts FROM block WHERE parent_id=?"),
            ("tracked", "SELECT id, ts FROM tracked WHERE parent_id=?"),
            ("custom", "SELECT id, ts FROM custom WHERE parent_id=?"),
        ):
            rows.extend((r[0], r[1]) for r in self._db.execute(sql, (block_id,)))
        rows.sort(key=lambda r: r[1])
        return [self.node_brief(r[0]) for r in rows]

    def counts(self) -> dict:
        return {
            "blocks": self._db.execute("SELECT COUNT(*) FROM block").fetchone()[0],
            "tracked": self._db.execute("SELECT COUNT(*) FROM tracked").fetchone()[0],
            "custom": self._db.execute("SELECT COUNT(*) FROM custom").fetchone()[0],
        }

    def loop_instances(self, line: int) -> list[int]:
        return [r[0] for r in self._db.execute("SELECT id FROM block WHERE type='loop' AND line=? ORDER BY ts", (line,))]

    # --- plot resolution ---------------------------------------------------------------

    def resolve_plot(self, query: PlotQuery, group_cap: int = DEFAULT_GROUP_CAP) -> dict:
        """Resolve a PlotQuery into data-only payload (rows + axis metadata)."""
        for name in query.names:
            self._require_name(name)
        grouped = query.group_by is not None
        sig = self.signature(query.names, query.with_time)
        allowed = allowed_plots(sig, grouped)
        if query.plot_kind not in allowed:
            raise InvalidPlotKind(
                f"plot {query.plot_kind!r} not allowed for signature {'x'.join(sig) or '()'}"
                f"{' grouped' if grouped else ''}; allowed: {sorted(allowed)}"
            )
        payload: dict = {
            "kind": query.plot_kind,
            "names": list(query.names),
            "signature": list(sig),
            "allowed": sorted(allowed),
            "grouped": grouped,
        }
        if grouped:
            groups = self.group_values(query.names[0], query.group_by, cap=group_cap, filters=query.filters)
            payload["groups"] = [
                {"key": str(g["key"]), "block": g["block"], "rows": [_row_dict(r) for r in g["rows"]]}
                for g in groups
            ]
        elif len(query.names) == 1:
            rows = self.select_values(query.names[0], query.filters)
            payload["rows"] = [_row_dict(r) for r in rows]
            payload["stats"] = self.value_stats(query.names[0])
        else:
            tuples = self.join_values(list(query.names), within=query.filters.subtree_root)
            payload["tuples"] = [
                {
                    "instance": t["instance"],
                    "ts": t["ts"],
                    "values": [_row_dict(t["rows"][n]) for n in query.names],
                }
                for t in tuples
            ]
        return payload


def _row_dict(row: ValueRow) -> dict:
    return {
        "id": row.id,
        "name": row.name,
        "line": row.line,
        "ts": row.ts,
        "value": row.value,
        "parent_id": row.parent_id,
        "iteration": row.iteration,
    }
