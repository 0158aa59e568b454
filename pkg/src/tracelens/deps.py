"""Dependency closure plus runtime filtering against the execution tree.

Static side: transitive closure over the direct-dependency graph collected
from assignment right-hand sides. Runtime side: of a selected record's prior
siblings and its ancestors' prior siblings, keep the blocks whose name is in
the closure. This is an over-approximation by design; it narrows the
candidates rather than computing a precise dynamic slice.
"""

from __future__ import annotations

from .errors import NotATrackedBlock, UnknownBlock, UnknownVariable
from .model import StaticInfo
from .store import TraceStore


def transitive_deps(static_info: StaticInfo, variable: str) -> frozenset[str]:
    """Least fixed point of direct dependencies reachable from ``variable``.

    ``variable`` is scope-qualified (``fib.val``). Terminates on cyclic
    graphs; the result contains variables and functions, all qualified.
    """
    graph = static_info.direct_deps
    if variable not in graph and variable not in static_info.function_spans:
        raise UnknownVariable(f"{variable!r} is not assigned or defined in the source")
    closure: set[str] = set()
    frontier = list(graph.get(variable, ()))
    while frontier:
        name = frontier.pop()
        if name in closure:
            continue
        closure.add(name)
        frontier.extend(graph.get(name, ()))
    return frozenset(closure)


def qualified_name(static_info: StaticInfo, name: str, line: int) -> str:
    """Scope-qualify a record name by its line's innermost enclosing function."""
    best = None
    best_size = None
    for qual, span in static_info.function_spans.items():
        if span.start_line <= line <= span.end_line:
            size = span.end_line - span.start_line
            if best_size is None or size < best_size:
                best, best_size = qual, size
    return f"{best}.{name}" if best else name


def closure_for_block(static_info: StaticInfo, store: TraceStore, block_id: int) -> frozenset[str]:
    """Dependency closure of the variable/expression behind a tracked block."""
    brief = store.node_brief(block_id)
    if brief is None:
        raise UnknownBlock(f"no block with id {block_id}")
    if brief["type"] != "tracked":
        raise NotATrackedBlock(f"block {block_id} is a {brief['type']} block, not a tracked record")
    qualified = qualified_name(static_info, brief["name"], brief["line"])
    try:
        return transitive_deps(static_info, qualified)
    except UnknownVariable:
        if qualified != brief["name"]:
            return transitive_deps(static_info, brief["name"])
        raise


def runtime_deps(store: TraceStore, closure: frozenset[str], block_id: int) -> set[int]:
    """Blocks the selected record may depend on, given runtime context.

    Candidates are the record's prior siblings and the prior siblings of each
    of its ancestors; of those, keep blocks (calls and tracked records) whose
    name appears in the closure.
    """
    brief = store.node_brief(block_id)
    if brief is None:
        raise UnknownBlock(f"no block with id {block_id}")
    if brief["type"] != "tracked":
        raise NotATrackedBlock(f"block {block_id} is a {brief['type']} block, not a tracked record")

    bases = {name.split(".")[-1] for name in closure}
    out: set[int] = set()
    current = brief
    while current["parent_id"] is not None:
        parent_id = current["parent_id"]
        for sibling in store.children_of(parent_id):
            if sibling["ts"] >= current["ts"]:
                continue
            name = sibling.get("name")
            if not name:
                continue  # loops/iterations carry no dependency name
            if name in closure or name.split(".")[-1] in bases:
                out.add(sibling["id"])
        current = store.node_brief(parent_id)
    return out
