"""Independent oracle implementations for the property and example tests.

Everything here deliberately avoids the production query paths: trees are
compared field by field, subtree membership chases parent pointers, and
dependency candidates come from an explicit tree walk. Random generators are
seeded by the caller for reproducibility.
"""

from __future__ import annotations

import ast
import random

from tracelens.model import Trace, TraceNode, TraceSpec


def trees_equal(a: TraceNode, b: TraceNode) -> bool:
    """Structural equality, written independently of TraceNode.__eq__."""
    fields = ("id", "type", "line", "ts", "parent_id", "label", "name", "value", "has_value", "iteration", "is_variable", "aborted")
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        for f in fields:
            vx, vy = getattr(x, f), getattr(y, f)
            # NaN-safe: sentinels are strings, so plain != is sound here
            if vx != vy:
                return False
        if len(x.children) != len(y.children):
            return False
        stack.extend(zip(x.children, y.children))
    return True


def definition_sites(source: str) -> list[tuple[str, str, int]]:
    """(scope, name, line) for every binding, by a direct recursive walk."""
    tree = ast.parse(source)
    sites: list[tuple[str, str, int]] = []

    def names_in(target):
        for node in ast.walk(target):
            if isinstance(node, ast.Name):
                yield node.id

    def visit(node, scope):
        for child in ast.iter_child_nodes(node):
            if isinstance(child, ast.FunctionDef):
                sites.append((scope, child.name, child.lineno))
                inner = child.name if not scope else f"{scope}.{child.name}"
                for arg in child.args.args:
                    sites.append((inner, arg.arg, arg.lineno))
                visit(child, inner)
            elif isinstance(child, ast.ClassDef):
                sites.append((scope, child.name, child.lineno))
            elif isinstance(child, ast.Assign):
                for t in child.targets:
                    for n in names_in(t):
                        sites.append((scope, n, child.lineno))
                visit(child, scope)
            elif isinstance(child, (ast.AugAssign, ast.AnnAssign)):
                for n in names_in(child.target):
                    sites.append((scope, n, child.lineno))
                visit(child, scope)
            elif isinstance(child, ast.For):
                for n in names_in(child.target):
                    sites.append((scope, n, child.lineno))
                visit(child, scope)
            else:
                visit(child, scope)

    visit(tree, "")
    return sites


def subtree_rows(trace: Trace, name: str, root_id: int) -> list[int]:
    """Value record ids under ``root_id``, by explicit parent chasing."""
    by_id = {n.id: n for n in trace.root.walk()}
    out = []
    for node in trace.root.walk():
        if node.type not in ("tracked", "custom") or node.name != name:
            continue
        cursor = node
        while cursor is not None:
            if cursor.id == root_id:
                out.append(node.id)
                break
            cursor = by_id.get(cursor.parent_id) if cursor.parent_id is not None else None
    return sorted(out)


def dependency_candidates(trace: Trace, block_id: int) -> list[TraceNode]:
    """Prior siblings of the block and of each of its ancestors, tree-walked."""
    by_id = {n.id: n for n in trace.root.walk()}
    node = by_id[block_id]
    out: list[TraceNode] = []
    current = node
    while current.parent_id is not None:
        parent = by_id[current.parent_id]
        for sibling in parent.children:
            if sibling.ts < current.ts:
                out.append(sibling)
        current = parent
    return out


def runtime_deps_bruteforce(trace: Trace, closure: frozenset[str], block_id: int) -> set[int]:
    bases = {c.split(".")[-1] for c in closure}
    out = set()
    for cand in dependency_candidates(trace, block_id):
        name = cand.name
        if not name:
            continue
        if name in closure or name.split(".")[-1] in bases:
            out.add(cand.id)
    return out


# --- random generators ------------------------------------------------------------


def random_trace(rng: random.Random, max_blocks: int = 500) -> Trace:
    """Random well-formed trace: structural skeleton plus tracked/custom leaves."""
    n_blocks = rng.randint(1, max_blocks)
    root = TraceNode(0, "root", 0, 0, None, label="<root>")
    open_path = [root]
    next_id, clock = 1, 1
    names = ["alpha", "beta", "gamma"]
    values = [0, 1, -3.5, 2.25, True, False, None, "text", "__NaN__", "__Inf__", "__-Inf__", "__obj__[1, 2]"]

    while next_id < n_blocks:
        parent = open_path[-1]
        roll = rng.random()
        if roll < 0.35:
            kind = rng.choice(["call", "loop"])
            node = TraceNode(next_id, kind, rng.randint(1, 60), clock, parent.id, label=f"{kind}-{next_id}",
                             name=rng.choice(["f", "g", "h"]) if kind == "call" else None)
            parent.children.append(node)
            open_path.append(node)
        elif roll < 0.5 and parent.type == "loop":
            idx = sum(1 for c in parent.children if c.type == "iteration")
            node = TraceNode(next_id, "iteration", parent.line, clock, parent.id, label=f"iter {idx}", iteration=idx)
            parent.children.append(node)
            open_path.append(node)
        elif roll < 0.85:
            itr = None
            for anc in reversed(open_path):
                if anc.type == "iteration":
                    itr = anc.iteration
                    break
                if anc.type in ("call", "root"):
                    break
            node = TraceNode(next_id, "tracked", rng.randint(1, 60), clock, parent.id, label="rec",
                             name=rng.choice(names), value=rng.choice(values), has_value=True,
                             iteration=itr, is_variable=rng.random() < 0.8)
            parent.children.append(node)
        elif roll < 0.9:
            node = TraceNode(next_id, "custom", rng.randint(1, 60), clock, parent.id, label="probe",
                             name="probe", value=rng.choice(values), has_value=True)
            parent.children.append(node)
        else:
            if len(open_path) > 1:
                open_path.pop()
                clock += 1
            continue
        next_id += 1
        clock += 1
        if len(open_path) > 12:  # keep depth bounded
            open_path.pop()
            clock += 1
    return Trace(spec=TraceSpec(), root=root)


ARITH_OPS = ["+", "-", "*"]


def random_program(rng: random.Random, max_statements: int = 30) -> tuple[str, list[str]]:
    """Small runnable program with functions, loops, and assignments.

    Returns (source, module_variable_names). Every generated variable is
    numeric so the subject always runs cleanly.
    """
    lines: list[str] = []
    n_funcs = rng.randint(1, 3)
    func_names = [f"fn{i}" for i in range(n_funcs)]
    budget = max_statements

    for i, fname in enumerate(func_names):
        lines.append(f"def {fname}(a):")
        body_n = rng.randint(1, 3)
        local = ["a"]
        for _ in range(body_n):
            target = f"t{rng.randint(0, 2)}"
            expr = _rand_expr(rng, local, func_names[:i])
            lines.append(f"    {target} = {expr}")
            local.append(target)
            budget -= 1
        lines.append(f"    return {rng.choice(local)} % 97")
        budget -= 2

    module_vars: list[str] = []
    available: list[str] = []
    n_top = max(3, budget - 4)
    for i in range(n_top):
        if rng.random() < 0.25 and available:
            loop_var = f"i{i}"
            lines.append(f"for {loop_var} in range({rng.randint(1, 4)}):")
            target = f"v{i}"
            expr = _rand_expr(rng, available + [loop_var], func_names)
            lines.append(f"    {target} = {expr}")
        else:
            target = f"v{i}"
            expr = _rand_expr(rng, available, func_names)
            lines.append(f"{target} = {expr}")
        available.append(target)
        module_vars.append(target)
    lines.append("print(" + ", ".join(module_vars[-3:]) + ")")
    return "\n".join(lines) + "\n", module_vars


def _rand_expr(rng: random.Random, names: list[str], funcs: list[str]) -> str:
    terms: list[str] = []
    for _ in range(rng.randint(1, 3)):
        roll = rng.random()
        if roll < 0.4 and names:
            terms.append(rng.choice(names))
        elif roll < 0.6 and funcs:
            arg = rng.choice(names) if names and rng.random() < 0.6 else str(rng.randint(0, 9))
            terms.append(f"{rng.choice(funcs)}({arg})")
        else:
            terms.append(str(rng.randint(0, 9)))
    expr = terms[0]
    for term in terms[1:]:
        expr = f"{expr} {rng.choice(ARITH_OPS)} {term}"
    return expr
