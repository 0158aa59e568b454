"""Static info collection: spans and the direct-dependency map."""

import ast

from tracelens.instrument import collect_static_info
from tracelens.instrument.static import loop_key


def test_function_span_trivial():
    info = collect_static_info("def f():\n    pass\n")
    assert set(info.function_spans) == {"f"}
    span = info.function_spans["f"]
    assert (span.start_line, span.end_line) == (1, 2)


def test_assignment_rhs_names_and_calls():
    info = collect_static_info("def g():\n    return 1\nx = 0\ny = x + g()\n")
    assert info.direct_deps["y"] == frozenset({"x", "g"})


def test_straightline_program_matches_naive_walker():
    lines = ["a0 = 1"]
    for i in range(1, 20):
        lines.append(f"a{i} = a{i-1} + {i}")
    src = "\n".join(lines) + "\n"
    info = collect_static_info(src)

    # independent oracle: a second, regex-free walk of the tree
    oracle: dict[str, set[str]] = {}
    for stmt in ast.parse(src).body:
        assert isinstance(stmt, ast.Assign)
        target = stmt.targets[0].id
        reads = {n.id for n in ast.walk(stmt.value) if isinstance(n, ast.Name)}
        oracle.setdefault(target, set()).update(reads)

    assert {k: set(v) for k, v in info.direct_deps.items()} == oracle


def test_scope_qualified_keys():
    src = "def fib(n):\n    val = fib(n - 1) + fib(n - 2)\n    return val\n"
    info = collect_static_info(src)
    assert info.direct_deps["fib.val"] == frozenset({"fib", "fib.n"})


def test_aug_assign_reads_itself():
    info = collect_static_info("x = 0\nx += 2\n")
    assert "x" in info.direct_deps["x"]


def test_for_target_depends_on_iterable():
    info = collect_static_info("xs = [1]\nfor i in xs:\n    y = i\n")
    assert info.direct_deps["i"] == frozenset({"xs"})
    assert info.direct_deps["y"] == frozenset({"i"})


def test_loop_spans_cover_both_loop_kinds():
    src = "for i in range(3):\n    pass\nwhile False:\n    pass\n"
    info = collect_static_info(src)
    assert loop_key(1) in info.loop_spans
    assert loop_key(3) in info.loop_spans
    assert info.loop_spans[loop_key(1)].end_line == 2


def test_method_calls_keep_dotted_name():
    info = collect_static_info("import helpers\nz = helpers.compute(4)\n")
    assert "helpers.compute" in info.direct_deps["z"]
    assert "helpers" in info.direct_deps["z"]


def test_comprehension_targets_collected():
    info = collect_static_info("xs = [1, 2]\nys = [k * 2 for k in xs]\n")
    assert info.direct_deps["k"] == frozenset({"xs"})
    assert "k" in info.direct_deps["ys"]
