"""Hook insertion: call brackets, loop counters, tracked values, exclusions."""

import io
import subprocess
import sys
from contextlib import redirect_stdout

import tracelens as tl
from tracelens.instrument import instrument_source
from tracelens.model import CustomExpression, TraceSpec, TrackTarget


def _trace(src, targets=(), customs=(), exclusions=(), use_defaults=True, exprs=()):
    spec = TraceSpec.build(
        targets=[*(TrackTarget(t) if isinstance(t, str) else t for t in targets),
                 *(TrackTarget(e, kind="expression") for e in exprs)],
        customs=customs,
        extra_exclusions=exclusions,
        subject_entry="subject.py",
        use_default_exclusions=use_defaults,
    )
    trace, stdout, err = tl.trace_in_process(src, spec, "subject.py")
    assert err is None, err
    return trace, stdout


def test_excluded_print_emits_no_hooks():
    prog = instrument_source("print(42)\n", TraceSpec.build(subject_entry="s.py"), "s.py")
    assert "enter_call" not in prog.source
    assert "print(42)" in prog.source


def test_plain_program_differs_only_by_prologue():
    src = "a = 1\nb = a + 2\n"
    prog = instrument_source(src, TraceSpec.build(use_default_exclusions=True), "s.py")
    lines = [l for l in prog.source.splitlines() if l]
    assert lines[0].startswith("from tracelens import runtime as")
    assert lines[1].endswith(")") and ".start(" in lines[1]
    assert lines[2:] == ["a = 1", "b = a + 2"]


def test_traced_call_bracketed_enter_then_exit():
    src = "def f(v):\n    return v\nx = f(1)\n"
    prog = instrument_source(src, TraceSpec.build(), "s.py")
    lines = prog.source.splitlines()
    idx_call = next(i for i, l in enumerate(lines) if "= f(1)" in l and "enter_call" not in l)
    assert "enter_call" in lines[idx_call - 1]
    assert "exit_call" in lines[idx_call + 1]


def test_fib_invocations_match_manual_counter(fib_src):
    # oracle: run an uninstrumented copy with a manual counter
    counter = {"calls": 0, "assigns": 0}
    oracle_src = fib_src.replace("def fib(n):", "def fib(n):\n    counter['calls'] += 1")
    oracle_src = oracle_src.replace("val = 1", "val = 1; counter['assigns'] += 1")
    oracle_src = oracle_src.replace("val = fib(n - 1) + fib(n - 2)", "val = fib(n - 1) + fib(n - 2); counter['assigns'] += 1")
    with redirect_stdout(io.StringIO()):
        exec(compile(oracle_src, "<oracle>", "exec"), {"counter": counter})

    trace, _ = _trace(fib_src, targets=["val"])
    calls = [n for n in trace.root.walk() if n.type == "call"]
    records = [n for n in trace.root.walk() if n.type == "tracked"]
    assert len(calls) == counter["calls"] == 25
    assert len(records) == counter["assigns"] == 25


def test_tracked_expression_fires_exactly_once():
    src = (
        "hits = []\n"
        "def bump(v):\n"
        "    hits.append(v)\n"
        "    return v\n"
        "acc = 0\n"
        "for i in range(3):\n"
        "    acc = acc + bump(i)\n"
        "print(len(hits))\n"
    )
    trace, stdout = _trace(src, targets=["acc"], exprs=["bump(i)"])
    assert stdout.strip() == "3"  # side effect fired once per original evaluation
    expr_records = [n for n in trace.values if n.is_variable is False]
    assert [r.value for r in expr_records] == [0, 1, 2]
    assert all(r.name == "bump(i)" for r in expr_records)


def test_tracked_expression_without_calls():
    src = "a = 2\nb = 3\nc = a + b * 2\nprint(c)\n"
    trace, _ = _trace(src, exprs=["b * 2"])
    (rec,) = [n for n in trace.values if n.name == "b * 2"]
    assert rec.value == 6
    assert rec.is_variable is False


def test_exclusion_suppresses_whole_dynamic_extent():
    src = (
        "def inner():\n"
        "    x = 1\n"
        "    return x\n"
        "def noisy():\n"
        "    y = inner()\n"
        "    return y\n"
        "a = noisy()\n"
        "b = inner()\n"
        "print(a, b)\n"
    )
    trace, _ = _trace(src, targets=[TrackTarget("x", scope="inner")], exclusions=["noisy"])
    call_names = [n.name for n in trace.root.walk() if n.type == "call"]
    assert "noisy" not in call_names
    assert call_names.count("inner") == 1  # only the direct, non-excluded call
    assert len(trace.values) == 1  # x recorded only outside noisy's extent


def test_iterator_variable_recorded_per_iteration():
    src = "for i in range(4):\n    pass\n"
    trace, _ = _trace(src, targets=[TrackTarget("i", scope="")])
    records = [(n.value, n.iteration) for n in trace.values]
    assert records == [(0, 0), (1, 1), (2, 2), (3, 3)]


def test_custom_expression_recorded_at_anchor_points():
    src = "xs = []\nfor i in range(3):\n    xs = xs + [i]\nprint(xs)\n"
    customs = [CustomExpression("length", "len(xs)", "xs")]
    trace, _ = _trace(src, targets=[TrackTarget("xs", scope="")], customs=customs)
    probes = [n.value for n in trace.customs]
    assert probes == [0, 1, 2, 3]


def test_custom_expression_error_becomes_sentinel_value():
    src = "x = 0\nx = 1\n"
    customs = [CustomExpression("bad", "1 // x", "x")]
    trace, _ = _trace(src, targets=[TrackTarget("x", scope="")], customs=customs)
    first, second = [n.value for n in trace.customs]
    assert "ZeroDivisionError" in first
    assert second == 1


def test_emit_identity_for_hook_free_tree(corpus_files):
    from tracelens.instrument import emit
    from tracelens.scopes import parse_source

    src = corpus_files[2].read_text()
    emitted = emit(parse_source(src))
    before, after = io.StringIO(), io.StringIO()
    with redirect_stdout(before):
        exec(compile(src, "a", "exec"), {"__name__": "__main__"})
    with redirect_stdout(after):
        exec(compile(emitted, "b", "exec"), {"__name__": "__main__"})
    assert before.getvalue() == after.getvalue()


def _subject_output(path_or_src, instrumented: bool, tmp_path, track=""):
    """Run a subject in a child interpreter; returns (stdout, returncode)."""
    import tracelens.service as service

    if instrumented:
        targets = [TrackTarget(track)] if track else []
        spec = TraceSpec.build(targets=targets, subject_entry="prog.py")
        prog = instrument_source(path_or_src, spec, "prog.py")
        text = prog.source
    else:
        text = path_or_src
    prog_path = tmp_path / ("inst.py" if instrumented else "orig.py")
    prog_path.write_text(text)
    import os

    env = dict(os.environ)
    env["TRACELENS_TRACE_PATH"] = str(tmp_path / "t.json")
    env["PYTHONPATH"] = service._package_root() + os.pathsep + env.get("PYTHONPATH", "")
    proc = subprocess.run([sys.executable, str(prog_path)], capture_output=True, text=True, env=env, timeout=60)
    return proc.stdout, proc.returncode


def test_differential_execution_on_corpus_sample(corpus_files, tmp_path):
    for path in corpus_files[:10]:
        src = path.read_text()
        track = src.splitlines()[0].split(":", 1)[1].strip()
        out_orig, rc_orig = _subject_output(src, False, tmp_path)
        out_inst, rc_inst = _subject_output(src, True, tmp_path, track=track)
        assert out_orig == out_inst, path.name
        assert rc_orig == rc_inst == 0, path.name


def test_loop_blocks_only_for_executed_loops():
    src = "for x in []:\n    y = 1\nprint('ok')\n"
    trace, stdout = _trace(src)
    loops = [n for n in trace.root.walk() if n.type == "loop"]
    assert len(loops) == 1
    assert loops[0].children == []  # zero iterations


def test_scope_selective_tracking():
    src = (
        "def first():\n"
        "    x = 1\n"
        "    return x\n"
        "def second():\n"
        "    x = 2\n"
        "    return x\n"
        "print(first() + second())\n"
    )
    trace, _ = _trace(src, targets=[TrackTarget("x", scope="second")])
    assert [(n.name, n.value) for n in trace.values] == [("x", 2)]


def test_crash_marks_open_blocks_aborted():
    src = "def f():\n    x = 1\n    raise RuntimeError('bang')\nf()\n"
    spec = TraceSpec.build(targets=[TrackTarget("x", scope="f")], subject_entry="s.py")
    trace, stdout, err = tl.trace_in_process(src, spec, "s.py")
    assert isinstance(err, RuntimeError)
    assert trace.aborted
    aborted = [n for n in trace.root.walk() if n.aborted]
    assert any(n.type == "call" for n in aborted)


def test_tracked_expression_containing_a_call_matches_after_separation():
    src = "def f():\n    return 5\n\nx = 2 * f()\nprint(x)\n"
    trace, stdout = _trace(src, exprs=["2 * f()"])
    assert stdout.strip() == "10"
    (rec,) = [n for n in trace.values if n.is_variable is False]
    assert (rec.name, rec.value) == ("2 * f()", 10)


def test_future_imports_stay_ahead_of_prologue():
    src = '"""doc."""\nfrom __future__ import annotations\n\ndef f(v: int) -> int:\n    y = v + 1\n    return y\n\nprint(f(1))\n'
    prog = instrument_source(src, TraceSpec.build(targets=[TrackTarget("y")], subject_entry="s.py"), "s.py")
    lines = prog.source.splitlines()
    assert lines[1] == "from __future__ import annotations"
    assert "runtime" in lines[2]
    trace, stdout = _trace(src, targets=["y"])
    assert stdout.strip() == "2"


def test_reserved_prefix_collision_end_to_end():
    src = "__tr_tmp_0 = 3\ndef g():\n    return __tr_tmp_0\nz = g() * 2\nprint(z)\n"
    trace, stdout = _trace(src, targets=[TrackTarget("z", scope="")])
    assert stdout.strip() == "6"
    assert [(n.name, n.value) for n in trace.values] == [("z", 6)]


def test_generator_functions_pass_through():
    src = (
        "def gen(n):\n"
        "    for i in range(n):\n"
        "        yield i\n"
        "total = 0\n"
        "for v in gen(3):\n"
        "    total = total + v\n"
        "print(total)\n"
    )
    trace, stdout = _trace(src, targets=[TrackTarget("total", scope="")])
    assert stdout.strip() == "3"
    assert [n.value for n in trace.values] == [0, 0, 1, 3]
