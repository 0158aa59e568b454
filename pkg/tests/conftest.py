import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

CORPUS_DIR = Path(__file__).parent / "corpus"

FIB_SRC = """\
def fib(n):
    if n <= 2:
        val = 1
    else:
        val = fib(n - 1) + fib(n - 2)
    return val

print(fib(7))
"""


@pytest.fixture
def fib_src() -> str:
    return FIB_SRC


@pytest.fixture
def corpus_files() -> list[Path]:
    files = sorted(CORPUS_DIR.glob("*.py"))
    assert len(files) >= 15, "corpus must hold at least 15 subject programs"
    return files


@pytest.fixture
def fib_trace(fib_src):
    import tracelens as tl

    spec = tl.TraceSpec.build(targets=[tl.TrackTarget("val")], subject_entry="fib.py")
    trace, stdout, err = tl.trace_in_process(fib_src, spec, "fib.py")
    assert err is None
    return trace
