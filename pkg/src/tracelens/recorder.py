"""In-memory block-tree builder driven by instrumentation hooks.

The recorder owns the open-block stack. Because calls are separated into
their own statements before instrumentation, all bookkeeping for a call
completes before the next call executes, so the stack discipline is simple:
enter pushes, exit pops back to the matching id (closing any loop or
iteration blocks a ``return``/``break`` jumped out of).

Single-threaded by contract: any hook from a second thread raises.
"""

from __future__ import annotations

import json
import os
import threading
from typing import Any, Callable

from .errors import SinkIOError, StackMismatch, TraceTooLarge
from .model import (
    StaticInfo,
    Trace,
    TraceNode,
    TraceSpec,
    coerce_value,
    serialize_trace,
)

DEFAULT_EVENT_CAP = 1_000_000

#: id returned by enter hooks while recording is suspended (excluded extent)
SUSPENDED = -1

CUSTOM_ERROR_PREFIX = "__error__"


class Recorder:
    def __init__(self, sink: str | None = None, event_cap: int = DEFAULT_EVENT_CAP):
        self.sink = sink
        self.event_cap = event_cap
        self.truncated = False
        self.finalized = False
        self._thread = threading.get_ident()
        self._root = TraceNode(id=0, type="root", line=0, ts=0, parent_id=None, label="<root>")
        self._nodes: dict[int, TraceNode] = {0: self._root}
        self._stack: list[int] = [0]
        self._next_id = 1
        self._clock = 1
        self._loop_counters: dict[int, int] = {}
        self._suspend_depth = 0
        self._spec = TraceSpec()
        self._static_info = StaticInfo()

    # --- bookkeeping ----------------------------------------------------------

    def set_meta(self, meta: dict) -> None:
        if "spec" in meta:
            self._spec = TraceSpec.from_dict(meta["spec"])
        if "static_info" in meta:
            self._static_info = StaticInfo.from_dict(meta["static_info"])
        self._root.label = self._spec.subject_entry

    def _check_thread(self) -> None:
        if threading.get_ident() != self._thread:
            raise StackMismatch("recorder used from a second thread; subjects must be single-threaded")

    def _tick(self) -> int:
        ts = self._clock
        self._clock += 1
        return ts

    def _new_node(self, type_: str, line: int, label: str, **extra: Any) -> TraceNode:
        self._check_thread()
        if len(self._nodes) >= self.event_cap:
            # raises exactly once: afterwards _off() short-circuits every hook
            self.truncated = True
            raise TraceTooLarge(f"event cap {self.event_cap} reached; trace truncated")
        node = TraceNode(
            id=self._next_id,
            type=type_,
            line=line,
            ts=self._tick(),
            parent_id=self._stack[-1],
            label=label,
            **extra,
        )
        self._next_id += 1
        self._nodes[node.id] = node
        self._nodes[node.parent_id].children.append(node)
        return node

    def _off(self) -> bool:
        return self._suspend_depth > 0 or self.truncated or self.finalized

    def _current_iteration(self) -> int | None:
        """Iteration index for a new record: nearest loop context in this frame."""
        for node_id in reversed(self._stack):
            node = self._nodes[node_id]
            if node.type == "iteration":
                return node.iteration
            if node.type == "loop":
                return self._loop_counters.get(node_id, 0)
            if node.type in ("call", "root"):
                return None
        return None

    # --- hooks ------------------------------------------------------------------

    def enter_call(self, name: str, line: int, label: str = "") -> int:
        if self._off():
            return SUSPENDED
        node = self._new_node("call", line, label or name, name=name)
        self._stack.append(node.id)
        return node.id

    def exit_call(self, call_id: int) -> None:
        if call_id == SUSPENDED or self._off():
            return
        self._pop_through(call_id, "call")

    def begin_loop(self, line: int, label: str = "") -> int:
        if self._off():
            return SUSPENDED
        node = self._new_node("loop", line, label or f"loop@{line}")
        self._stack.append(node.id)
        self._loop_counters[node.id] = 0
        return node.id

    def begin_iteration(self, loop_id: int) -> int:
        if loop_id == SUSPENDED or self._off():
            return -1
        # close the previous iteration of this loop, if still open
        self._pop_above(loop_id)
        index = self._loop_counters[loop_id]
        self._loop_counters[loop_id] = index + 1
        loop = self._nodes[loop_id]
        node = self._new_node("iteration", loop.line, f"iter {index}", iteration=index)
        self._stack.append(node.id)
        return index

    def end_loop(self, loop_id: int) -> None:
        if loop_id == SUSPENDED or self._off():
            return
        self._pop_through(loop_id, "loop")
        self._loop_counters.pop(loop_id, None)

    def record_value(self, name: str, value: Any, line: int, is_variable: bool = True, label: str = "") -> int:
        if self._off():
            return SUSPENDED
        node = self._new_node(
            "tracked",
            line,
            label or f"{line}: {name}",
            name=name,
            value=coerce_value(value),
            has_value=True,
            iteration=self._current_iteration(),
            is_variable=bool(is_variable),
        )
        return node.id

    def record_custom(self, label: str, line: int, thunk: Callable[[], Any]) -> int:
        if self._off():
            return SUSPENDED
        try:
            value = coerce_value(thunk())
        except Exception as exc:  # a broken probe must not kill the subject
            value = f"{CUSTOM_ERROR_PREFIX}{type(exc).__name__}: {exc}"[:200]
        node = self._new_node("custom", line, label, name=label, value=value, has_value=True)
        return node.id

    def push_suspend(self) -> None:
        self._check_thread()
        self._suspend_depth += 1

    def pop_suspend(self) -> None:
        self._check_thread()
        if self._suspend_depth > 0:
            self._suspend_depth -= 1

    # --- stack helpers ------------------------------------------------------------

    def _pop_above(self, block_id: int) -> None:
        if block_id not in self._stack:
            raise StackMismatch(f"block {block_id} is not open")
        while self._stack[-1] != block_id:
            self._stack.pop()
            self._clock += 1  # closing consumes a tick: timestamps outlive ids

    def _pop_through(self, block_id: int, expect_type: str) -> None:
        if block_id not in self._stack or block_id == 0:
            raise StackMismatch(f"no open {expect_type} block with id {block_id}")
        self._pop_above(block_id)
        self._stack.pop()
        self._clock += 1

    # --- finalization ---------------------------------------------------------------

    def build_trace(self) -> Trace:
        open_blocks = [i for i in self._stack if i != 0]
        for block_id in open_blocks:
            self._nodes[block_id].aborted = True
        return Trace(
            spec=self._spec,
            root=self._root,
            static_info=self._static_info,
            aborted=bool(open_blocks),
            truncated=self.truncated,
        )

    def finalize(self, path: str | None = None) -> Trace:
        """Build the trace and write it to the sink. Idempotent."""
        trace = self.build_trace()
        self.finalized = True
        target = path or self.sink
        if target is not None:
            try:
                # atomic: a killed process never leaves a half-written file
                tmp = f"{target}.tmp"
                with open(tmp, "wb") as fh:
                    fh.write(serialize_trace(trace))
                os.replace(tmp, target)
            except OSError as exc:
                raise SinkIOError(f"cannot write trace to {target}: {exc}") from exc
        return trace


def load_meta_json(meta_json: str) -> dict:
    try:
        return json.loads(meta_json)
    except json.JSONDecodeError:
        return {}
