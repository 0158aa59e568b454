"""Runtime configuration: caps, timeouts, default exclusions. JSON file backed."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .recorder import DEFAULT_EVENT_CAP
from .store import DEFAULT_GROUP_CAP


@dataclass(frozen=True)
class Config:
    timeout_s: float = 60.0
    event_cap: int = DEFAULT_EVENT_CAP
    group_cap: int = DEFAULT_GROUP_CAP
    depth_window: int = 6
    extra_exclusions: tuple[str, ...] = field(default_factory=tuple)
    workdir: str | None = None

    @classmethod
    def load(cls, path: str | Path | None) -> "Config":
        if path is None:
            return cls()
        data = json.loads(Path(path).read_text())
        cfg = cls()
        known = {k: v for k, v in data.items() if hasattr(cfg, k)}
        if "extra_exclusions" in known:
            known["extra_exclusions"] = tuple(known["extra_exclusions"])
        return replace(cfg, **known)
