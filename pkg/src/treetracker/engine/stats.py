"""Execution counters shared by all executors."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path


@dataclass
class ExecStats:
    algo: str = ""
    probes: int = 0
    probe_failures: int = 0
    backjumps: int = 0
    deletions: int = 0
    dp_propagations: int = 0
    nogood_adds: int = 0
    nogood_hits: int = 0
    semijoin_scans: int = 0
    semijoin_removed: int = 0
    build_scans: int = 0
    output_count: int = 0
    input_count: int = 0
    step_entries: int = 0
    materializations: int = 0
    early_exit: bool = False
    reverse_gyo: bool | None = None
    wall_time: float = 0.0
    probes_per_step: list[int] = field(default_factory=list)
    entries_per_step: list[int] = field(default_factory=list)

    _SUMMED = (
        "probes", "probe_failures", "backjumps", "deletions", "dp_propagations",
        "nogood_adds", "nogood_hits", "semijoin_scans", "semijoin_removed",
        "build_scans", "step_entries", "materializations", "wall_time",
    )

    def absorb(self, other: "ExecStats") -> None:
        """Add a materialization stage's counters into this record."""
        for name in self._SUMMED:
            setattr(self, name, getattr(self, name) + getattr(other, name))
        self.early_exit = self.early_exit or other.early_exit

    def counters(self) -> dict:
        """Everything except timing; identical across repeats of one config."""
        d = self.record()
        d.pop("wall_time")
        return d

    def record(self) -> dict:
        d = asdict(self)
        d.pop("probes_per_step")
        d.pop("entries_per_step")
        return d

    def write(self, path: str | Path) -> None:
        write_records([self.record()], path)

    def __str__(self) -> str:
        return "\n".join(f"{k}={v}" for k, v in self.record().items())


def write_records(records: list[dict], path: str | Path) -> None:
    """JSON for ``*.json``; otherwise flat ``key=value`` lines, blank line between records."""
    path = Path(path)
    if path.suffix == ".json":
        payload = records[0] if len(records) == 1 else records
        path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        return
    chunks = ["\n".join(f"{k}={v}" for k, v in r.items()) for r in records]
    path.write_text("\n\n".join(chunks) + "\n", encoding="utf-8")


STAT_FIELDS = [f.name for f in fields(ExecStats)]
