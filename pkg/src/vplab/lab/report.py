"""Run reports: config echo, tables, checks, and provenance (seed, config, code version)."""
from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from pathlib import Path

from .. import __version__
from ..io import write_csv, write_json


def code_version():
    """Package version plus a digest of the package sources."""
    root = Path(__file__).resolve().parents[1]
    h = hashlib.sha256()
    for p in sorted(root.rglob("*.py")):
        h.update(p.relative_to(root).as_posix().encode())
        h.update(p.read_bytes())
    return f"{__version__}+{h.hexdigest()[:12]}"


@dataclass
class RunReport:
    name: str
    seed: int
    config: dict
    tables: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    steps: int = 0
    wall_clock: float = 0.0
    version: str = field(default_factory=code_version)

    def add_table(self, name, header, rows):
        self.tables[name] = {"header": list(header), "rows": [list(r) for r in rows]}

    def check(self, name, ok, detail=""):
        self.checks[name] = {"pass": bool(ok), "detail": detail}
        return bool(ok)

    @property
    def passed(self):
        return all(c["pass"] for c in self.checks.values())

    def record(self):
        """Deterministic part of the report (no timing)."""
        return {"name": self.name, "seed": self.seed, "config": self.config,
                "version": self.version, "tables": self.tables, "series": self.series,
                "checks": self.checks, "notes": self.notes, "steps": self.steps}

    def write(self, out_dir):
        """report.json, one CSV per table, and timing.json (kept apart so the
        report itself is reproducible)."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, t in self.tables.items():
            write_csv(out / f"{name}.csv", t["header"], t["rows"])
        write_json(out / "report.json", self.record())
        write_json(out / "timing.json", {"wall_clock_s": self.wall_clock, "steps": self.steps})
        return out


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
