"""Readers for run directories: <root>/<experiment>/seed-<n>/."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from ._amigo import METRICS_SCHEMA

_SEED_DIR = re.compile(r"seed-(\d+)$")


def read_metrics(path: str | Path) -> list[dict]:
    """Records of a metrics.jsonl file. Rejects records from another schema."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec.get("schema") != METRICS_SCHEMA:
                raise ValueError(f"{path}:{lineno}: metrics schema {rec.get('schema')!r}, expected {METRICS_SCHEMA}")
            records.append(rec)
    return records


@dataclass
class Run:
    path: Path
    experiment: str
    seed: int
    config: dict = field(repr=False)
    summary: dict | None = field(default=None, repr=False)

    def metrics(self) -> list[dict]:
        return read_metrics(self.path / "metrics.jsonl")


def find_runs(root: str | Path) -> list[Run]:
    """Every seed directory under root that has a config snapshot, sorted."""
    runs = []
    for cfg in sorted(Path(root).glob("*/seed-*/config.json")):
        m = _SEED_DIR.search(cfg.parent.name)
        if not m:
            continue
        summary_path = cfg.parent / "summary.json"
        summary = json.loads(summary_path.read_text()) if summary_path.exists() else None
        runs.append(Run(cfg.parent, cfg.parent.parent.name, int(m.group(1)), json.loads(cfg.read_text()), summary))
    return runs
