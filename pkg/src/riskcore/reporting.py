"""Output writers: one collector owns the output directory and its manifest."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import platform
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .errors import DataError
from .metrics import TABLE_COLUMNS, AggregateReport, RunMetrics, format_cell, table_row
from .protocol import DISPLAY_NAMES

MANIFEST = "manifest.json"


def _default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (set, frozenset, tuple)):
        return list(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_default) + "\n"


def sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class OutputCollector:
    """Writes files under ``root`` and remembers their digests."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.written: dict[str, str] = {}

    def _write(self, rel: str, text: str) -> Path:
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        data = text.encode("utf-8")
        path.write_bytes(data)
        self.written[rel] = hashlib.sha256(data).hexdigest()
        return path

    def json(self, rel: str, obj) -> Path:
        return self._write(rel, dumps(obj))

    def csv(self, rel: str, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(row)
        return self._write(rel, buf.getvalue())

    def adopt(self, rel: str) -> None:
        """Record a file written by other code."""
        self.written[rel] = sha256_file(self.root / rel)

    def finalize(self, command: str, record: dict) -> Path:
        """Merge this command's files and record into the manifest."""
        path = self.root / MANIFEST
        manifest = {"artifacts": {}, "commands": {}}
        if path.exists():
            try:
                manifest = json.loads(path.read_text("utf-8"))
            except json.JSONDecodeError:
                pass
        manifest.setdefault("artifacts", {}).update(self.written)
        manifest.setdefault("commands", {})[command] = {
            **record,
            "files": sorted(self.written),
            "software_version": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        }
        manifest["software_version"] = __version__
        path.write_text(dumps(manifest), encoding="utf-8")
        return path


def verify_manifest(root: str | Path) -> list[str]:
    """Problems found when re-hashing every listed artifact (empty if all match)."""
    root = Path(root)
    path = root / MANIFEST
    if not path.exists():
        raise DataError(f"no {MANIFEST} in {root}")
    manifest = json.loads(path.read_text("utf-8"))
    problems = []
    for rel, digest in sorted(manifest.get("artifacts", {}).items()):
        f = root / rel
        if not f.exists():
            problems.append(f"missing: {rel}")
        elif sha256_file(f) != digest:
            problems.append(f"digest mismatch: {rel}")
    return problems


# -- tables ------------------------------------------------------------------------------


def results_table_rows(reports: dict[str, AggregateReport]) -> list[list[str]]:
    return [[DISPLAY_NAMES.get(m, m)] + table_row(rep) for m, rep in reports.items()]


def results_table_header() -> list[str]:
    return ["Method"] + [h for h, _ in TABLE_COLUMNS]


def formatted_report(rep: AggregateReport) -> dict[str, str]:
    return {m: format_cell(rep[m], m) for m in rep.summaries}


def run_payload(run: RunMetrics) -> dict:
    return run.to_dict()
