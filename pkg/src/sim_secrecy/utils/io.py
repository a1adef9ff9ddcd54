"""JSON-lines and CSV writers for metric logs, traces and tables."""

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def _to_builtin(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def dumps(record: dict) -> str:
    """Compact JSON with stable key order; numpy values become builtins."""
    return json.dumps(record, default=_to_builtin, sort_keys=True)


class JsonLinesWriter:
    """Appends one JSON object per line, flushing after each record."""

    def __init__(self, path: Path | str):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._handle = self.path.open("w", encoding="utf-8")

    def write(self, record: dict) -> None:
        self._handle.write(dumps(record) + "\n")
        self._handle.flush()

    def close(self) -> None:
        if not self._handle.closed:
            self._handle.close()

    def __enter__(self) -> "JsonLinesWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def write_jsonl(path: Path | str, records: Iterable[dict]) -> Path:
    with JsonLinesWriter(path) as writer:
        for record in records:
            writer.write(record)
    return Path(path)


def read_jsonl(path: Path | str) -> list[dict]:
    with Path(path).open(encoding="utf-8") as handle:
        return [json.loads(line) for line in handle if line.strip()]


def write_csv(path: Path | str, columns: Sequence[str], rows: Iterable[dict]) -> Path:
    """Write rows with a fixed column order and Unix line endings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    return path
