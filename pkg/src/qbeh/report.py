"""Structured JSON run reports.

Every report has exactly the top-level keys ``command``, ``inputs``,
``timings_ms``, ``results`` and ``errors``.
"""
from __future__ import annotations

import json
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else repr(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


class Report:
    def __init__(self, command: str, inputs: dict):
        self.command = command
        self.inputs = inputs
        self.timings_ms = {}
        self.results = {}
        self.errors = []

    @contextmanager
    def timed(self, label):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.timings_ms[label] = 1e3 * (time.perf_counter() - t0)

    def add_error(self, exc: BaseException, **extra):
        entry = {"type": type(exc).__name__, "message": str(exc)}
        for attr in ("abscissa", "inequality", "min_eigenvalue", "value", "time", "line"):
            if getattr(exc, attr, None) is not None:
                entry[attr] = getattr(exc, attr)
        if getattr(exc, "history", None):
            entry["history"] = exc.history
        entry.update(extra)
        self.errors.append(entry)

    def as_dict(self) -> dict:
        return to_jsonable({
            "command": self.command,
            "inputs": self.inputs,
            "timings_ms": self.timings_ms,
            "results": self.results,
            "errors": self.errors,
        })

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n")
