"""Structured verification reports."""

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np


@dataclass
class Quantity:
    """A named number with an optional standard error and reference value."""

    label: str
    value: float
    stderr: float = None
    target: float = None

    def to_dict(self):
        out = {"label": self.label, "value": _plain(self.value)}
        if self.stderr is not None:
            out["stderr"] = _plain(self.stderr)
        if self.target is not None:
            out["target"] = _plain(self.target)
        return out


@dataclass
class Report:
    name: str
    inputs: dict
    quantities: list
    tolerance: str
    passed: bool
    seed: int = None
    runtime_s: float = 0.0
    notes: list = field(default_factory=list)

    def __getitem__(self, label):
        for q in self.quantities:
            if q.label == label:
                return q
        raise KeyError(label)

    def to_dict(self, include_runtime=True):
        out = {
            "name": self.name,
            "inputs": _plain(self.inputs),
            "quantities": [q.to_dict() for q in self.quantities],
            "tolerance": self.tolerance,
            "passed": bool(self.passed),
            "seed": self.seed,
        }
        if self.notes:
            out["notes"] = list(self.notes)
        if include_runtime:
            out["runtime_s"] = round(self.runtime_s, 3)
        return out

    def to_json(self, include_runtime=True):
        return json.dumps(self.to_dict(include_runtime), indent=2, sort_keys=True, allow_nan=False)

    def summary(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag} {self.name} ({self.tolerance})"


def _plain(obj):
    """Recursively convert numpy scalars/arrays to JSON-safe Python values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return str(x)
        return x
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    return obj


def agree(a, b, se, k=3.0):
    """``|a - b| <= k se``; a zero standard error demands equality."""
    return bool(abs(a - b) <= k * se) if se > 0 else bool(a == b)


def mean_se(x):
    x = np.asarray(x, dtype=float)
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x)))


def variance_se(x):
    """Sample variance and its standard error from the fourth central moment."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    c = x - x.mean()
    v = float(c @ c / (n - 1))
    m4 = float(np.mean(c**4))
    se = math.sqrt(max(m4 - v * v * (n - 3) / (n - 1), 0.0) / n)
    return v, se


def covariance_se(x, y):
    """Sample covariance of paired samples with a plug-in standard error."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    prod = (x - x.mean()) * (y - y.mean())
    c = float(prod.sum() / (n - 1))
    return c, float(prod.std(ddof=1) / math.sqrt(n))


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        return False
