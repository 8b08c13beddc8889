"""Dataset files: signal rows as CSV, metadata as JSON lines, manifest.

Layout of a dataset directory:

* ``signals.csv``  — one signal per row, comma-separated decimal values.
  Real signals use L columns; complex (analytic) signals use 2L columns
  with interleaved real/imaginary parts.
* ``meta.jsonl``   — one JSON object per row: ``{id, label, fold, meta}``.
* ``manifest.json`` — representation tag, shape, config echo, and a SHA-256
  content hash over the two data files.

Floats are written with ``repr``, which round-trips f64 exactly.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

SIGNALS_FILE = "signals.csv"
META_FILE = "meta.jsonl"
MANIFEST_FILE = "manifest.json"


@dataclass
class SignalDataset:
    """In-memory dataset: stacked signal rows plus aligned metadata."""

    signals: np.ndarray           # (n, L) float64 or complex128
    meta: list[dict] = field(default_factory=list)
    representation: str = "raw"

    def __post_init__(self):
        self.signals = np.asarray(self.signals)
        if self.signals.ndim != 2:
            raise ValueError("signals must be a 2-D array of rows")
        if not self.meta:
            self.meta = [{"id": f"s{i:05d}", "label": "unknown", "fold": None,
                          "meta": {}} for i in range(self.signals.shape[0])]
        if len(self.meta) != self.signals.shape[0]:
            raise ValueError("metadata rows must align with signals")

    @property
    def labels(self) -> np.ndarray:
        return np.array([m.get("label", "unknown") for m in self.meta])

    @property
    def splits(self) -> np.ndarray:
        return np.array([m.get("meta", {}).get("split", "") for m in self.meta])

    def rows(self, split: str | None = None, label: str | None = None) -> np.ndarray:
        mask = np.ones(self.signals.shape[0], dtype=bool)
        if split is not None:
            mask &= self.splits == split
        if label is not None:
            mask &= self.labels == label
        return self.signals[mask]

    @property
    def ids(self) -> list:
        return [m.get("id") for m in self.meta]


def _format_rows(signals: np.ndarray) -> str:
    if np.iscomplexobj(signals):
        inter = np.empty((signals.shape[0], 2 * signals.shape[1]))
        inter[:, 0::2] = signals.real
        inter[:, 1::2] = signals.imag
        signals = inter
    lines = [",".join(repr(float(v)) for v in row) for row in signals]
    return "\n".join(lines) + ("\n" if lines else "")


def _parse_rows(text: str, is_complex: bool) -> np.ndarray:
    rows = [line for line in text.splitlines() if line.strip()]
    if not rows:
        return np.zeros((0, 0), dtype=np.complex128 if is_complex else np.float64)
    arr = np.asarray([[float(v) for v in line.split(",")] for line in rows])
    if is_complex:
        return arr[:, 0::2] + 1j * arr[:, 1::2]
    return arr


def content_hash(directory) -> str:
    h = hashlib.sha256()
    for name in (SIGNALS_FILE, META_FILE):
        with open(os.path.join(directory, name), "rb") as fh:
            h.update(fh.read())
    return h.hexdigest()


def write_dataset(directory, dataset: SignalDataset,
                  config: dict | None = None) -> str:
    """Write the dataset files; returns the content hash."""
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, SIGNALS_FILE), "w") as fh:
        fh.write(_format_rows(dataset.signals))
    with open(os.path.join(directory, META_FILE), "w") as fh:
        for m in dataset.meta:
            fh.write(json.dumps(m) + "\n")
    digest = content_hash(directory)
    manifest = {
        "representation": dataset.representation,
        "complex": bool(np.iscomplexobj(dataset.signals)),
        "n_signals": int(dataset.signals.shape[0]),
        "length": int(dataset.signals.shape[1]),
        "config": config,
        "content_hash": digest,
    }
    with open(os.path.join(directory, MANIFEST_FILE), "w") as fh:
        json.dump(manifest, fh, indent=1)
    return digest


def read_dataset(directory) -> SignalDataset:
    sig_path = os.path.join(directory, SIGNALS_FILE)
    meta_path = os.path.join(directory, META_FILE)
    man_path = os.path.join(directory, MANIFEST_FILE)
    if not os.path.exists(sig_path):
        raise DataError(f"no {SIGNALS_FILE} in {directory}")
    manifest = {}
    if os.path.exists(man_path):
        with open(man_path) as fh:
            manifest = json.load(fh)
    with open(sig_path) as fh:
        signals = _parse_rows(fh.read(), bool(manifest.get("complex", False)))
    meta: list[dict] = []
    if os.path.exists(meta_path):
        with open(meta_path) as fh:
            for line in fh:
                if line.strip():
                    meta.append(json.loads(line))
    if meta and signals.shape[0] != len(meta):
        raise DataError("metadata rows do not align with signal rows")
    if signals.shape[0] and manifest.get("length") not in (None, signals.shape[1]):
        raise DataError("manifest length disagrees with signal rows")
    if signals.size == 0 and manifest.get("length"):
        signals = signals.reshape(0, manifest["length"])
    return SignalDataset(signals=signals, meta=meta,
                         representation=manifest.get("representation", "raw"))
