"""Deterministic file output: CSV traces with full-precision decimal
floats, JSON summaries with sorted keys, corpus round-tripping.

`repr(float)` is the shortest decimal string that round-trips exactly, so
re-reading any file reproduces the original values bit for bit and two runs
of the same experiment produce byte-identical files.
"""

from __future__ import annotations

import json
import os

import numpy as np
import yaml

from .neural import TrainingSet


def format_float(x: float) -> str:
    return repr(float(x))


def write_csv(path, header, columns) -> None:
    """Write equal-length columns under a header row."""
    columns = [np.asarray(c) for c in columns]
    n = len(columns[0])
    for c in columns:
        if len(c) != n:
            raise ValueError("columns must share one length")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(n):
            fh.write(",".join(format_float(c[i]) for c in columns) + "\n")


def read_csv_columns(path):
    """Read a numeric CSV written by write_csv: (header, list of arrays)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        rows = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(header):
                raise ValueError(
                    f"{path}: row {lineno} has {len(parts)} fields, "
                    f"expected {len(header)}")
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise ValueError(f"{path}: row {lineno}: {exc}") from None
    data = np.array(rows) if rows else np.empty((0, len(header)))
    return header, [data[:, i] for i in range(len(header))]


def write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_yaml(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        yaml.safe_dump(payload, fh, sort_keys=True, default_flow_style=False)


CORPUS_HEADER = ["r", "r_dot", "u_n", "frequency"]


def write_corpus_csv(path, data: TrainingSet, frequencies_per_row) -> None:
    write_csv(path, CORPUS_HEADER,
              [data.features[:, 0], data.features[:, 1], data.targets,
               np.asarray(frequencies_per_row)])


def read_corpus_csv(path) -> tuple:
    """Load a corpus file: (TrainingSet, per-row frequency array)."""
    header, cols = read_csv_columns(path)
    if header != CORPUS_HEADER:
        raise ValueError(f"{path}: expected header {CORPUS_HEADER}, got {header}")
    feats = np.column_stack([cols[0], cols[1]])
    return TrainingSet(features=feats, targets=cols[2]), cols[3]


def ensure_dir(path) -> None:
    os.makedirs(path, exist_ok=True)
