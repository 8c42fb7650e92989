"""Shared plumbing: float serialization, digests, bounded parallelism."""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import os
from typing import Callable, Iterable, Sequence

WORKERS_ENV = "FRACTALKINETICS_MAX_WORKERS"


def fmt17(x: float) -> str:
    """Serialize a float with 17 significant digits (round-trip exact)."""
    return format(float(x), ".17g")


def config_digest(config: dict) -> str:
    """Stable 12-hex digest of a resolved configuration mapping."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def file_digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def max_workers() -> int:
    """Worker cap from the environment; defaults to a small fixed pool."""
    raw = os.environ.get(WORKERS_ENV, "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        n = min(4, os.cpu_count() or 1)
    return n


def parallel_map(fn: Callable, items: Sequence) -> list:
    """Map preserving order; uses a thread pool only when it can help.

    Results are collected in input order and each item's computation is
    independent, so output is deterministic regardless of the pool size.
    """
    items = list(items)
    workers = max_workers()
    if workers == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def write_csv_rows(fh, header: Sequence[str], rows: Iterable[Sequence],
                   comments: Sequence[str] = ()) -> int:
    """Write `#`-commented provenance lines, a header, then data rows.

    Floats are serialized with fmt17; everything else with str().
    Returns the number of data rows written.
    """
    for line in comments:
        fh.write(f"# {line}\n")
    fh.write(",".join(header) + "\n")
    count = 0
    for row in rows:
        cells = [fmt17(c) if isinstance(c, float) else str(c) for c in row]
        fh.write(",".join(cells) + "\n")
        count += 1
    return count
