"""Windowed smoothing of noisy accuracy series and the fitness cache."""

from __future__ import annotations

import time
from pathlib import Path

import numpy as np

from .arch_compiler import canonical_key, decode
from .evaluation import EvaluationError

DEFAULT_WINDOW = (1.0, 1.0, 1.0, 1.0, 1.0)


def genas_wf(series, window=DEFAULT_WINDOW, normalize: bool = True) -> float:
    """Fitness of an accuracy series: the best window-weighted mean.

    The weight window slides over the series; the fitness is the maximum
    weighted mean over all offsets, which damps single lucky validation
    spikes without discarding them.  A series shorter than the window
    falls back to the weighted mean using the first len(series) weights.
    normalize=False skips division by the weight sum and returns the raw
    best cross-correlation value instead.
    """
    b = np.asarray(series, dtype=float).ravel()
    if b.size == 0:
        raise ValueError("empty accuracy series")
    w = np.asarray(window, dtype=float).ravel()
    if w.size == 0 or float(w.sum()) <= 0.0:
        raise ValueError("window weights must be non-empty with a positive sum")
    if b.size < w.size:
        w = w[:b.size]
        best = float(np.dot(w, b))
    else:
        best = float(np.correlate(b, w, mode="valid").max())
    return best / float(w.sum()) if normalize else best


class FitnessCache:
    """Digest-to-fitness map backed by an append-only record file.

    One record per line: digest, fitness, timestamp, tab-separated.  The
    file is replayed on construction and duplicate digests keep the last
    record, so overwriting an entry is just another append.  path=None
    keeps the cache purely in memory.
    """

    def __init__(self, path: str | Path | None = None):
        self._entries: dict[str, float] = {}
        self._path = Path(path) if path is not None else None
        if self._path is not None and self._path.exists():
            for line in self._path.read_text().splitlines():
                if not line.strip():
                    continue
                digest, value, _ = line.split("\t")
                self._entries[digest] = float(value)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, digest: str) -> bool:
        return digest in self._entries

    def get(self, digest: str) -> float | None:
        return self._entries.get(digest)

    def put(self, digest: str, fitness: float):
        value = float(fitness)
        self._entries[digest] = value
        if self._path is not None:
            with self._path.open("a", encoding="utf-8") as fh:
                fh.write(f"{digest}\t{value!r}\t{time.time():.6f}\n")

    def entries(self) -> dict[str, float]:
        return dict(self._entries)


def lookup_or_evaluate(genome, space, cache: FitnessCache, evaluator, train_cfg,
                       window=DEFAULT_WINDOW, normalize: bool = True,
                       log=None) -> float:
    """Fitness of a genome, reusing the cache when the architecture is known.

    The key is the canonical hash of the decoded layer stack, so genomes
    that prune to the same architecture share one entry.  On a miss the
    evaluator runs and the smoothed result is stored.  log, when given,
    receives one record with the hit flag per call.  Evaluator failures
    propagate with the architecture key attached and leave the cache
    untouched.
    """
    phenotype = decode(genome, space)
    key = canonical_key(phenotype).digest
    cached = cache.get(key)
    if cached is not None:
        if log is not None:
            log({"key": key, "hit": True, "fitness": cached})
        return cached
    try:
        series = evaluator.evaluate(phenotype, train_cfg)
    except EvaluationError as err:
        err.arch_key = key
        raise
    value = genas_wf(series, window, normalize=normalize)
    cache.put(key, value)
    if log is not None:
        log({"key": key, "hit": False, "fitness": value})
    return value
