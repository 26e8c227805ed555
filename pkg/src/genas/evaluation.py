"""Evaluation backends: a deterministic surrogate and a remote trainer client.

Both implement the same contract, evaluate(phenotype, train_config) to a
series of validation accuracies in [0, 1], so the search loop runs
unmodified against either.
"""

from __future__ import annotations

import json
import math
import socket
import subprocess
import time
from dataclasses import dataclass

import numpy as np

from .arch_compiler import Phenotype, canonical_key, conv_layer_count, param_count, to_wire

LABELS = ("head", "vacuole", "acrosome")


@dataclass(frozen=True)
class TrainConfig:
    """Training recipe shared by the surrogate and the real worker.

    mini_batches bounds the search-time training budget;
    final_mini_batches is the longer budget used when the chosen
    architecture is trained for real at the end of a run.
    """

    mini_batches: int = 2000
    final_mini_batches: int = 20000
    batch_size: int = 32
    learning_rate: float = 1e-4
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    label: str = "head"
    eval_interval: int = 1
    seed: int = 0

    def __post_init__(self):
        for name in ("mini_batches", "final_mini_batches", "batch_size", "eval_interval"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.label not in LABELS:
            raise ValueError(f"label must be one of {LABELS}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def to_wire(self, mini_batches: int | None = None) -> dict:
        """Config object of a train request; field names are fixed."""
        return {
            "mini_batches": self.mini_batches if mini_batches is None else mini_batches,
            "batch_size": self.batch_size,
            "lr": self.learning_rate,
            "beta1": self.adam_beta1,
            "beta2": self.adam_beta2,
            "label": self.label,
            "eval_interval": self.eval_interval,
            "seed": self.seed,
        }


class EvaluationError(Exception):
    """Training failed; transient errors are worth retrying."""

    def __init__(self, msg: str, transient: bool = False, arch_key: str | None = None):
        super().__init__(msg)
        self.transient = transient
        self.arch_key = arch_key


def _asymptote(params: int, conv_layers: int) -> float:
    # Peaks for parameter counts near 1e6, with a depth bonus that
    # saturates at 12 conv layers.
    a = 0.55 + 0.25 * math.exp(-((math.log10(params) - 6.0) ** 2) / 2.0)
    a += 0.15 * min(conv_layers, 12) / 12.0
    return min(max(a, 0.0), 1.0)


def surrogate_asymptote(p: Phenotype) -> float:
    """Accuracy the synthetic landscape lets this architecture reach."""
    return _asymptote(param_count(p), conv_layer_count(p))


def surrogate_series(p: Phenotype, cfg: TrainConfig, noise_std: float = 0.02) -> np.ndarray:
    """Synthetic learning curve, fully determined by (cfg.seed, architecture).

    A saturating exponential toward the asymptote plus seeded gaussian
    noise, clamped to [0, 1].  The noise stream is derived from the
    architecture digest, not from any shared generator, so concurrent
    evaluation cannot reorder draws.
    """
    n = cfg.mini_batches // cfg.eval_interval
    if n < 1:
        raise ValueError("eval_interval larger than mini_batches leaves no evaluations")
    digest = canonical_key(p).digest
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, int(digest[:16], 16)]))
    t = np.arange(1, n + 1, dtype=float)
    curve = surrogate_asymptote(p) * (1.0 - np.exp(-t / (0.25 * n)))
    if noise_std > 0:
        curve = curve + rng.normal(0.0, noise_std, size=n)
    return np.clip(curve, 0.0, 1.0)


class SurrogateEvaluator:
    """Deterministic stand-in for GPU training, used by tests and dry runs."""

    def __init__(self, noise_std: float = 0.02):
        self.noise_std = noise_std
        self.calls = 0

    def evaluate(self, p: Phenotype, cfg: TrainConfig) -> np.ndarray:
        self.calls += 1
        return surrogate_series(p, cfg, self.noise_std)


class LineTransport:
    """Newline-delimited JSON records over a socket or a child process."""

    def __init__(self, reader, writer, proc=None, sock=None):
        self._reader = reader
        self._writer = writer
        self._proc = proc
        self._sock = sock

    @classmethod
    def to_subprocess(cls, argv: list[str]) -> "LineTransport":
        proc = subprocess.Popen(argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                text=True)
        return cls(proc.stdout, proc.stdin, proc=proc)

    @classmethod
    def to_socket(cls, host: str, port: int) -> "LineTransport":
        sock = socket.create_connection((host, port))
        return cls(sock.makefile("r"), sock.makefile("w"), sock=sock)

    def send(self, record: dict):
        self._writer.write(json.dumps(record) + "\n")
        self._writer.flush()

    def recv(self) -> dict:
        line = self._reader.readline()
        if not line:
            raise EvaluationError("worker closed the connection", transient=True)
        return json.loads(line)

    def close(self):
        for stream in (self._writer, self._reader):
            try:
                stream.close()
            except OSError:
                pass
        if self._sock is not None:
            self._sock.close()
        if self._proc is not None:
            self._proc.terminate()
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()


class RemoteEvaluator:
    """Sends train requests to a worker and collects the accuracy series.

    Transient failures (worker busy, dropped connection) are retried
    with exponential backoff; permanent ones surface immediately so the
    caller can score the architecture as failed.
    """

    def __init__(self, transport, retries: int = 3, backoff: float = 0.5,
                 sleep=time.sleep, on_progress=None):
        self.transport = transport
        self.retries = retries
        self.backoff = backoff
        self._sleep = sleep
        self._on_progress = on_progress
        self._next_id = 1

    def evaluate(self, p: Phenotype, cfg: TrainConfig) -> np.ndarray:
        reply = self._roundtrip("train_request", p, cfg)
        series = np.asarray(reply.get("series", ()), dtype=float)
        if series.size == 0 or series.min() < 0.0 or series.max() > 1.0:
            raise EvaluationError("worker returned an out-of-range accuracy series")
        return series

    def finalize(self, p: Phenotype, cfg: TrainConfig) -> dict:
        """Long training pass returning scored validation and test splits."""
        return self._roundtrip("finalize_request", p, cfg,
                               mini_batches=cfg.final_mini_batches)

    def _roundtrip(self, request_type: str, p: Phenotype, cfg: TrainConfig,
                   mini_batches: int | None = None) -> dict:
        for attempt in range(self.retries + 1):
            if attempt:
                self._sleep(self.backoff * 2 ** (attempt - 1))
            rid = self._next_id
            self._next_id += 1
            self.transport.send({
                "type": request_type,
                "id": rid,
                "arch": to_wire(p),
                "config": cfg.to_wire(mini_batches),
            })
            try:
                return self._collect(rid)
            except EvaluationError as err:
                if not err.transient or attempt == self.retries:
                    raise
        raise AssertionError("unreachable")

    def _collect(self, rid: int) -> dict:
        while True:
            reply = self.transport.recv()
            kind = reply.get("type")
            if kind == "progress" and reply.get("id") == rid:
                if self._on_progress is not None:
                    self._on_progress(reply.get("done", 0))
                continue
            if reply.get("id") != rid:
                raise EvaluationError(
                    f"worker answered request {reply.get('id')} while {rid} was pending")
            if kind in ("result", "finalize_result"):
                return reply
            if kind == "error":
                raise EvaluationError(str(reply.get("msg")),
                                      transient=bool(reply.get("transient")))
            raise EvaluationError(f"unexpected record type {kind!r}")
