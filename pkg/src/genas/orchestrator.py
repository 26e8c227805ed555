"""Search driver: config loading, the generation loop, run logs and resume.

Determinism contract: one seed fans out into named generator streams
(init, selection, crossover, mutation), every surrogate evaluation
re-seeds itself from the architecture digest, and no log record contains
wall-clock data.  Two runs with the same config therefore produce
byte-identical logs, and a resumed run continues the byte stream exactly
where the checkpoint left it.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
import os
import shlex
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .arch_compiler import canonical_key, decode, param_count
from .data_tools import compute_metrics, confusion_from_predictions, threshold_search
from .evaluation import (EvaluationError, LineTransport, RemoteEvaluator,
                         SurrogateEvaluator, TrainConfig, surrogate_asymptote)
from .fitness import DEFAULT_WINDOW, FitnessCache, lookup_or_evaluate
from .genetic_ops import GaConfig, Individual, crossover, mutate, tournament_select
from .search_space import Genome, SearchSpace, random_genome

LOG_VERSION = 1
CHECKPOINT_VERSION = 1

_STREAM_NAMES = ("init", "selection", "crossover", "mutation")
_BACKENDS = ("surrogate", "worker")


class RunStateError(RuntimeError):
    """Checkpoint, run log and config disagree about the run being resumed."""


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    backend: str = "surrogate"
    # Worker address, host:port for a socket or a command line to spawn.
    worker: str | None = None
    log_path: str = "run_log.jsonl"
    cache_path: str | None = None
    checkpoint_path: str | None = None
    window: tuple[float, ...] = DEFAULT_WINDOW
    normalize_fitness: bool = True
    space: SearchSpace = field(default_factory=SearchSpace)
    ga: GaConfig = field(default_factory=GaConfig)
    train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if self.backend not in _BACKENDS:
            raise ValueError(f"backend must be one of {_BACKENDS}")
        object.__setattr__(self, "window", tuple(float(w) for w in self.window))
        if not self.window:
            raise ValueError("window must hold at least one weight")


def fingerprint(cfg: RunConfig) -> str:
    """Hash of everything that shapes results; file locations excluded.

    Guards resume against silently mixing state from differently
    configured runs while still allowing logs and checkpoints to move
    between directories.
    """
    payload = {
        "seed": cfg.seed,
        "backend": cfg.backend,
        "window": list(cfg.window),
        "normalize_fitness": cfg.normalize_fitness,
        "space": dataclasses.asdict(cfg.space),
        "ga": dataclasses.asdict(cfg.ga),
        "train": dataclasses.asdict(cfg.train),
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def _int_tuple(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.replace(",", " ").split())


def _int_pair(text: str) -> tuple[int, int]:
    values = _int_tuple(text)
    if len(values) != 2:
        raise ValueError(f"expected two integers, got {text!r}")
    return values


def _float_tuple(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.replace(",", " ").split())


def _bool(text: str) -> bool:
    try:
        return configparser.ConfigParser.BOOLEAN_STATES[text.strip().lower()]
    except KeyError:
        raise ValueError(f"not a boolean: {text!r}") from None


_SPACE_PARSERS = {
    "filter_counts": _int_tuple,
    "filter_sizes": _int_tuple,
    "conv_stride_range": _int_pair,
    "pool_stride_range": _int_pair,
    "min_cells": int,
    "max_cells": int,
    "input_height": int,
    "input_width": int,
    "input_channels": int,
    "allow_skip_conv": _bool,
}

_GA_PARSERS = {
    "population_size": int,
    "generations": int,
    "tournament_size": int,
    "crossover_prob": float,
    "mutation_prob": float,
    "crossover_retry_cap": int,
}

_TRAIN_PARSERS = {
    "mini_batches": int,
    "final_mini_batches": int,
    "batch_size": int,
    "learning_rate": float,
    "adam_beta1": float,
    "adam_beta2": float,
    "label": str,
    "eval_interval": int,
    "seed": int,
}

_RUN_KEYS = ("seed", "backend", "worker", "log", "cache", "checkpoint",
             "window", "normalize_fitness")


def load_config(path) -> RunConfig:
    """Parse an INI run config, rejecting anything it does not understand.

    A typo in an option name silently reverting to a default could burn
    days of GPU time, so unknown sections and keys are hard errors.
    [train] seed falls back to the run seed when not set explicitly.
    """
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise FileNotFoundError(f"config file not found: {path}")
    known = {
        "run": set(_RUN_KEYS),
        "space": set(_SPACE_PARSERS),
        "ga": set(_GA_PARSERS),
        "train": set(_TRAIN_PARSERS),
    }
    for section in parser.sections():
        if section not in known:
            raise ValueError(f"unknown config section [{section}]")
        extra = set(parser[section]) - known[section]
        if extra:
            raise ValueError(
                f"unknown key(s) in [{section}]: {', '.join(sorted(extra))}")

    def collect(section: str, parsers: dict) -> dict:
        if not parser.has_section(section):
            return {}
        proxy = parser[section]
        return {key: convert(proxy[key])
                for key, convert in parsers.items() if key in proxy}

    run = parser["run"] if parser.has_section("run") else {}
    seed = int(run.get("seed", 0))
    train_kwargs = collect("train", _TRAIN_PARSERS)
    train_kwargs.setdefault("seed", seed)
    window = run.get("window")
    return RunConfig(
        seed=seed,
        backend=run.get("backend", "surrogate"),
        worker=run.get("worker") or None,
        log_path=run.get("log", "run_log.jsonl"),
        cache_path=run.get("cache") or None,
        checkpoint_path=run.get("checkpoint") or None,
        window=_float_tuple(window) if window else DEFAULT_WINDOW,
        normalize_fitness=_bool(run.get("normalize_fitness", "true")),
        space=SearchSpace(**collect("space", _SPACE_PARSERS)),
        ga=GaConfig(**collect("ga", _GA_PARSERS)),
        train=TrainConfig(**train_kwargs),
    )


def make_evaluator(cfg: RunConfig):
    if cfg.backend == "surrogate":
        return SurrogateEvaluator()
    if not cfg.worker:
        raise ValueError("backend 'worker' needs a worker address or command")
    host, sep, port = cfg.worker.rpartition(":")
    if sep and port.isdigit() and "/" not in host and " " not in host:
        transport = LineTransport.to_socket(host or "localhost", int(port))
    else:
        transport = LineTransport.to_subprocess(shlex.split(cfg.worker))
    return RemoteEvaluator(transport)


class RunLog:
    """Append-only JSON-lines account of one search run.

    The file handle is binary so byte offsets recorded in checkpoints
    are exact; resume truncates to the checkpointed offset and replays,
    which keeps resumed logs byte-identical to uninterrupted ones.
    """

    def __init__(self, path, resume_offset: int | None = None):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if resume_offset is None or not self.path.exists():
            if resume_offset:
                raise RunStateError(f"run log missing: {self.path}")
            self._fh = open(self.path, "wb")
        else:
            have = self.path.stat().st_size
            if have < resume_offset:
                raise RunStateError(
                    f"run log holds {have} bytes, checkpoint expects {resume_offset}")
            self._fh = open(self.path, "r+b")
            self._fh.truncate(resume_offset)
            self._fh.seek(resume_offset)

    def append(self, record: dict):
        self._fh.write((json.dumps(record, sort_keys=True) + "\n").encode("utf-8"))
        self._fh.flush()

    def offset(self) -> int:
        return self._fh.tell()

    def close(self):
        self._fh.close()


def iter_log(path):
    """Records of a run log, in order."""
    with open(path, "rb") as fh:
        for line in fh:
            if line.strip():
                yield json.loads(line.decode("utf-8"))


def save_checkpoint(path, state: dict):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(state, sort_keys=True), encoding="utf-8")
    os.replace(tmp, path)


def load_checkpoint(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


@dataclass
class RunResult:
    best: dict | None
    population: list[Individual]
    generations_run: int
    complete: bool
    counters: dict
    summaries: list[dict]


def _new_counters() -> dict:
    return {"evaluations": 0, "cache_hits": 0, "failures": 0,
            "crossovers": 0, "mutations": 0, "fallbacks": 0}


def run_search(cfg: RunConfig, evaluator=None, resume_from=None,
               stop_after: int | None = None) -> RunResult:
    """Run (or resume) the evolutionary search and return the best found.

    stop_after pauses the run after that many completed generations; a
    later call with resume_from picks the run up at the checkpoint.  A
    transient evaluation failure aborts the run with the checkpoint and
    cache intact, so resuming repeats no finished training work.
    """
    owns_evaluator = evaluator is None
    if owns_evaluator:
        evaluator = make_evaluator(cfg)
    fp = fingerprint(cfg)
    cache = FitnessCache(cfg.cache_path)
    seq = np.random.SeedSequence(cfg.seed)
    rngs = {name: np.random.default_rng(child)
            for name, child in zip(_STREAM_NAMES, seq.spawn(len(_STREAM_NAMES)))}

    if resume_from is not None:
        state = load_checkpoint(resume_from)
        if state.get("version") != CHECKPOINT_VERSION:
            raise RunStateError(f"unsupported checkpoint version {state.get('version')}")
        if state.get("fingerprint") != fp:
            raise RunStateError(
                "checkpoint comes from a run with a different configuration")
        for name, rng in rngs.items():
            rng.bit_generator.state = state["rng"][name]
        population = [Individual(Genome.from_text(rec["genome"]),
                                 rec["fitness"], rec["born"])
                      for rec in state["population"]]
        best = state["best"]
        summaries = list(state["summaries"])
        counters = dict(state["counters"])
        start = state["next_generation"]
        log = RunLog(cfg.log_path, resume_offset=state["log_offset"])
    else:
        population = [Individual(random_genome(cfg.space, rngs["init"]))
                      for _ in range(cfg.ga.population_size)]
        best = None
        summaries = []
        counters = _new_counters()
        start = 0
        log = RunLog(cfg.log_path)
        log.append({"type": "header", "version": LOG_VERSION, "fingerprint": fp,
                    "seed": cfg.seed, "backend": cfg.backend,
                    "population_size": cfg.ga.population_size,
                    "generations": cfg.ga.generations})
        _checkpoint(cfg, fp, 0, population, rngs, best, summaries, counters, log)

    next_gen = start
    try:
        for g in range(start, cfg.ga.generations):
            if stop_after is not None and g >= stop_after:
                break
            if g > 0:
                population = _breed(cfg, population, rngs, counters, log, g)
            _evaluate_generation(cfg, population, cache, evaluator, counters, log, g)
            gen_best = max(population, key=lambda ind: ind.fitness)
            mean = sum(ind.fitness for ind in population) / len(population)
            if best is None or gen_best.fitness > best["fitness"]:
                best = {"genome": gen_best.genome.to_text(),
                        "fitness": gen_best.fitness, "generation": g}
            summaries.append({"generation": g, "best": gen_best.fitness,
                              "mean": mean})
            log.append({"type": "generation", "generation": g,
                        "best": gen_best.fitness, "mean": mean,
                        "best_genome": gen_best.genome.to_text()})
            next_gen = g + 1
            _checkpoint(cfg, fp, next_gen, population, rngs, best, summaries,
                        counters, log)
        complete = next_gen >= cfg.ga.generations
        if complete:
            log.append({"type": "result", "fingerprint": fp,
                        "generations": cfg.ga.generations,
                        "best": best, "counters": counters})
    finally:
        log.close()
        if owns_evaluator and isinstance(evaluator, RemoteEvaluator):
            evaluator.transport.close()
    return RunResult(best=best, population=population, generations_run=next_gen,
                     complete=complete, counters=counters, summaries=summaries)


def _evaluate_generation(cfg, population, cache, evaluator, counters, log, g):
    for i, ind in enumerate(population):
        if ind.fitness is not None:
            continue
        rec = {"type": "evaluation", "generation": g, "index": i,
               "genome": ind.genome.to_text()}
        try:
            ind.fitness = lookup_or_evaluate(
                ind.genome, cfg.space, cache, evaluator, cfg.train,
                window=cfg.window, normalize=cfg.normalize_fitness,
                log=rec.update)
        except EvaluationError as err:
            if err.transient:
                raise
            # Permanent failure: the architecture scores zero and the
            # run moves on.
            ind.fitness = 0.0
            rec.update({"key": err.arch_key, "hit": False, "fitness": 0.0,
                        "failed": True, "error": str(err)})
            counters["failures"] += 1
        counters["evaluations"] += 1
        if rec.get("hit"):
            counters["cache_hits"] += 1
        log.append(rec)


def _breed(cfg, population, rngs, counters, log, g):
    """Selection, crossover and mutation producing generation g."""
    size = cfg.ga.population_size
    winners = [tournament_select(population, cfg.ga.tournament_size,
                                 rngs["selection"])
               for _ in range(size)]
    children: list[Genome] = []
    for pair, j in enumerate(range(0, size - 1, 2)):
        out = crossover(winners[j].genome, winners[j + 1].genome,
                        cfg.space, cfg.ga, rngs["crossover"])
        children.extend((out.child1, out.child2))
        if out.crossed:
            counters["crossovers"] += 1
        if out.fell_back:
            counters["fallbacks"] += 1
        log.append({"type": "crossover", "generation": g, "pair": pair,
                    "crossed": out.crossed, "point1": out.point1,
                    "point2": out.point2, "attempts": out.attempts,
                    "fell_back": out.fell_back})
    if size % 2:
        children.append(winners[-1].genome)
    bred = []
    for i, child in enumerate(children):
        out = mutate(child, cfg.space, cfg.ga, rngs["mutation"])
        if out.mutated:
            counters["mutations"] += 1
        log.append({"type": "mutation", "generation": g, "index": i,
                    "mutated": out.mutated, "gene": out.gene_index,
                    "old": out.old_value, "new": out.new_value})
        bred.append(Individual(out.genome, generation_born=g))
    return bred


def _checkpoint(cfg, fp, next_generation, population, rngs, best, summaries,
                counters, log):
    if cfg.checkpoint_path is None:
        return
    save_checkpoint(cfg.checkpoint_path, {
        "version": CHECKPOINT_VERSION,
        "fingerprint": fp,
        "next_generation": next_generation,
        "population": [{"genome": ind.genome.to_text(), "fitness": ind.fitness,
                        "born": ind.generation_born} for ind in population],
        "rng": {name: rng.bit_generator.state for name, rng in rngs.items()},
        "best": best,
        "summaries": summaries,
        "counters": counters,
        "log_offset": log.offset(),
    })


def _synthetic_split(p, cfg: RunConfig, tag: int, size: int):
    """Scored split drawn from the surrogate landscape, for dry runs."""
    digest = canonical_key(p).digest
    rng = np.random.default_rng(np.random.SeedSequence(
        [cfg.train.seed, int(digest[:16], 16), tag]))
    labels = (rng.random(size) < 0.5).astype(int)
    asym = surrogate_asymptote(p)
    center = np.where(labels == 1, asym, 1.0 - asym)
    scores = np.clip(rng.normal(center, 0.15), 0.0, 1.0)
    return scores, labels


def finalize_architecture(cfg: RunConfig, genome: Genome, evaluator=None) -> dict:
    """Long training pass for one architecture plus threshold tuning.

    The decision threshold is picked on the validation split and applied
    untouched to the test split.  With no worker attached the splits are
    synthesized from the surrogate landscape and flagged as such.
    """
    phenotype = decode(genome, cfg.space)
    owns_evaluator = evaluator is None and cfg.backend == "worker"
    if owns_evaluator:
        evaluator = make_evaluator(cfg)
    try:
        if evaluator is not None and hasattr(evaluator, "finalize"):
            reply = evaluator.finalize(phenotype, cfg.train)
            val, test = reply["val"], reply["test"]
            val_scores = np.asarray(val["scores"], dtype=float)
            val_labels = np.asarray(val["labels"])
            test_scores = np.asarray(test["scores"], dtype=float)
            test_labels = np.asarray(test["labels"])
            synthetic = False
        else:
            val_scores, val_labels = _synthetic_split(phenotype, cfg, 1, 240)
            test_scores, test_labels = _synthetic_split(phenotype, cfg, 2, 300)
            synthetic = True
    finally:
        if owns_evaluator and isinstance(evaluator, RemoteEvaluator):
            evaluator.transport.close()
    threshold, val_metrics = threshold_search(val_scores, val_labels)
    test_metrics = compute_metrics(
        confusion_from_predictions(test_scores > threshold, test_labels))
    return {
        "genome": genome.to_text(),
        "arch_key": canonical_key(phenotype).digest,
        "params": param_count(phenotype),
        "label": cfg.train.label,
        "mini_batches": cfg.train.final_mini_batches,
        "synthetic": synthetic,
        "threshold": threshold,
        "val": dataclasses.asdict(val_metrics),
        "test": dataclasses.asdict(test_metrics),
    }
