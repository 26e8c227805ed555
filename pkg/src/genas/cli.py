"""Command line front door: searches, resume, decoding, validation, reports."""

from __future__ import annotations

import argparse
import json
import sys

from .arch_compiler import canonical_key, decode, describe, param_count, to_wire
from .data_tools import ConfusionMatrix, compute_metrics
from .evaluation import EvaluationError
from .orchestrator import (RunStateError, finalize_architecture, iter_log,
                           load_checkpoint, load_config, run_search)
from .search_space import Genome, InvalidGenomeError, SearchSpace, validate_genome


def _space_from_args(args) -> SearchSpace:
    kwargs = {}
    if getattr(args, "allow_skip_conv", False):
        kwargs["allow_skip_conv"] = True
    if getattr(args, "input", None):
        h, w, c = (int(tok) for tok in args.input.lower().split("x"))
        kwargs.update(input_height=h, input_width=w, input_channels=c)
    return SearchSpace(**kwargs)


def _genome_texts(args):
    if args.genome is not None:
        yield args.genome
        return
    for line in sys.stdin:
        line = line.strip()
        if line:
            yield line


def _print_table(p):
    print("input {}x{}x{}".format(*p.input_shape))
    for row in describe(p):
        bits = [row["kind"]]
        for key in ("filters", "size", "stride", "units"):
            if row[key]:
                bits.append(f"{key}={row[key]}")
        if row["activation"]:
            bits.append(f"act={row['activation']}")
        shape = "x".join(str(d) for d in row["out_shape"])
        print(f"  {' '.join(bits):<44} -> {shape:<10} params={row['params']}")
    print(f"total params: {param_count(p)}")
    print(f"cells kept: {p.cells_kept}  pruned: {p.cells_pruned}")


def cmd_decode(args) -> int:
    space = _space_from_args(args)
    status = 0
    for text in _genome_texts(args):
        try:
            p = decode(Genome.from_text(text), space)
        except (InvalidGenomeError, ValueError) as err:
            if args.format == "records":
                detail = getattr(err, "violations", None) or [str(err)]
                print(json.dumps({"genome": text, "error": detail}, sort_keys=True))
            else:
                print(f"invalid genome: {err}", file=sys.stderr)
            status = 1
            continue
        if args.format == "records":
            print(json.dumps({"genome": text, "params": param_count(p),
                              "key": canonical_key(p).digest, "arch": to_wire(p)},
                             sort_keys=True))
        elif args.format == "wire":
            print(json.dumps(to_wire(p), sort_keys=True))
        elif args.format == "json":
            print(json.dumps({"genome": text, "layers": describe(p),
                              "params": param_count(p),
                              "key": canonical_key(p).digest,
                              "cells_kept": p.cells_kept,
                              "cells_pruned": p.cells_pruned}, sort_keys=True))
        else:
            _print_table(p)
    return status


def cmd_validate(args) -> int:
    space = _space_from_args(args)
    status = 0
    for text in _genome_texts(args):
        try:
            violations = validate_genome(Genome.from_text(text), space)
        except ValueError as err:
            violations = [str(err)]
        if violations:
            status = 1
            for v in violations:
                print(f"invalid: {v}")
        else:
            print("valid")
    return status


def cmd_metrics(args) -> int:
    cm = ConfusionMatrix(true_positive=args.tp, false_positive=args.fp,
                         true_negative=args.tn, false_negative=args.fn)
    m = compute_metrics(cm, beta=args.beta)
    for name, value in (("accuracy", m.accuracy), ("precision", m.precision),
                        ("recall", m.recall), ("f_score", m.f_score)):
        print(f"{name} {value:.4f}")
    return 0


def cmd_search(args) -> int:
    cfg = load_config(args.config)
    resume_from = None
    if args.resume is not None:
        resume_from = cfg.checkpoint_path if args.resume is True else args.resume
        if resume_from is None:
            print("no checkpoint path configured; pass one to --resume",
                  file=sys.stderr)
            return 2
    try:
        result = run_search(cfg, resume_from=resume_from,
                            stop_after=args.stop_after)
    except EvaluationError as err:
        print(f"evaluation failed: {err}", file=sys.stderr)
        print("the checkpoint and cache are intact; rerun with --resume",
              file=sys.stderr)
        return 2
    except RunStateError as err:
        print(f"cannot resume: {err}", file=sys.stderr)
        return 2
    if result.complete:
        print(f"completed {result.generations_run} generations")
    else:
        print(f"paused after {result.generations_run} generations; "
              f"continue with --resume")
    if result.best is not None:
        print(f"best fitness {result.best['fitness']:.4f} "
              f"from generation {result.best['generation']}")
        print(f"genome: {result.best['genome']}")
    return 0


def cmd_finalize(args) -> int:
    cfg = load_config(args.config)
    if args.genome:
        genome = Genome.from_text(args.genome)
    else:
        path = args.checkpoint or cfg.checkpoint_path
        if path is None:
            print("pass --genome or --checkpoint (or configure a checkpoint)",
                  file=sys.stderr)
            return 2
        best = load_checkpoint(path).get("best")
        if not best:
            print("checkpoint records no best individual yet", file=sys.stderr)
            return 2
        genome = Genome.from_text(best["genome"])
    try:
        report = finalize_architecture(cfg, genome)
    except EvaluationError as err:
        print(f"final training failed: {err}", file=sys.stderr)
        return 2
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def cmd_report(args) -> int:
    for rec in iter_log(args.log):
        kind = rec.get("type")
        if kind == "header":
            print(f"seed {rec['seed']}  backend {rec['backend']}  "
                  f"population {rec['population_size']}  "
                  f"generations {rec['generations']}")
        elif kind == "generation":
            print(f"generation {rec['generation']:>3}  "
                  f"best {rec['best']:.4f}  mean {rec['mean']:.4f}")
        elif kind == "result":
            best = rec["best"]
            c = rec["counters"]
            print(f"best fitness {best['fitness']:.4f} "
                  f"from generation {best['generation']}")
            print(f"genome: {best['genome']}")
            print(f"evaluations {c['evaluations']}  "
                  f"cache hits {c['cache_hits']}  failures {c['failures']}")
    return 0


def _add_genome_io(sub):
    sub.add_argument("--genome", help="comma separated genes; stdin lines when omitted")
    sub.add_argument("--allow-skip-conv", action="store_true",
                     help="accept filter size 0 as a skipped convolution")
    sub.add_argument("--input", metavar="HxWxC",
                     help="input shape override, e.g. 64x64x1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="genas",
        description="Evolutionary search over plain convolutional architectures.")
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("search", help="run or resume a search")
    ps.add_argument("--config", required=True, help="INI run configuration")
    ps.add_argument("--resume", nargs="?", const=True, default=None,
                    metavar="CHECKPOINT",
                    help="resume from the configured (or given) checkpoint")
    ps.add_argument("--stop-after", type=int, default=None, metavar="N",
                    help="pause once N generations are complete")
    ps.set_defaults(func=cmd_search)

    pf = sub.add_parser("finalize", help="train the chosen architecture and score it")
    pf.add_argument("--config", required=True)
    pf.add_argument("--genome", help="genome to finalize; default: checkpoint best")
    pf.add_argument("--checkpoint", help="checkpoint to take the best genome from")
    pf.set_defaults(func=cmd_finalize)

    pd = sub.add_parser("decode", help="compile genomes into layer stacks")
    _add_genome_io(pd)
    pd.add_argument("--format", choices=("table", "json", "wire", "records"),
                    default="table")
    pd.set_defaults(func=cmd_decode)

    pv = sub.add_parser("validate", help="check genomes against the search space")
    _add_genome_io(pv)
    pv.set_defaults(func=cmd_validate)

    pm = sub.add_parser("metrics", help="score a confusion matrix")
    for name in ("tp", "fp", "tn", "fn"):
        pm.add_argument(f"--{name}", type=int, required=True)
    pm.add_argument("--beta", type=float, default=0.5)
    pm.set_defaults(func=cmd_metrics)

    pr = sub.add_parser("report", help="summarize a run log")
    pr.add_argument("--log", required=True)
    pr.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
