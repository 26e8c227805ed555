import io
import json
import sys
from pathlib import Path

import pytest

from genas.cli import main


def make_ini(tmp_path, tag, seed=21, generations=3):
    path = tmp_path / f"{tag}.ini"
    path.write_text(f"""
[run]
seed = {seed}
backend = surrogate
log = {tmp_path}/{tag}.jsonl
cache = {tmp_path}/{tag}.cache.tsv
checkpoint = {tmp_path}/{tag}.ckpt.json

[ga]
population_size = 6
generations = {generations}

[train]
mini_batches = 40
label = acrosome
""")
    return path


def test_decode_table_lists_layers_and_totals(capsys):
    status = main(["decode", "--genome", "8,3,1,2,16,3,1,2"])
    out = capsys.readouterr().out
    assert status == 0
    assert "input 64x64x1" in out
    assert "conv filters=8 size=3 stride=1 act=selu" in out
    assert "total params: 1855713" in out
    assert "cells kept: 2  pruned: 0" in out


def test_decode_records_format_reads_stdin(monkeypatch, capsys):
    monkeypatch.setattr(sys, "stdin", io.StringIO("8,3,1,2,16,3,1,2\n8,3,1,2,8,3,1,2\n"))
    status = main(["decode", "--format", "records"])
    lines = capsys.readouterr().out.strip().splitlines()
    assert status == 0 and len(lines) == 2
    first = json.loads(lines[0])
    assert first["genome"] == "8,3,1,2,16,3,1,2"
    assert first["params"] == 1855713
    assert first["arch"]["layers"][0] == {"kind": "conv", "filters": 8,
                                          "size": 3, "stride": 1}
    assert len(first["key"]) == 64


def test_decode_flags_invalid_genomes(capsys):
    status = main(["decode", "--genome", "8,9,1,2,8,3,1,2"])
    err = capsys.readouterr().err
    assert status == 1
    assert "filter size 9" in err


def test_decode_honors_space_overrides(capsys):
    status = main(["decode", "--genome", "8,0,1,2,8,3,1,2",
                   "--allow-skip-conv", "--input", "32x32x3"])
    out = capsys.readouterr().out
    assert status == 0
    assert "input 32x32x3" in out


def test_validate_reports_each_violation(capsys):
    assert main(["validate", "--genome", "8,3,1,2,16,3,1,2"]) == 0
    assert capsys.readouterr().out.strip() == "valid"
    assert main(["validate", "--genome", "9,3,1,2"]) == 1
    out = capsys.readouterr().out
    assert "length 4 outside [8, 200]" in out
    assert "filter count 9" in out


def test_metrics_prints_the_four_scores(capsys):
    status = main(["metrics", "--tp", "197", "--fp", "16", "--fn", "51",
                   "--tn", "36"])
    out = capsys.readouterr().out
    assert status == 0
    assert out.splitlines() == [
        "accuracy 0.7767",
        "precision 0.9249",
        "recall 0.7944",
        "f_score 0.8955",
    ]


def test_search_then_report_then_finalize(tmp_path, capsys):
    ini = make_ini(tmp_path, "full")
    assert main(["search", "--config", str(ini)]) == 0
    out = capsys.readouterr().out
    assert "completed 3 generations" in out
    assert "best fitness" in out

    assert main(["report", "--log", f"{tmp_path}/full.jsonl"]) == 0
    report = capsys.readouterr().out
    assert "generation   0" in report and "generation   2" in report
    assert "evaluations" in report

    assert main(["finalize", "--config", str(ini)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["synthetic"] is True
    assert payload["label"] == "acrosome"
    assert set(payload["test"]) == {"accuracy", "precision", "recall", "f_score"}


def test_search_pause_and_resume_match_an_uninterrupted_run(tmp_path, capsys):
    whole = make_ini(tmp_path, "whole")
    assert main(["search", "--config", str(whole)]) == 0
    capsys.readouterr()

    paused = make_ini(tmp_path, "paused")
    assert main(["search", "--config", str(paused), "--stop-after", "1"]) == 0
    assert "paused after 1 generations" in capsys.readouterr().out
    assert main(["search", "--config", str(paused), "--resume"]) == 0
    assert "completed 3 generations" in capsys.readouterr().out
    whole_log = (tmp_path / "whole.jsonl").read_bytes()
    paused_log = (tmp_path / "paused.jsonl").read_bytes()
    assert whole_log == paused_log


def test_resume_needs_a_checkpoint_path(tmp_path, capsys):
    ini = tmp_path / "no_ckpt.ini"
    ini.write_text(f"[run]\nseed = 1\nlog = {tmp_path}/x.jsonl\n"
                   "[ga]\npopulation_size = 4\ngenerations = 1\n")
    assert main(["search", "--config", str(ini), "--resume"]) == 2
    assert "no checkpoint path" in capsys.readouterr().err
