import json
import os

import pytest

from ssrsim.cli import main
from ssrsim.report import SimReport


def test_run_json_roundtrip(tmp_path, capsys):
    out = tmp_path / "r.json"
    rc = main(["run", "--kernel", "relu", "--cores", "1", "--size", "64",
               "--json", "--output", str(out)])
    assert rc == 0
    rep = SimReport.from_json(out.read_text())
    assert rep.kernel == "relu"
    assert rep.verified
    assert rep.speedup_vs_baseline and 1.8 <= rep.speedup_vs_baseline <= 4.0
    # lossless round trip
    again = SimReport.from_json(rep.to_json())
    assert again == rep
    # config echo carries everything needed to reproduce
    assert rep.config["cluster"]["timing"]["fma_latency"] == 3
    assert rep.config["seed"] == rep.seed


def test_run_unknown_kernel_is_config_error(capsys):
    rc = main(["run", "--kernel", "frobnicate"])
    assert rc == 3


def test_run_human_output(capsys):
    rc = main(["run", "--kernel", "reduction", "--size", "96",
               "--no-baseline"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "reduction/ssr" in out
    assert "utilization" in out


def test_compare_identical_configs_ratio_one(tmp_path, capsys):
    rc = main(["compare", "--kernels", "relu", "--config-a",
               "cores=1,variant=baseline", "--config-b",
               "cores=1,variant=baseline"])
    assert rc == 0
    out = capsys.readouterr().out.strip().splitlines()
    header, row = out[0], out[1]
    cols = dict(zip(header.split(","), row.split(",")))
    assert float(cols["cycle_ratio"]) == 1.0
    assert float(cols["fetch_ratio"]) == 1.0


def test_compare_bad_config(capsys):
    rc = main(["compare", "--kernels", "relu", "--config-a",
               "cores=x", "--config-b", "cores=1"])
    assert rc == 3


def test_sweep_monotone(capsys):
    rc = main(["sweep", "--dims", "1:2", "--side", "1:16"])
    assert rc == 0
    rows = capsys.readouterr().out.strip().splitlines()[1:]
    last = {}
    frontier = {}
    for row in rows:
        d, l, iters, eta, be, _ = row.split(",")
        d, l, eta, be = int(d), int(l), float(eta), int(be)
        if d in last:
            assert eta >= last[d]
        last[d] = eta
        if be and d not in frontier:
            frontier[d] = l
    assert frontier[1] == 6  # smallest profitable side for depth 1


def test_assemble_and_diagnostics(tmp_path, capsys):
    good = tmp_path / "ok.s"
    good.write_text("addi a0, zero, 1\necall\n")
    assert main(["assemble", str(good)]) == 0
    bad = tmp_path / "bad.s"
    bad.write_text("frob a0\n")
    assert main(["assemble", str(bad)]) == 3
    err = capsys.readouterr().err
    assert "bad.s:1" in err and "unknown mnemonic" in err


def test_pass_subcommand(tmp_path, capsys):
    ir = tmp_path / "dot.ir"
    ir.write_text("""
(loop 64
  (pa (phi 0x1000 (add pa 4)))
  (pb (phi 0x2000 (add pb 4)))
  (va (load pa))
  (vb (load pb))
  (acc (phi 0 (add acc (mul va vb)))))
(store 0x3000 acc)
""")
    rc = main(["pass", str(ir), "--run"])
    assert rc == 0
    cap = capsys.readouterr()
    assert "p.mac" in cap.out
    assert "transformed=True" in cap.err
    assert "cycles=" in cap.err


def test_seed_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("SSRSIM_SEED", "0x123")
    out = tmp_path / "r.json"
    rc = main(["run", "--kernel", "relu", "--size", "64", "--json",
               "--no-baseline", "--output", str(out)])
    assert rc == 0
    assert json.loads(out.read_text())["seed"] == 0x123


def test_run_reduction_report_matches_headline_numbers(tmp_path):
    out = tmp_path / "red.json"
    rc = main(["run", "--kernel", "reduction", "--cores", "1", "--json",
               "--output", str(out)])
    assert rc == 0
    rep = SimReport.from_json(out.read_text())
    assert rep.verified
    assert rep.utilization >= 0.9
    assert abs(rep.speedup_vs_baseline - 3.0) <= 0.3


def test_sweep_simulated_cross_check(capsys):
    rc = main(["sweep", "--dims", "1:1", "--side", "100:100",
               "--simulate", "1:100"])
    assert rc == 0
    row = capsys.readouterr().out.strip().splitlines()[1]
    _, _, _, eta, _, eta_sim = row.split(",")
    assert abs(float(eta) - float(eta_sim)) <= 0.02


def test_stall_causes_in_trace(tmp_path):
    trace = tmp_path / "t.csv"
    rc = main(["run", "--kernel", "scan", "--variant", "baseline",
               "--size", "64", "--no-baseline", "--trace", str(trace)])
    assert rc == 0
    text = trace.read_text()
    assert "issue" in text
    # the scan prologue has a genuine load-use dependency stall
    assert "stall:dep" in text
