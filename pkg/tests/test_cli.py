"""End-to-end checks of the command-line surface: exit codes, canonical
output bytes, config merging, and rerun determinism."""

import json
import subprocess
import sys

import pytest

from oneshot_qcomp import cli
from oneshot_qcomp import ensemble as ens
from oneshot_qcomp import entropy as ent
from oneshot_qcomp.qcore import matrix_from_json, matrix_to_json


def run(capsys, *argv):
    rc = cli.main(list(argv))
    captured = capsys.readouterr()
    return rc, captured.out


def gen(capsys, tmp_path, name, m, k, groups, seed):
    path = tmp_path / name
    rc, _ = run(
        capsys, "gen-ensemble", "--m", str(m), "--k", str(k),
        "--groups", str(groups), "--seed", str(seed), "--out", str(path),
    )
    assert rc == 0
    return path


def test_gen_ensemble_roundtrip_and_determinism(capsys, tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    argv = ["gen-ensemble", "--m", "4", "--k", "2", "--groups", "1", "--seed", "3"]
    rc1, out1 = run(capsys, *argv, "--out", str(a))
    rc2, out2 = run(capsys, *argv, "--out", str(b))
    assert rc1 == rc2 == 0
    assert out1 == out2
    assert a.read_bytes() == b.read_bytes()
    summary = json.loads(out1)
    assert summary == {
        "avg_check": "pass", "groups": 1, "k": 2, "m": 4, "n": 2, "seed": 3,
    }
    e = ens.load(str(a))
    assert e.params.m == 4 and e.params.n == 2
    # binary container round-trips through the CLI too
    c = tmp_path / "c.bin"
    rc3, _ = run(capsys, *argv, "--out", str(c), "--format", "bin")
    assert rc3 == 0
    assert ens.load(str(c)).params.seed.seed == 3


def test_gen_ensemble_rejects_bad_params(capsys, tmp_path):
    rc, _ = run(
        capsys, "gen-ensemble", "--m", "6", "--k", "4", "--groups", "1",
        "--seed", "0", "--out", str(tmp_path / "x.json"),
    )
    assert rc == 2  # k does not divide m
    rc, _ = run(capsys, "gen-ensemble", "--k", "2", "--groups", "1",
                "--seed", "0", "--out", str(tmp_path / "y.json"))
    assert rc == 2  # --m missing


def test_entropies_cert_verify_flow(capsys, tmp_path):
    epath = gen(capsys, tmp_path, "e.json", 4, 2, 1, 11)
    cert = tmp_path / "cert.json"
    rep = tmp_path / "rep.json"
    rc, _ = run(capsys, "entropies", "--ensemble", str(epath),
                "--cert", str(cert), "--out", str(rep))
    assert rc == 0
    report = json.loads(rep.read_text())
    assert report["imax_converged"] is True
    assert abs(report["imax_bits"] - 1.0) < 1e-3
    assert abs(report["mutual_info_bits"] - 1.0) < 1e-8
    assert report["qic_bits"] == 0.5
    for row in report["per_state"]:
        assert abs(row["von_neumann"] - 1.0) < 1e-8
        assert abs(row["rel_to_avg"] - 1.0) < 1e-8
        assert abs(row["max_rel_to_avg"] - 1.0) < 1e-8

    rc, out = run(capsys, "verify-cert", "--ensemble", str(epath),
                  "--cert", str(cert))
    assert rc == 0
    detail = json.loads(out)
    assert detail["ok"] is True
    assert abs(detail["value_bits"] - 1.0) < 1e-3

    # shrinking the primal operator breaks domination; the verifier must say no
    obj = json.loads(cert.read_text())
    sigma = matrix_from_json(obj["primal_sigma"])
    obj["primal_sigma"] = matrix_to_json(0.5 * sigma)
    bad = tmp_path / "bad-cert.json"
    bad.write_text(json.dumps(obj))
    rc, out = run(capsys, "verify-cert", "--ensemble", str(epath),
                  "--cert", str(bad))
    assert rc == 3
    assert json.loads(out)["ok"] is False


def test_verify_cert_missing_file(capsys, tmp_path):
    epath = gen(capsys, tmp_path, "e.json", 4, 2, 1, 11)
    rc, _ = run(capsys, "verify-cert", "--ensemble", str(epath),
                "--cert", str(tmp_path / "nope.json"))
    assert rc == 2


def test_conc_test_threads_and_csv(capsys, tmp_path):
    argv = ["conc-test", "--m", "4", "--l", "2", "--alpha", "3.0",
            "--trials", "40", "--seed", "7"]
    out1 = tmp_path / "r1.json"
    out2 = tmp_path / "r2.json"
    csv1 = tmp_path / "t1.csv"
    csv2 = tmp_path / "t2.csv"
    rc1, _ = run(capsys, *argv, "--out", str(out1), "--csv", str(csv1))
    rc2, _ = run(capsys, *argv, "--out", str(out2), "--csv", str(csv2),
                 "--threads", "3")
    assert rc1 == rc2 == 0
    # thread fan-out must never change the artifact bytes
    assert out1.read_bytes() == out2.read_bytes()
    assert csv1.read_bytes() == csv2.read_bytes()
    report = json.loads(out1.read_text())
    assert report["params"]["trials"] == 40
    assert report["report"]["trials"] == 40
    assert 0.0 <= report["report"]["empirical_tail"] <= 1.0
    header = csv1.read_text().splitlines()[0]
    assert header == "trial,statistic,exceeded"


def test_conc_test_rejects_bad_params(capsys):
    rc, _ = run(capsys, "conc-test", "--m", "4", "--l", "2", "--alpha", "3.0",
                "--trials", "0", "--seed", "7")
    assert rc == 2
    rc, _ = run(capsys, "conc-test", "--m", "4", "--l", "8", "--alpha", "3.0",
                "--trials", "10", "--seed", "7")
    assert rc == 2  # subspace larger than the space


def test_attack_cli_converged_with_verify_and_threshold(capsys, tmp_path):
    epath = gen(capsys, tmp_path, "e.json", 4, 2, 2, 5)
    out1 = tmp_path / "atk1.json"
    out2 = tmp_path / "atk2.json"
    argv = ["attack", "--ensemble", str(epath), "--d", "4", "--restarts", "1",
            "--max-iters", "2", "--seed", "0", "--verify", "--eps", "0.5"]
    rc1, _ = run(capsys, *argv, "--out", str(out1))
    rc2, _ = run(capsys, *argv, "--out", str(out2))
    assert rc1 == rc2 == 0
    assert out1.read_bytes() == out2.read_bytes()
    report = json.loads(out1.read_text())
    assert report["converged"] is True
    assert report["best_error"] <= 1e-9
    # the verified value is recomputed from the serialized protocol, so it
    # matches up to the round-trip tolerance, not bit-for-bit
    assert abs(report["verified_error"] - report["best_error"]) <= 1e-9
    assert report["costs"]["comm_bits"] == 2.0
    assert report["costs"]["ent_bits"] == 0.0
    note = report["threshold_note"]
    assert note["informational"] is True
    assert note["preconditions_hold"] is False  # desk scale never qualifies
    assert note["error_beats_eps_half"] is True


def test_attack_cli_nonconverged_still_writes(capsys, tmp_path):
    epath = gen(capsys, tmp_path, "e.json", 4, 2, 2, 5)
    out = tmp_path / "atk.json"
    rc, _ = run(capsys, "attack", "--ensemble", str(epath), "--d", "2",
                "--restarts", "2", "--max-iters", "2", "--seed", "0",
                "--out", str(out))
    assert rc == 5
    report = json.loads(out.read_text())
    assert report["converged"] is False
    assert report["best_error"] < 1.0  # best-effort output is real work


def test_bounds_cli_values_and_formats(capsys):
    rc, out = run(capsys, "bounds", "constants")
    assert rc == 0
    consts = json.loads(out)
    assert consts["c1"] == 18433 and consts["c3"] == 73729

    argv = ["bounds", "cor5", "--eps", "0.5", "--k", "64", "--m", str(2**20),
            "--n", str(10**12)]
    rc, out_json = run(capsys, *argv)
    assert rc == 0
    rep = json.loads(out_json)
    assert abs(rep["bound_bits"] - 2.6218) < 5e-4
    rc, again = run(capsys, *argv)
    assert again == out_json  # rerun determinism on stdout

    rc, table = run(capsys, *argv, "--format", "table")
    assert rc == 0
    assert "bound_bits" in table
    assert "condition" in table and "n_lower" in table
    rc, csv_text = run(capsys, *argv, "--format", "csv")
    assert rc == 0
    lines = csv_text.splitlines()
    assert lines[0] == "field,value"
    assert any(line.startswith("condition,holds") for line in lines)

    rc, out = run(capsys, "bounds", "prop6", "--eps", str(2.0**-16),
                  "--k", "16", "--cc-const", "1")
    assert rc == 0
    assert json.loads(out)["value_bits"] == 6.0

    rc, out = run(capsys, "bounds", "ent-lb", "--eps", "0.5",
                  "--m", str(2**20), "--comm", "10")
    assert rc == 0
    rep = json.loads(out)
    assert rep["vacuous"] is True and rep["value_bits"] < 0.0

    rc, out = run(capsys, "bounds", "thm1", "--eps", "0.5", "--k", "64",
                  "--m", str(2**20))
    assert rc == 0
    assert "notes" in json.loads(out)

    rc, out = run(capsys, "bounds", "thm3", "--eps", "1.0", "--nu", "0.25",
                  "--beta", "0.5", "--k", "8", "--m", "64", "--n", "4096",
                  "--d", "4")
    assert rc == 0
    assert json.loads(out)["all_conditions_hold"] is False


def test_bounds_cli_rejects_bad_input(capsys):
    rc, _ = run(capsys, "bounds", "cor5", "--eps", "1.0", "--k", "64",
                "--m", "1024", "--n", "100")
    assert rc == 2  # eps must be < 1
    rc, _ = run(capsys, "bounds", "cor5", "--eps", "0.5", "--k", "64")
    assert rc == 2  # missing --m/--n
    rc, _ = run(capsys, "bounds", "nosuch")
    assert rc == 2  # argparse rejects the choice


def test_net_test_cli(capsys):
    rc, out = run(capsys, "net-test", "--dim", "1", "--eps", "1.0",
                  "--budget", "16", "--probes", "300", "--seed", "3")
    assert rc == 0
    rep = json.loads(out)
    assert rep["covered"] is True
    assert rep["points"] <= rep["size_bound"] == 16
    assert rep["max_gap"] <= 1.0
    rc, _ = run(capsys, "net-test", "--dim", "2", "--eps", "0.1",
                "--budget", "1000", "--probes", "10", "--seed", "3")
    assert rc == 4  # budget below the guaranteed net size


def test_config_merge_and_overrides(capsys, tmp_path):
    out_flags = tmp_path / "flags.json"
    out_cfg = tmp_path / "cfg.json"
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({
        "m": 4, "k": 2, "groups": 1, "seed": 3, "out": str(out_cfg),
    }))
    rc1, _ = run(capsys, "gen-ensemble", "--m", "4", "--k", "2", "--groups",
                 "1", "--seed", "3", "--out", str(out_flags))
    rc2, _ = run(capsys, "gen-ensemble", "--config", str(cfg))
    assert rc1 == rc2 == 0
    assert out_flags.read_bytes() == out_cfg.read_bytes()

    # a flag beats the config value for the same key
    out_override = tmp_path / "override.json"
    rc, _ = run(capsys, "gen-ensemble", "--config", str(cfg),
                "--seed", "4", "--out", str(out_override))
    assert rc == 0
    assert out_override.read_bytes() != out_flags.read_bytes()

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"m": 4, "bogus": 1}))
    rc, _ = run(capsys, "gen-ensemble", "--config", str(bad))
    assert rc == 2  # unknown key

    notdict = tmp_path / "notdict.json"
    notdict.write_text("[1, 2]")
    rc, _ = run(capsys, "gen-ensemble", "--config", str(notdict))
    assert rc == 2

    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    rc, _ = run(capsys, "gen-ensemble", "--config", str(broken))
    assert rc == 2


def test_precision_flag_changes_rendering(capsys):
    argv = ["bounds", "cor5", "--eps", "0.5", "--k", "64", "--m", str(2**20),
            "--n", str(10**12)]
    _, wide = run(capsys, *argv)
    _, narrow = run(capsys, *argv, "--precision", "3")
    assert wide != narrow
    assert abs(json.loads(narrow)["bound_bits"] - 2.62) < 5e-3


def test_argparse_exits_are_mapped(capsys):
    assert cli.main(["--help"]) == 0
    capsys.readouterr()
    assert cli.main([]) == 2  # a subcommand is required
    capsys.readouterr()
    assert cli.main(["gen-ensemble", "--m", "not-a-number"]) == 2
    capsys.readouterr()


def test_console_script_installed():
    proc = subprocess.run(
        ["oneshot-qcomp", "bounds", "constants"],
        capture_output=True, text=True, timeout=120,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["c1"] == 18433


def test_count_parser_accepts_scientific_notation(capsys):
    rc, out = run(capsys, "bounds", "cor5", "--eps", "0.5", "--k", "64",
                  "--m", "1048576", "--n", "1e12")
    assert rc == 0
    assert json.loads(out)["conditions"]["n_lower"]["lhs"] == 1e12
    rc, _ = run(capsys, "bounds", "cor5", "--eps", "0.5", "--k", "64",
                "--m", "1048576", "--n", "1.5e0")
    assert rc == 2
