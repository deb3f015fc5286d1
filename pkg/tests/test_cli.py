"""Command line interface: config parsing, exit codes, file outputs."""

import csv
import json

import pytest

from gravinst import cli

PAIR = {"d": 1, "n": 2, "m": 1, "radii": [[1.0, 0.0]], "heights": [0.0]}
FLAT = {"d": 1, "n": 1, "m": 0, "radii": [[1.0, 0.0]], "heights": [0.0]}


def write_cfg(tmp_path, doc, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def base_doc(**overrides):
    doc = {
        "schema": "1",
        "singularity": dict(PAIR),
        "checks": ["kahler"],
        "sample": {"count": 4, "seed": 0},
    }
    doc.update(overrides)
    return doc


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# --- run configuration parsing ---


def test_parse_run_config_round_trip():
    run = cli.parse_run_config(base_doc())
    again = cli.parse_run_config(run.to_json())
    assert again.singularity == run.singularity
    assert again.checks == run.checks == ("kahler",)
    assert again.sample == run.sample
    cfg = run.build()
    assert cfg.k == 2 and cfg.mode == "ale"


def test_parse_run_config_rejections():
    bad = [
        {"singularity": PAIR},  # missing schema
        base_doc(schema="0"),
        base_doc(extra=1),
        base_doc(checks=["nosuch"]),
        base_doc(checks="kahler"),
        base_doc(sample={"count": 4, "speed": 9}),
        base_doc(tolerances={"ricci": -1.0}),
        base_doc(out=7),
        [1, 2, 3],
    ]
    for doc in bad:
        with pytest.raises(cli.ConfigError):
            cli.parse_run_config(doc)


def test_singularity_file_indirection(tmp_path):
    sing = tmp_path / "sing.json"
    sing.write_text(json.dumps(PAIR))
    run = cli.parse_run_config(base_doc(singularity=str(sing)))
    assert run.build().k == 2
    with pytest.raises(cli.ConfigError):
        cli.parse_run_config(base_doc(singularity=str(tmp_path / "absent.json")))


# --- verify subcommand ---


def test_verify_writes_report(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = cli.main(
        ["verify", "--config", write_cfg(tmp_path, base_doc()), "--out", str(out)]
    )
    assert code == 0
    doc = json.loads(out.read_text())
    assert set(doc) == {"report", "timing"}
    rep = doc["report"]
    assert rep["pass"] is True
    assert rep["mode"] == "ale"
    assert len(rep["checks"]) == 6
    err = capsys.readouterr().err
    assert err.count("PASS") == 6 and "FAIL" not in err


def test_verify_is_deterministic(tmp_path):
    cfg = write_cfg(tmp_path, base_doc())
    outs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        assert cli.main(["verify", "--config", cfg, "--out", str(out)]) == 0
        outs.append(json.loads(out.read_text()))
    assert outs[0]["report"] == outs[1]["report"]


def test_verify_perturb_fails_invariance(tmp_path, capsys):
    cfg = write_cfg(tmp_path, base_doc(checks=["invariance"]))
    out = tmp_path / "r.json"
    code = cli.main(
        ["verify", "--config", cfg, "--perturb", "0.01", "--out", str(out)]
    )
    assert code == 1
    assert "FAIL" in capsys.readouterr().err
    assert json.loads(out.read_text())["report"]["pass"] is False


def test_verify_check_flag_overrides_config(tmp_path):
    cfg = write_cfg(tmp_path, base_doc())
    out = tmp_path / "r.json"
    code = cli.main(
        ["verify", "--config", cfg, "--check", "periods", "--out", str(out)]
    )
    assert code == 0
    rep = json.loads(out.read_text())["report"]
    assert [c["name"] for c in rep["checks"]] == ["periods"]


def test_verify_tolerance_override(tmp_path):
    cfg = write_cfg(tmp_path, base_doc(tolerances={"kahler-compat": 1e-30}))
    out = tmp_path / "r.json"
    assert cli.main(["verify", "--config", cfg, "--out", str(out)]) == 1
    rep = json.loads(out.read_text())["report"]
    failed = [c for c in rep["checks"] if not c["pass"]]
    assert {c["name"] for c in failed} == {
        "kahler-compat-gh",
        "kahler-compat-hitchin",
    }
    # a key that matches nothing is a config error, not a silent pass
    cfg = write_cfg(tmp_path, base_doc(tolerances={"nosuch": 1.0}), "t.json")
    assert cli.main(["verify", "--config", cfg]) == 2


def test_verify_csv_output(tmp_path):
    csv_path = tmp_path / "samples.csv"
    cfg = write_cfg(tmp_path, base_doc(csv=str(csv_path)))
    assert cli.main(["verify", "--config", cfg, "--out", str(tmp_path / "r.json")]) == 0
    rows = read_rows(csv_path)
    assert rows[0] == list(cli._CSV_HEADER)
    # 4 samples for each construction in ale mode
    assert len(rows) == 1 + 8
    assert {r[0] for r in rows[1:]} == {"gh", "hitchin"}


def test_verify_config_errors(tmp_path):
    gcd = base_doc()
    gcd["singularity"] = {"d": 1, "n": 4, "m": 2, "radii": [[1.0, 0.0]]}
    cases = [
        base_doc(extra=1),
        {"singularity": PAIR},
        gcd,
    ]
    for i, doc in enumerate(cases):
        assert cli.main(["verify", "--config", write_cfg(tmp_path, doc, f"c{i}.json")]) == 2
    assert cli.main(["verify", "--config", str(tmp_path / "missing.json")]) == 2


def test_verify_mode_override(tmp_path):
    cfg = write_cfg(tmp_path, base_doc(singularity=dict(FLAT), checks=["periods"]))
    out = tmp_path / "r.json"
    code = cli.main(["verify", "--config", cfg, "--mode", "alf", "--out", str(out)])
    assert code == 0
    assert json.loads(out.read_text())["report"]["mode"] == "alf"


def test_verify_akl_mode(tmp_path):
    cfg = write_cfg(
        tmp_path, base_doc(singularity={"n": 2, "m": 1}, checks=["fits"])
    )
    out = tmp_path / "r.json"
    code = cli.main(["verify", "--config", cfg, "--mode", "akl:4", "--out", str(out)])
    assert code == 0
    rep = json.loads(out.read_text())["report"]
    assert [c["name"] for c in rep["checks"]] == ["akl-convergence"]
    # truncation override next to explicit center data is ambiguous
    cfg = write_cfg(tmp_path, base_doc(), "b.json")
    assert cli.main(["verify", "--config", cfg, "--mode", "akl:4"]) == 2
    assert cli.main(["verify", "--config", cfg, "--mode", "akl:x"]) == 2
    assert cli.main(["verify", "--config", cfg, "--mode", "euclidean"]) == 2


# --- sample subcommand ---


def test_sample_points(tmp_path):
    cfg = write_cfg(tmp_path, base_doc())
    out = tmp_path / "pts.csv"
    code = cli.main(
        [
            "sample",
            "--config",
            cfg,
            "--construction",
            "gh",
            "--point",
            "0.5,1.5,0.5",
            "--point",
            "0.1,0.4,1.2,0.3",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    rows = read_rows(out)
    assert len(rows) == 3
    assert rows[1][0] == "gh"
    assert [float(v) for v in rows[1][2:6]] == [0.0, 0.5, 1.5, 0.5]
    assert float(rows[1][16]) > 0.0  # curvature column filled


def test_sample_flags_chart_boundary(tmp_path):
    cfg = write_cfg(tmp_path, base_doc())
    out = tmp_path / "pts.csv"
    code = cli.main(
        [
            "sample",
            "--config",
            cfg,
            "--construction",
            "hitchin",
            "--point",
            "0.1,0.2,0.0,0.0",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    rows = read_rows(out)
    assert rows[1][1] == "ChartBoundaryError"
    assert rows[1][6] == ""


def test_sample_grid(tmp_path):
    cfg = write_cfg(tmp_path, base_doc())
    out = tmp_path / "g.csv"
    code = cli.main(
        ["sample", "--config", cfg, "--grid", "3", "--out", str(out)]
    )
    assert code == 0
    assert len(read_rows(out)) == 4


def test_sample_argument_errors(tmp_path):
    cfg = write_cfg(tmp_path, base_doc())
    assert cli.main(["sample", "--config", cfg]) == 2
    assert cli.main(["sample", "--config", cfg, "--point", "1,2"]) == 2
    assert cli.main(["sample", "--config", cfg, "--point", "a,b,c"]) == 2
    flat = write_cfg(tmp_path, base_doc(singularity=dict(FLAT)), "f.json")
    code = cli.main(
        [
            "sample",
            "--config",
            flat,
            "--mode",
            "alf",
            "--construction",
            "hitchin",
            "--point",
            "0.1,0.2,0.5,0.0",
        ]
    )
    assert code == 2


# --- fit subcommand ---


def test_fit_pair_default_bands(tmp_path, capsys):
    cfg = write_cfg(tmp_path, base_doc())
    code = cli.main(["fit", "--config", cfg])
    assert code == 0
    out = capsys.readouterr().out
    assert "PASS decay" in out and "PASS volume" in out


def test_fit_rejects_decay_outside_ale(tmp_path):
    cfg = write_cfg(tmp_path, base_doc(singularity=dict(FLAT)))
    assert cli.main(["fit", "--config", cfg, "--mode", "alf", "--fit", "decay"]) == 2


# --- validate subcommand ---


def test_validate_round_trip(tmp_path):
    report_path = tmp_path / "r.json"
    csv_path = tmp_path / "s.csv"
    cfg = write_cfg(tmp_path, base_doc(csv=str(csv_path)))
    assert cli.main(["verify", "--config", cfg, "--out", str(report_path)]) == 0
    code = cli.main(
        [
            "validate",
            "--config",
            cfg,
            "--report",
            str(report_path),
            "--csv",
            str(csv_path),
        ]
    )
    assert code == 0
    # corrupt one field count and the csv check must trip
    rows = read_rows(csv_path)
    rows[1] = rows[1][:-1]
    with open(csv_path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)
    assert cli.main(["validate", "--csv", str(csv_path)]) == 2
    assert cli.main(["validate"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"report": {}}))
    assert cli.main(["validate", "--report", str(bad)]) == 2
