import json
import math

import numpy as np
import pytest

from weakps import weak_value_curve
from weakps.cli import main

D2R = math.pi / 180.0


def _read_csv(path):
    meta, header, rows = {}, None, []
    for line in path.read_text().splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(" = ")
            meta[key] = value
        elif header is None:
            header = line.split(",")
        else:
            rows.append(line.split(","))
    return meta, header, rows


def test_sweep_weak_value_schema_and_values(tmp_path):
    out = tmp_path / "weak.csv"
    rc = main([
        "sweep-weak-value", "--kappa", "0.335", "--theta-start", "0",
        "--theta-end", "90", "--theta-step", "0.5", "--postselect", "both",
        "--format", "csv", "--output", str(out),
    ])
    assert rc == 0
    meta, header, rows = _read_csv(out)
    assert header == [
        "theta_deg", "sigma_w_minus", "sigma_w_plus", "anomalous_minus", "anomalous_plus"
    ]
    assert len(rows) == 180
    assert meta["kappa"] == "0.335"
    assert meta["schema_version"] == "1"
    first = rows[0]
    assert float(first[0]) == 0.0
    assert float(first[1]) == pytest.approx(1.0, abs=1e-12)
    assert first[3] == "0"
    # spot-check a row against the library
    row20 = rows[40]  # theta = 20 deg
    assert float(row20[0]) == 20.0
    assert float(row20[1]) == pytest.approx(weak_value_curve(20 * D2R, 0.335, "minus"), rel=1e-10)
    assert row20[3] == "1"


def test_sweep_weak_value_single_sign_schema(tmp_path):
    out = tmp_path / "weak.csv"
    assert main(["sweep-weak-value", "--kappa", "0.335", "--postselect", "minus",
                 "--output", str(out)]) == 0
    _, header, _ = _read_csv(out)
    assert header == ["theta_deg", "sigma_w_minus", "anomalous_minus"]


def test_sweep_pusey_schema(tmp_path):
    out = tmp_path / "pusey.csv"
    assert main(["sweep-pusey", "--kappa", "0.335", "--postselect", "both",
                 "--output", str(out)]) == 0
    meta, header, rows = _read_csv(out)
    assert header == ["theta_deg", "i0_minus", "i1_minus", "i0_plus", "i1_plus"]
    assert meta["p_phi_convention"] == "model"
    assert meta["skipped_minus"] == "1"  # exactly the orthogonal point 22.5
    values = [float(r[1]) for r in rows if r[1] != "nan"]
    assert max(values) < 0.0  # no violation at this strength


def test_sweep_pusey_simulated_counts(tmp_path):
    out = tmp_path / "pusey.json"
    assert main(["sweep-pusey", "--kappa", "0.335", "--postselect", "minus",
                 "--theta-step", "5", "--simulate", "--seed", "7",
                 "--p-phi", "counts", "--format", "json", "--output", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["metadata"]["p_phi_convention"] == "counts"
    assert payload["metadata"]["simulated_counts"] is True
    assert len(payload["records"]) == 18


def test_sweep_fisher_schema_and_budget(tmp_path):
    out = tmp_path / "fisher.csv"
    assert main(["sweep-fisher", "--kappa", "0.335", "--postselect", "both",
                 "--theta-step", "1", "--output", str(out)]) == 0
    _, header, rows = _read_csv(out)
    assert header == [
        "theta_deg", "f_ps_minus", "f_ps_plus", "q", "budget_lhs_minus", "budget_lhs_plus"
    ]
    for row in rows:
        assert float(row[3]) == 16.0
        assert float(row[4]) <= 16.0 + 1e-9
        assert float(row[5]) <= 16.0 + 1e-9
    assert any(float(row[1]) > 16.0 for row in rows)


def test_simulate_counts_then_estimate_round_trip(tmp_path):
    counts_path = tmp_path / "counts.json"
    assert main(["simulate-counts", "--kappa", "0.335", "--theta-start", "20",
                 "--theta-end", "20.5", "--theta-step", "1", "--seed", "99",
                 "--rate", "20000", "--format", "json", "--output", str(counts_path)]) == 0
    payload = json.loads(counts_path.read_text())
    assert len(payload["records"]) == 1
    rec = payload["records"][0]
    assert set(rec) == {"theta_deg", "n_mp", "n_mm", "n_pp", "n_pm", "seed"}

    est_path = tmp_path / "est.csv"
    assert main(["estimate", "--input", str(counts_path), "--postselect", "minus",
                 "--branch", "17.8,27.3", "--output", str(est_path)]) == 0
    _, header, rows = _read_csv(est_path)
    assert header == ["theta_deg", "sigma_hat", "sigma_variance", "theta_hat_deg",
                      "variance_theta_deg2", "f_ps", "m_ps", "sigma_cr_deg2"]
    assert len(rows) == 1
    theta_hat = float(rows[0][3])
    assert theta_hat == pytest.approx(20.0, abs=1.0)


def test_estimate_surfaces_branch_errors(tmp_path, capsys):
    counts_path = tmp_path / "counts.json"
    assert main(["simulate-counts", "--kappa", "0.335", "--theta-start", "20",
                 "--theta-end", "20.5", "--theta-step", "1", "--seed", "99",
                 "--format", "json", "--output", str(counts_path)]) == 0
    rc = main(["estimate", "--input", str(counts_path), "--postselect", "minus",
               "--branch", "0,45", "--output", str(tmp_path / "x.csv")])
    assert rc == 1
    assert "AmbiguousBranch" in capsys.readouterr().err


def test_table1_schema_and_baseline(tmp_path):
    out = tmp_path / "table1.csv"
    assert main(["table1", "--kappa", "0.335", "--repetitions", "5", "--seed", "3",
                 "--output", str(out)]) == 0
    meta, header, rows = _read_csv(out)
    assert header[:2] == ["postselect", "theta_deg"]
    assert "baseline_variance_deg2" in header
    assert len(rows) == 8
    by_key = {(r[0], float(r[1])): r for r in rows}
    row = by_key[("minus", 22.5)]
    assert float(row[header.index("baseline_variance_deg2")]) == 0.036
    assert float(row[header.index("baseline_cramer_rao_deg2")]) == 0.33
    assert meta["baseline_note"].startswith("baseline columns are published reference")


def test_decompose_json(tmp_path):
    out = tmp_path / "decomp.json"
    assert main(["decompose", "--kappa", "0", "--phi", "minus",
                 "--format", "json", "--output", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["p_d"] == 0.0
    assert np.allclose(payload["s_matrix"], [[0.5, -0.5], [-0.5, 0.5]], atol=1e-12)
    assert np.allclose(payload["e_d"], [[0.5, 0.0], [0.0, 0.5]], atol=1e-12)


def test_decompose_csv_flattened(tmp_path):
    out = tmp_path / "decomp.csv"
    assert main(["decompose", "--kappa", "0.335", "--phi", "minus",
                 "--output", str(out)]) == 0
    _, header, rows = _read_csv(out)
    assert header[0] == "p_d"
    assert float(rows[0][0]) == pytest.approx(0.05778187238835186, rel=1e-12)


def test_strength_flags_are_exclusive(capsys):
    assert main(["sweep-weak-value", "--kappa", "0.3", "--mu", "5"]) == 2
    assert main(["sweep-weak-value"]) == 2
    err = capsys.readouterr().err
    assert "exactly one of --kappa or --mu" in err


def test_mu_flag_matches_kappa(tmp_path):
    mu_deg = math.degrees(math.asin(0.335) / 4.0)
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    assert main(["sweep-weak-value", "--kappa", "0.335", "--theta-end", "10",
                 "--output", str(out_a)]) == 0
    assert main(["sweep-weak-value", "--mu", f"{mu_deg:.15f}", "--theta-end", "10",
                 "--output", str(out_b)]) == 0
    _, _, rows_a = _read_csv(out_a)
    _, _, rows_b = _read_csv(out_b)
    for ra, rb in zip(rows_a, rows_b):
        assert float(ra[1]) == pytest.approx(float(rb[1]), rel=1e-9)


def _strip_timestamp(text):
    return "\n".join(
        line for line in text.splitlines() if not line.startswith("# generated_at")
    )


def test_byte_identical_apart_from_timestamp(tmp_path):
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    args = ["sweep-weak-value", "--kappa", "0.335", "--postselect", "both"]
    assert main(args + ["--output", str(out_a)]) == 0
    assert main(args + ["--output", str(out_b)]) == 0
    assert _strip_timestamp(out_a.read_text()) == _strip_timestamp(out_b.read_text())


def test_simulated_outputs_deterministic(tmp_path):
    out_a = tmp_path / "a.json"
    out_b = tmp_path / "b.json"
    args = ["simulate-counts", "--kappa", "0.335", "--seed", "5", "--theta-end", "10",
            "--format", "json"]
    assert main(args + ["--output", str(out_a)]) == 0
    assert main(args + ["--output", str(out_b)]) == 0
    a = json.loads(out_a.read_text())
    b = json.loads(out_b.read_text())
    assert a["records"] == b["records"]
    # byte identical apart from the timestamp line
    strip = lambda text: "\n".join(l for l in text.splitlines() if "generated_at" not in l)
    assert strip(out_a.read_text()) == strip(out_b.read_text())


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("kappa = 0.2\ntheta_end = 10\npostselect = minus\n")
    out = tmp_path / "o.csv"
    assert main(["sweep-weak-value", "--config", str(cfg), "--kappa", "0.335",
                 "--output", str(out)]) == 0
    meta, header, _ = _read_csv(out)
    assert meta["kappa"] == "0.335"  # flag beats config
    assert meta["theta_end"] == "10"
    assert header == ["theta_deg", "sigma_w_minus", "anomalous_minus"]


def test_config_file_errors(tmp_path, capsys):
    missing = tmp_path / "nope.cfg"
    assert main(["sweep-weak-value", "--kappa", "0.3", "--config", str(missing)]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("kappa 0.3\n")
    assert main(["sweep-weak-value", "--config", str(bad)]) == 2


def test_output_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("WEAKPS_OUTPUT_DIR", str(tmp_path))
    assert main(["sweep-weak-value", "--kappa", "0.335", "--theta-end", "5",
                 "--output", "env_out.csv"]) == 0
    assert (tmp_path / "env_out.csv").exists()


def test_stdout_output(capsys):
    assert main(["sweep-weak-value", "--kappa", "0.335", "--theta-end", "1",
                 "--theta-step", "0.5"]) == 0
    out = capsys.readouterr().out
    assert "theta_deg,sigma_w_minus" in out


def test_unwritable_output_path(tmp_path, capsys):
    rc = main(["sweep-weak-value", "--kappa", "0.335",
               "--output", str(tmp_path / "no" / "such" / "dir.csv")])
    assert rc == 1
