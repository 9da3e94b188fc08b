import csv
import json
import os

import pytest

from outpostlab.cli import main


def _read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _model_file(tmp_path, body):
    p = tmp_path / "m.model"
    p.write_text(body)
    return str(p)


RADIAL = "kind = radial\nr2 = 1.25\nt0 = 1.0\n"


# -- model command -----------------------------------------------------------------


def test_model_summary_and_curves(tmp_path):
    out = tmp_path / "out"
    rc = main(["model", "--model", _model_file(tmp_path, RADIAL), "--out", str(out)])
    assert rc == 0
    summary = json.loads((out / "model_summary.json").read_text())
    assert summary["kind"] == "radial"
    assert summary["rho2"] == pytest.approx(1.25)
    assert summary["c"] == pytest.approx(0.0, abs=1e-12)
    header, rows = _read_csv(out / "boundary_curve1.csv")
    assert header == ["re", "im"]
    assert len(rows) > 100


def test_inline_model_flags(tmp_path):
    out = tmp_path / "out"
    rc = main(["model", "--kind", "radial", "--r2", "1.25", "--t0", "1.0",
               "--out", str(out)])
    assert rc == 0
    assert (out / "model_summary.json").exists()


def test_manifest_is_deterministic(tmp_path):
    mf = _model_file(tmp_path, RADIAL)
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["model", "--model", mf, "--out", str(out)]) == 0
        outs.append((out / "manifest.json").read_bytes())
    assert outs[0] == outs[1]
    man = json.loads(outs[0])
    assert man["command"] == "model"
    assert "out" not in man["config"]
    assert man["model"]["kind"] == "radial"


def test_bad_model_file_exits_nonzero(tmp_path, capsys):
    bad = _model_file(tmp_path, "kind = radial\nr2 = 0.9\nt0 = 1.0\n")
    rc = main(["model", "--model", bad, "--out", str(tmp_path / "out")])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


# -- kernel command ------------------------------------------------------------------


def test_kernel_diag_csv(tmp_path):
    out = tmp_path / "out"
    rc = main(["kernel", "--model", _model_file(tmp_path, RADIAL), "--n", "16",
               "--out", str(out)])
    assert rc == 0
    header, rows = _read_csv(out / "kernel_diag.csv")
    assert header == ["re_z", "im_z", "re_w", "im_w", "re_K", "im_K", "log10_abs_K"]
    assert len(rows) > 50
    assert all(float(r[5]) == 0.0 for r in rows[:5])


# -- sample command ------------------------------------------------------------------


def test_sample_dpp_files(tmp_path):
    out = tmp_path / "out"
    rc = main(["sample", "--model", _model_file(tmp_path, RADIAL), "--n", "8",
               "--num", "3", "--seed", "7", "--out", str(out)])
    assert rc == 0
    header, rows = _read_csv(out / "samples.csv")
    assert header == ["sample_id", "point_id", "re", "im"]
    assert len(rows) == 3 * 8
    assert (out / "counts.csv").exists()
    stats = json.loads((out / "counts_summary.json").read_text())
    assert stats["num_samples"] == 3
    assert "exact_mean" in stats


def test_sample_kostlan_counts_only(tmp_path):
    out = tmp_path / "out"
    rc = main(["sample", "--model", _model_file(tmp_path, RADIAL), "--n", "16",
               "--num", "50", "--seed", "3", "--method", "kostlan", "--out", str(out)])
    assert rc == 0
    assert not (out / "samples.csv").exists()
    header, rows = _read_csv(out / "counts.csv")
    assert header == ["k", "count"]
    assert sum(int(r[1]) for r in rows) == 50


def test_sample_reproducible(tmp_path):
    mf = _model_file(tmp_path, RADIAL)
    blobs = []
    for name in ("a", "b"):
        out = tmp_path / name
        main(["sample", "--model", mf, "--n", "8", "--num", "2", "--seed", "11",
              "--out", str(out)])
        blobs.append((out / "samples.csv").read_bytes())
    assert blobs[0] == blobs[1]


QD = "kind = quadrature_domain\nalpha_re = -0.5\nr1 = 0.735\nr2 = 1.0\nt0 = 1.0\n"


def test_sample_mcmc_nonradial(tmp_path):
    # exact count moments exist only for rotation-invariant models; the
    # command must still finish and write empirical stats for the others
    out = tmp_path / "out"
    rc = main(["sample", "--model", _model_file(tmp_path, QD), "--n", "6",
               "--num", "2", "--seed", "5", "--method", "mcmc", "--out", str(out)])
    assert rc == 0
    header, rows = _read_csv(out / "samples.csv")
    assert len(rows) == 2 * 6
    stats = json.loads((out / "counts_summary.json").read_text())
    assert "exact_mean" not in stats
    assert stats["num_samples"] == 2


def test_sample_kostlan_nonradial_rejected(tmp_path, capsys):
    rc = main(["sample", "--model", _model_file(tmp_path, QD), "--n", "6",
               "--num", "2", "--method", "kostlan", "--out", str(tmp_path / "out")])
    assert rc == 1
    assert "rotation-invariant" in capsys.readouterr().err


# -- berezin and heine commands ----------------------------------------------------


def test_berezin_csv(tmp_path):
    out = tmp_path / "out"
    rc = main(["berezin", "--model", _model_file(tmp_path, RADIAL), "--out", str(out)])
    assert rc == 0
    header, rows = _read_csv(out / "berezin_mass.csv")
    assert header == ["a", "mass1_limit", "mass2_limit"]
    for r in rows:
        assert float(r[1]) + float(r[2]) == pytest.approx(1.0, abs=1e-9)


def test_berezin_with_finite_n(tmp_path):
    out = tmp_path / "out"
    rc = main(["berezin", "--model", _model_file(tmp_path, RADIAL), "--n", "32",
               "--out", str(out)])
    assert rc == 0
    header, rows = _read_csv(out / "berezin_mass.csv")
    assert header == ["a", "mass1_limit", "mass2_limit", "mass2_finite"]
    assert all(0.0 <= float(r[3]) <= 1.0 for r in rows)


def test_heine_csv(tmp_path):
    out = tmp_path / "out"
    rc = main(["heine", "--model", _model_file(tmp_path, RADIAL), "--n", "32",
               "--out", str(out)])
    assert rc == 0
    header, rows = _read_csv(out / "heine_pmf.csv")
    assert header == ["k", "p_limit", "p_finite"]
    assert sum(float(r[1]) for r in rows) == pytest.approx(1.0, abs=1e-9)
    assert sum(float(r[2]) for r in rows) == pytest.approx(1.0, abs=1e-9)


# -- verify command ---------------------------------------------------------------------


def test_verify_single_check_passes(tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["verify", "--model", _model_file(tmp_path, RADIAL),
               "--check", "trace", "--out", str(out)])
    assert rc == 0
    assert "kernel_trace: pass" in capsys.readouterr().out
    rep = json.loads((out / "report_kernel_trace.json").read_text())
    assert rep["pass"] is True


def test_verify_ginibre_skips_outpost_checks(tmp_path):
    out = tmp_path / "out"
    mf = _model_file(tmp_path, "kind = ginibre\n")
    rc = main(["verify", "--model", mf, "--check", "heine", "--out", str(out)])
    assert rc == 0
    assert not [p for p in os.listdir(out) if p.startswith("report_")]
    assert (out / "manifest.json").exists()


def test_overwrite_is_atomic_and_clean(tmp_path):
    out = tmp_path / "out"
    mf = _model_file(tmp_path, RADIAL)
    for _ in range(2):
        assert main(["model", "--model", mf, "--out", str(out)]) == 0
    names = sorted(os.listdir(out))
    assert names == [
        "boundary_curve1.csv", "boundary_curve2.csv", "manifest.json",
        "model_summary.json",
    ]
