import json
import os
import subprocess
from pathlib import Path

import pytest

BIN = os.environ.get("NLFT_BIN", "nlft")

SMALL = {
    "fixtures": [{"kind": "box", "T": 1.0, "n_samples": 257, "target_l1": 0.3, "seed": 7}],
    "grids": {"X": 16, "n_x": 96, "t": [1.0], "s": [0.2]},
    "checks": {"samples": 8, "refine": False},
}


def run(*args, cwd=None):
    return subprocess.run([BIN, *map(str, args)], capture_output=True, text=True, cwd=cwd)


def write_config(tmp_path, name="config.json", **changes):
    cfg = json.loads(json.dumps(SMALL))
    for key, value in changes.items():
        section, _, field = key.partition("__")
        if field:
            cfg.setdefault(section, {})[field] = value
        else:
            cfg[section] = value
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


def only_dir(out):
    dirs = [p for p in Path(out).iterdir() if p.is_dir()]
    assert len(dirs) == 1
    return dirs[0]


def test_box_transfer_rows_match_grid(tmp_path):
    cfg = write_config(tmp_path)
    r = run("nlft", "--config", cfg, "--out", tmp_path / "o")
    assert r.returncode == 0, r.stderr
    assert "plancherel" in r.stdout
    lines = (only_dir(tmp_path / "o") / "transfer.csv").read_text().splitlines()
    assert lines[0] == "x,re_a,im_a,re_b,im_b,abs_a,log_abs_a"
    assert len(lines) - 1 == 96


def test_zero_potential_gives_unit_a(tmp_path):
    cfg = write_config(tmp_path, fixtures=[{"kind": "box", "T": 1.0, "n_samples": 257, "target_l1": 0.0}])
    assert run("nlft", "--config", cfg, "--out", tmp_path / "o").returncode == 0
    rows = (only_dir(tmp_path / "o") / "transfer.csv").read_text().splitlines()[1:]
    assert rows and all(row.split(",")[1] == "1" for row in rows)


def test_nlft_is_deterministic(tmp_path):
    cfg = write_config(tmp_path)
    for out in ("a", "b"):
        assert run("nlft", "--config", cfg, "--out", tmp_path / out).returncode == 0
    for name in ("transfer.csv", "log_abs_a.csv"):
        assert (only_dir(tmp_path / "a") / name).read_bytes() == (only_dir(tmp_path / "b") / name).read_bytes()


def test_zeros_svg_markers_match_rows(tmp_path):
    cfg = write_config(tmp_path)
    r = run("zeros", "--config", cfg, "--out", tmp_path / "o", "--plots")
    assert r.returncode == 0, r.stderr
    d = only_dir(tmp_path / "o")
    lines = (d / "zeros.csv").read_text().splitlines()
    assert lines[0] == "t,s,rank,re_z,im_z,X,Y,re_alpha,im_alpha,in_Omega,in_Omega_tilde,in_Xi,D"
    assert len(lines) > 1
    assert (d / "zeros.svg").read_text().count("<circle") == len(lines) - 1


def test_spectrum_outputs(tmp_path):
    cfg = write_config(tmp_path)
    r = run("spectrum", "--config", cfg, "--out", tmp_path / "o", "--plots")
    assert r.returncode == 0, r.stderr
    d = only_dir(tmp_path / "o")
    assert (d / "spectrum.csv").read_text().splitlines()[0] == "x,w,w_tilde"
    kernel = (d / "kernel.csv").read_text().splitlines()
    assert kernel[0] == "re_lambda,im_lambda,re_z,im_z,re_K,im_K,bound_rhs,ratio"
    assert len(kernel) - 1 == 8
    assert (d / "spectrum.svg").exists()


def test_verify_identity_suite_passes_and_is_deterministic(tmp_path):
    ids = ["su11", "determinant", "w_cross", "plancherel", "free_kernel", "reproducing"]
    cfg = write_config(tmp_path, checks__ids=ids)
    outs = []
    for out in ("a", "b"):
        r = run("verify", "--config", cfg, "--out", tmp_path / out)
        assert r.returncode == 0, r.stdout + r.stderr
        outs.append((tmp_path / out / "report.json").read_bytes())
    assert outs[0] == outs[1]
    reports = json.loads(outs[0])
    assert [r["check_id"] for r in reports] == ids
    summary = (tmp_path / "a" / "summary.csv").read_text().splitlines()
    assert summary[0] == "check_id,fixture,verdict,empirical_constant,refinement_delta"
    r = run("report", tmp_path / "a" / "report.json")
    assert r.returncode == 0 and "reports=6 fail=0" in r.stdout


def test_report_with_failure_exits_one(tmp_path):
    cfg = write_config(tmp_path, checks__ids=["su11"])
    assert run("verify", "--config", cfg, "--out", tmp_path / "o").returncode == 0
    reports = json.loads((tmp_path / "o" / "report.json").read_text())
    reports[0]["verdict"] = "fail"
    (tmp_path / "bad.json").write_text(json.dumps(reports))
    assert run("report", tmp_path / "bad.json").returncode == 1


@pytest.mark.parametrize(
    "text",
    ['{"grids": {"n_x": 4}}', '{"unknown": 1}', "not json", '{"fixtures": [{"kind": "box", "target_l1": 0.9}]}'],
)
def test_bad_config_exits_two(tmp_path, text):
    path = tmp_path / "bad.json"
    path.write_text(text)
    r = run("verify", "--config", path, "--out", tmp_path / "o")
    assert r.returncode == 2
    assert r.stderr.strip()


def test_large_l1_flag_overrides(tmp_path):
    cfg = write_config(
        tmp_path,
        fixtures=[{"kind": "box", "T": 1.0, "n_samples": 257, "target_l1": 0.9}],
        checks__ids=["su11"],
    )
    assert run("verify", "--config", cfg, "--out", tmp_path / "o").returncode == 2
    assert run("verify", "--config", cfg, "--out", tmp_path / "o", "--allow-large-l1").returncode == 0


def test_usage_errors(tmp_path):
    assert run().returncode == 2
    assert run("verify", "--threads", "-3").returncode == 2
    assert run("bogus").returncode == 2
    assert run("--help").returncode == 0


def test_unwritable_output_exits_two(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = write_config(tmp_path, checks__ids=["su11"])
    r = run("nlft", "--config", cfg, "--out", blocker / "sub")
    assert r.returncode == 2
    assert "io error" in r.stderr
