import csv
import re
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from levy_shc.cli import main

HEADER = "t,psi_inv,q_hat,q_se,loss,loss_se,scaled_loss,scaled_se,target,rel_gap,n_paths,n_steps,flagged"

BROWNIAN_DISK = """\
[process]
kind = brownian
dimension = 2

[domain]
kind = ball
r = 1

[experiment]
t_max = 1e-2
t_min = 1e-4
t_count = 3
n_paths = 4000
"""


@pytest.fixture
def cfg(tmp_path):
    def make(text=BROWNIAN_DISK, name="run.ini"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return make


def read(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_scan_header_rows_and_digits(cfg, tmp_path):
    out = tmp_path / "scan.csv"
    code = main(["scan", "--config", cfg(), "--out", str(out)])
    assert code in (0, 1)
    lines = out.read_text().splitlines()
    assert lines[0] == HEADER and len(lines) == 4
    rows = read(out)[1:]
    for row in rows:
        assert row[-1] in ("0", "1")
        assert int(row[10]) == 4000
        for v in row[:10]:
            # %.17g round-trips exactly
            assert float(repr(float(v))) == float(v)
            assert "%.17g" % float(v) == v
    # 4000 paths cannot meet the CI budget: rows are flagged, still written, exit code 1
    assert code == 1 and all(r[-1] == "1" for r in rows)


def test_scan_byte_identical_across_workers_and_reruns(cfg, tmp_path):
    paths = [tmp_path / f"{k}.csv" for k in "abc"]
    main(["scan", "--config", cfg(), "--out", str(paths[0]), "--workers", "1"])
    main(["scan", "--config", cfg(), "--out", str(paths[1]), "--workers", "8"])
    main(["scan", "--config", cfg(), "--out", str(paths[2]), "--workers", "1"])
    texts = [p.read_bytes() for p in paths]
    assert texts[0] == texts[1] == texts[2]


def test_seed_override_and_budget_multiplier(cfg, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["scan", "--config", cfg(), "--out", str(a), "--seed", "3", "--budget-multiplier", "0.5"])
    main(["scan", "--config", cfg(), "--out", str(b), "--budget-multiplier", "0.5"])
    ra, rb = read(a), read(b)
    assert ra[1][10] == "2000"
    assert ra[1:] != rb[1:]


def test_scan_writes_svg(cfg, tmp_path):
    out, svg = tmp_path / "s.csv", tmp_path / "s.svg"
    main(["scan", "--config", cfg(), "--out", str(out), "--svg", str(svg)])
    root = ET.parse(svg).getroot()
    assert len(root.findall(".//{http://www.w3.org/2000/svg}polyline")) == 1


def test_row_flush_policy(cfg, tmp_path):
    out = tmp_path / "f.csv"
    text = BROWNIAN_DISK + f"\n[output]\ncsv = {out}\nflush = row\n"
    main(["scan", "--config", cfg(text)])
    assert out.read_text().splitlines()[0] == HEADER


def test_stdout_when_no_output(cfg, capsys):
    main(["scan", "--config", cfg(), "--budget-multiplier", "0.25"])
    assert capsys.readouterr().out.splitlines()[0] == HEADER


@pytest.mark.parametrize("bad,needle", [
    ("alpha = 0.9", "(1, 2]"),
    ("colour = red", "unknown key"),
])
def test_config_errors_exit_2(cfg, capsys, bad, needle):
    text = BROWNIAN_DISK.replace("kind = brownian", "kind = stable\n" + bad)
    assert main(["scan", "--config", cfg(text)]) == 2
    assert needle in capsys.readouterr().err


def test_missing_config_exit_2(capsys, tmp_path):
    assert main(["scan"]) == 2
    assert main(["scan", "--config", str(tmp_path / "nope.ini")]) == 2
    assert main(["scan", "--config", str(tmp_path / "nope.ini"), "--workers", "0"]) == 2


def test_mean_sup_command(cfg, tmp_path):
    text = BROWNIAN_DISK + "alphas = 2.0, 1.5\nmean_sup_paths = 1000\n"
    out = tmp_path / "m.csv"
    assert main(["mean-sup", "--config", cfg(text), "--out", str(out)]) == 0
    rows = read(out)
    assert rows[0] == ["alpha", "value", "se", "method"]
    assert rows[1] == ["2", "%.17g" % (2 / 3.141592653589793 ** 0.5), "0", "closed-form"]
    assert rows[2][0] == "1.5" and rows[2][3] == "extrapolated-MC"


@pytest.mark.parametrize("command,first", [
    ("halfspace", "t,psi_inv,value,se,fine,coarse,doubled_nodes,target,rel_gap,n_paths,n_steps,flagged"),
    ("ball", "t,psi_inv,value,se,fine,coarse,doubled_nodes,target,rel_gap,n_paths,n_steps,flagged"),
    ("outer-ball", "t,psi_inv,value,se,fine,coarse,doubled_nodes,target,rel_gap,n_paths,n_steps,flagged"),
    ("gaps", "t,ball,halfspace,outer_ball,gap_inner,gap_inner_se,gap_outer,gap_outer_se,target,ordered,n_paths,"
             "n_steps,flagged"),
    ("interior", "t,loss,loss_se,ratio,ratio_se,n_paths,n_steps"),
])
def test_experiment_commands(cfg, tmp_path, command, first):
    out = tmp_path / "x.csv"
    code = main([command, "--config", cfg(), "--out", str(out), "--budget-multiplier", "0.25"])
    assert code in (0, 1)
    lines = out.read_text().splitlines()
    assert lines[0] == first and len(lines) == 4


def test_corollary_command(cfg, tmp_path):
    text = BROWNIAN_DISK.replace("kind = brownian", "kind = truncated\nbase = stable\nalpha = 1.5\ncutoff = 1")
    text += "k = 8\n"
    out = tmp_path / "c.csv"
    code = main(["corollary", "--config", cfg(text), "--out", str(out), "--budget-multiplier", "0.25"])
    assert code in (0, 1)
    rows = read(out)
    assert rows[0][:8] == ["t", "psi_inv", "base_scaled", "base_se", "trunc_scaled", "trunc_se", "diff", "diff_se"]
    assert len(rows) == 4
    assert main(["corollary", "--config", cfg()]) == 2  # needs a truncated process


def test_plot_command(tmp_path):
    src = tmp_path / "p.csv"
    src.write_text("t,scaled_loss,target\n0.01,1,2\n0.001,1.5,2\n")
    svg = tmp_path / "p.svg"
    assert main(["plot", str(src), "--svg", str(svg)]) == 0
    ET.parse(svg)
    assert main(["plot", str(src)]) == 2


def test_validate_command(capsys):
    code = main(["validate"])
    lines = capsys.readouterr().out.splitlines()
    assert lines and all(re.match(r"^(PASS|FAIL) \S+", ln) for ln in lines)
    assert code == 0, lines


def test_console_script_help():
    res = subprocess.run([sys.executable, "-m", "levy_shc.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "--budget-multiplier" in res.stdout
