import subprocess
import sys

import pytest

from polar16 import binmat
from polar16.cli import analysis_rows, main, measure_costs, selftest
from polar16.fast16 import K1_COSTS, K2_COSTS
from polar16.kernelspec import arikan, k1, k2


def test_analyze_text(capsys):
    assert main(["analyze", "--kernel", "k1"]) == 0
    out = capsys.readouterr().out
    assert "u6 = v5+v6+v10" in out
    assert "max window 4, total cost 447" in out
    assert "polarization rate 0.51828" in out


def test_analyze_csv(capsys):
    assert main(["analyze", "--kernel", "k2", "--csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "phase,u,window,h,cost"
    assert lines[6] == '5,"u5 = v8","{5,6,7}",8,67'


def test_analyze_costs(capsys):
    assert main(["analyze", "--kernel", "k1", "--costs"]) == 0
    out = capsys.readouterr().out
    assert "total 447" in out and "matches" in out


def test_analysis_rows_match_reference(table1):
    for name, kernel in (("K1", k1()), ("K2", k2())):
        for phi, u, w, _, cost in analysis_rows(kernel):
            assert (u, w, cost) == table1[phi][name]


def test_measured_costs():
    assert tuple(measure_costs(k1())) == K1_COSTS
    assert tuple(measure_costs(k2())) == K2_COSTS
    assert sum(measure_costs(k1(), "generic")) == 11966


def test_analyze_custom_kernel_file(tmp_path, capsys):
    path = tmp_path / "arikan.txt"
    path.write_text(binmat.format_matrix(arikan().matrix))
    assert main(["analyze", "--kernel", f"file:{path}"]) == 0
    assert "polarization rate 0.50000" in capsys.readouterr().out


def test_construct_writes_frozen_set(tmp_path):
    out = tmp_path / "frozen.txt"
    assert main(["construct", "--kernel", "k2", "--n", "16", "--k", "8", "--snr", "1", "--frames", "300", "--out", str(out)]) == 0
    lines = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")]
    assert len(lines) == 8


def test_simulate_csv_and_gnuplot(tmp_path):
    frozen = tmp_path / "f.txt"
    frozen.write_text("0 1 2 3\n4,5,6,7\n")
    out = tmp_path / "r.csv"
    args = ["simulate", "--kernel", "k1", "--m", "1", "--k", "8", "--snr", "1,2", "--list", "1,2",
            "--frames", "200", "--seed", "3", "--frozen", str(frozen), "--out", str(out), "--gnuplot"]
    assert main(args) == 0
    rows = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")]
    assert rows[0] == "snr_db,list,frames,errors,fer,ci_lo,ci_hi,ops_mean"
    assert len(rows) == 5
    assert out.with_suffix(".gp").exists()


def test_bad_n_rejected():
    with pytest.raises(SystemExit):
        main(["simulate", "--kernel", "k1", "--n", "100", "--k", "8"])


def test_selftest(capsys):
    dev = selftest(k2(), 200, 1)
    assert dev["generic_vs_bruteforce"] < 1e-9 and dev["fast_vs_generic"] < 1e-9
    assert main(["selftest", "--kernel", "k1", "--trials", "100"]) == 0
    assert "ok" in capsys.readouterr().out


def test_console_module_entry():
    res = subprocess.run([sys.executable, "-m", "polar16.cli", "analyze", "--kernel", "k2", "--costs"],
                         capture_output=True, text=True, check=True)
    assert "total 181" in res.stdout
