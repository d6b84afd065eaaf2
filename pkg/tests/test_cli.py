import subprocess
import sys

from netauction.cli import main


def test_repro_dns_manipulation(capsys):
    assert main(["repro", "proposition"]) == 0
    out = capsys.readouterr().out
    assert "u_a truthful = 0" in out and "a gets (1,1) pays 4; u_a = 1" in out
    assert "verdict: reproduced" in out


def test_repro_los_example(capsys):
    assert main(["repro", "los-example"]) == 0
    assert "pays 8" in capsys.readouterr().out


def test_check_pass_and_fail(capsys):
    assert main(["check", "msn-mpa", "--seeds", "5"]) == 0
    assert main(["check", "msn-los", "--seeds", "20"]) == 1
    assert "FAIL" in capsys.readouterr().out
    assert main(["check", "no-such-suite"]) == 2


def test_run_writes_csv(tmp_path, capsys):
    sc = tmp_path / "s.txt"
    sc.write_text("network = er\nn = 20\np = 0.2\nm = 2\nmechanism = mpa\nrepeats = 2\n")
    out = tmp_path / "o.csv"
    assert main(["run", str(sc), "-o", str(out)]) == 0
    assert out.read_text().startswith("run_id,seller,mechanism,m,sw,revenue")
    bad = tmp_path / "bad.txt"
    bad.write_text("network = er\n")
    assert main(["run", str(bad), "-o", str(out)]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "netauction", "repro", "los-counterexample"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "hiding neighbour 4 u = 10" in res.stdout
