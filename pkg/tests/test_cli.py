import csv
import hashlib
import json
import subprocess
import sys

import pytest
from shapely.geometry import Point, Polygon

from fracperiod.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def digest(path):
    return hashlib.md5(path.read_bytes()).hexdigest()


# {{{ region

def test_region_writes_files(tmp_path, capsys):
    out = tmp_path / "b.csv"
    code, info = run(capsys, "region", "--alpha", "0.5", "--samples", "512", "--out", str(out))
    assert code == 0
    assert set(info["intersections"]) >= {"p1", "p2", "p3", "p4"} or len(info["intersections"]) == 4
    header, rows = read_csv(out)
    assert header == ["curve", "param", "a", "b"]
    assert {r[0] for r in rows} == {"G1", "G2", "G3"}
    header, rows = read_csv(tmp_path / "b_polygon.csv")
    assert header == ["a", "b"]
    poly = Polygon([(float(a), float(b)) for a, b in rows])
    assert poly.is_valid
    assert poly.contains(Point(0.6, 0.7))


def test_region_polygon_path(tmp_path, capsys):
    poly = tmp_path / "p.csv"
    code, _ = run(capsys, "region", "--alpha", "0.3", "--samples", "16",
                  "--out", str(tmp_path / "b.csv"), "--polygon-out", str(poly))
    assert code == 0
    _, rows = read_csv(poly)
    assert Polygon([(float(a), float(b)) for a, b in rows]).is_valid


@pytest.mark.parametrize("alpha", ["1.0", "0", "-0.2", "1.5", "nan"])
def test_region_invalid_alpha(tmp_path, capsys, alpha):
    assert main(["region", "--alpha", alpha, "--out", str(tmp_path / "b.csv")]) == 2
    assert capsys.readouterr().err


def test_region_is_deterministic(tmp_path, capsys):
    for name in ("x.csv", "y.csv"):
        run(capsys, "region", "--alpha", "0.5", "--samples", "64", "--out", str(tmp_path / name))
    assert digest(tmp_path / "x.csv") == digest(tmp_path / "y.csv")
    assert digest(tmp_path / "x_polygon.csv") == digest(tmp_path / "y_polygon.csv")

# }}}


# {{{ simulate

def test_simulate_logistic(tmp_path, capsys):
    out = tmp_path / "t.csv"
    code, info = run(capsys, "simulate", "--map", "logistic", "--param", "2.8", "--alpha", "0.4",
                     "--x0", "0.3", "--steps", "2000", "--out", str(out))
    assert code == 0
    assert info["behavior"] == "period-2"
    assert max(info["u"], info["v"]) == pytest.approx(0.7757, abs=1e-2)
    assert min(info["u"], info["v"]) == pytest.approx(0.3384, abs=1e-2)
    header, rows = read_csv(out)
    assert header == ["t", "x"]
    assert len(rows) == 2001
    assert float(rows[0][1]) == 0.3


def test_simulate_linear_fixed_point(capsys):
    code, info = run(capsys, "simulate", "--map", "linear2", "--a", "0.6", "--b", "0.7",
                     "--alpha", "0.5", "--x0", "1", "--steps", "500")
    assert code == 0
    assert info["behavior"] == "fixed-point"
    assert info["value"] == 0.0


def test_simulate_expression(capsys):
    code, info = run(capsys, "simulate", "--map", "expr", "--expr", "exp(-7.5*x^2)+b", "--param", "0.3",
                     "--alpha", "0.6", "--x0", "0.2", "--steps", "2000")
    assert code == 0
    assert info["behavior"] == "period-2"


def test_simulate_divergent(capsys):
    code, info = run(capsys, "simulate", "--map", "linear2", "--a", "-2.5", "--b", "3.6",
                     "--alpha", "0.5", "--x0", "1", "--steps", "2000")
    assert code == 0
    assert info["behavior"] == "divergent"


def test_simulate_split_csv(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _ = run(capsys, "simulate", "--map", "logistic", "--param", "2.8", "--alpha", "0.4",
                  "--x0", "0.3", "--steps", "200", "--split", "--out", str(out))
    assert code == 0
    header, rows = read_csv(out)
    assert header == ["t", "p", "q"]


def test_simulate_bad_expression(capsys):
    assert main(["simulate", "--map", "expr", "--expr", "exp(-7.5*x^2", "--param", "0.3",
                 "--alpha", "0.6", "--x0", "0.2"]) == 2
    assert capsys.readouterr().err


def test_simulate_missing_linear_coefficients(capsys):
    assert main(["simulate", "--map", "linear2", "--alpha", "0.5", "--x0", "1"]) == 2


def test_simulate_alpha_one_allowed(capsys):
    code, info = run(capsys, "simulate", "--map", "logistic", "--param", "3.2", "--alpha", "1",
                     "--x0", "0.3", "--steps", "500")
    assert code == 0
    assert info["behavior"] == "period-2"


def test_simulate_is_deterministic(tmp_path, capsys):
    for name in ("x.csv", "y.csv"):
        run(capsys, "simulate", "--map", "gauss", "--param", "0.3", "--alpha", "0.6",
            "--x0", "0.1", "--steps", "300", "--out", str(tmp_path / name))
    assert digest(tmp_path / "x.csv") == digest(tmp_path / "y.csv")

# }}}


# {{{ cycle

def test_cycle_cubic(capsys):
    code, info = run(capsys, "cycle", "--map", "cubic", "--param", "-0.20", "--alpha", "0.7")
    assert code == 0
    c = info["cycles"][0]
    assert c["u"] == pytest.approx(1.6963, abs=1e-4)
    assert c["v"] == pytest.approx(-1.6963, abs=1e-4)
    assert c["verdict"] == "stable"
    assert {"alpha", "map", "parameter", "u", "v", "a", "b", "verdict"} <= set(c)


def test_cycle_below_window(capsys):
    assert main(["cycle", "--map", "logistic", "--param", "2.0", "--alpha", "0.4"]) == 3


def test_cycle_coexistence(capsys):
    code, info = run(capsys, "cycle", "--map", "cubic", "--param", "-0.24", "--alpha", "0.7")
    assert code == 0
    assert sum(c["verdict"] == "stable" for c in info["cycles"]) == 2


def test_cycle_with_guess(capsys):
    code, info = run(capsys, "cycle", "--map", "expr", "--expr", "exp(-7.5*x^2)+b", "--param", "0.3",
                     "--alpha", "0.6", "--guess", "1.2,0.35")
    assert code == 0
    assert info["cycles"][0]["verdict"] == "stable"


def test_cycle_bad_guess(capsys):
    assert main(["cycle", "--map", "logistic", "--param", "2.8", "--alpha", "0.4", "--guess", "abc"]) == 2


def test_cycle_verify(capsys):
    code, info = run(capsys, "cycle", "--map", "logistic", "--param", "2.8", "--alpha", "0.4", "--verify")
    assert code == 0

# }}}


# {{{ scan

def test_scan_logistic(tmp_path, capsys):
    out = tmp_path / "l.csv"
    code, info = run(capsys, "scan", "--map", "logistic", "--grid", "2.0:3.2:0.001", "--alpha", "0.4",
                     "--out", str(out))
    assert code == 0
    lo, hi = info["window"]
    assert lo == pytest.approx(2.31951, abs=1e-3)
    assert hi == pytest.approx(2.96595, abs=1e-3)
    header, rows = read_csv(out)
    assert header == ["param", "u", "v", "a", "b", "inside"]
    assert len(rows) == 1201
    assert {r[5] for r in rows} == {"true", "false"}


def test_scan_cubic(capsys):
    code, info = run(capsys, "scan", "--map", "cubic", "--grid", "-0.35:-0.05:0.001", "--alpha", "0.7")
    assert code == 0
    lo, hi = info["window"]
    assert lo == pytest.approx(-0.277584, abs=1e-3)
    assert hi == pytest.approx(-0.104084, abs=1e-3)


def test_scan_gauss(capsys):
    code, info = run(capsys, "scan", "--map", "gauss", "--grid", "-0.3:0.8:0.01", "--alpha", "0.6")
    assert code == 0
    lo, hi = info["window"]
    assert lo == pytest.approx(-0.05, abs=0.01)
    assert hi == pytest.approx(0.56, abs=0.01)


def test_scan_is_deterministic(tmp_path, capsys):
    for name in ("x.csv", "y.csv"):
        run(capsys, "scan", "--map", "gauss", "--grid", "0.0:0.3:0.05", "--alpha", "0.6",
            "--out", str(tmp_path / name))
    assert digest(tmp_path / "x.csv") == digest(tmp_path / "y.csv")


@pytest.mark.parametrize("grid", ["1:2", "2:1:0.1", "a:b:c", "0:1:0"])
def test_scan_bad_grid(capsys, grid):
    assert main(["scan", "--map", "logistic", "--grid", grid, "--alpha", "0.4"]) == 2


def test_scan_classical_window(capsys):
    code, info = run(capsys, "scan", "--map", "logistic", "--grid", "2.9:3.6:0.01", "--alpha", "1")
    assert code == 0
    assert info["window"] == pytest.approx([3.0, 1.0 + 6.0**0.5], abs=1e-5)


def test_scan_without_window(capsys):
    assert main(["scan", "--map", "logistic", "--grid", "2:2.3:0.1", "--alpha", "0.4"]) == 3

# }}}


# {{{ check

@pytest.mark.parametrize("a,b,code,word", [
    ("0.6", "0.7", 0, "inside"),
    ("-2.5", "3.6", 1, "outside"),
    ("1", "1", 1, "outside"),
])
def test_check(capsys, a, b, code, word):
    assert main(["check", "--alpha", "0.5", "--a", a, "--b", b]) == code
    out = capsys.readouterr().out
    assert out.splitlines()[0] == word
    assert "verdict" in json.loads(out.splitlines()[1]) or json.loads(out.splitlines()[1])


def test_check_requires_coefficients(capsys):
    assert main(["check", "--alpha", "0.5", "--a", "0.6"]) == 2

# }}}


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fracperiod", "check", "--alpha", "0.5", "--a", "0.6", "--b", "0.7"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("inside")


def test_no_command_is_usage_error(capsys):
    assert main([]) == 2

# vim: foldmethod=marker
