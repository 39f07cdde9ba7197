import csv
import json
import subprocess
import sys

import pytest

from banknet.cli import main
from banknet.synthetic import make_planted_dataset, write_transactions

TOY_A = """,A,B,C
A,-,5,1
B,2,-,4
C,0,3,-
"""
TOY_B = """,A,B,C
A,-,1,1
B,7,-,
C,2,3,-
"""


@pytest.fixture
def toy_dir(tmp_path):
    d = tmp_path / "bis"
    d.mkdir()
    (d / "2006-03.csv").write_text(TOY_A)
    (d / "2006-06.csv").write_text(TOY_B)
    return d


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_bis_analyze_csv(toy_dir, tmp_path):
    out = tmp_path / "out"
    assert main(["bis-analyze", "--input", str(toy_dir), "--out", str(out)]) == 0
    rows = read_csv(out / "reports" / "2006-03.csv")
    assert [r["country"] for r in rows] == ["A", "B", "C"]
    assert all(-1 <= float(r["epsilon"]) <= 1 for r in rows)
    series = read_csv(out / "timeseries" / "A.csv")
    assert [r["period"] for r in series] == ["2006-03", "2006-06"]
    assert (out / "leaders.csv").read_text().startswith("period,country,class,epsilon")


def test_bis_analyze_json_table1(tmp_path, table1_text):
    d = tmp_path / "in"
    d.mkdir()
    (d / "2006-03.csv").write_text(table1_text)
    out = tmp_path / "out"
    assert main(["bis-analyze", "--input", str(d), "--out", str(out), "--format", "json", "--con-combiner", "product"]) == 0
    doc = json.loads((out / "reports" / "2006-03.json").read_text())
    assert "USA" in {r["country"] for r in doc["nodes"]}


def test_bis_analyze_bad_input(tmp_path):
    d = tmp_path / "bad"
    d.mkdir()
    (d / "2006-03.csv").write_text(",A,B\nA,-,x\nB,1,-\n")
    assert main(["bis-analyze", "--input", str(d), "--out", str(tmp_path / "o")]) == 2
    assert main(["bis-analyze", "--input", str(tmp_path / "missing"), "--out", str(tmp_path / "o")]) == 2


def test_aml_scan_empty(tmp_path):
    f = tmp_path / "tx.csv"
    f.write_text("")
    assert main(["aml-scan", "--input", str(f), "--out", str(tmp_path / "o")]) == 0
    doc = json.loads((tmp_path / "o" / "aml_report.json").read_text())
    assert doc["summary"]["n_cycles"] == 0 and doc["flagged_accounts"] == []


def test_aml_scan_planted(tmp_path):
    data = make_planted_dataset(n_nodes=2000, n_edges=6000, n_cycles=3, seed=1)
    f = tmp_path / "tx.csv"
    write_transactions(data.edges, f)
    out = tmp_path / "o"
    assert main(["aml-scan", "--input", str(f), "--out", str(out)]) == 0
    flagged = {r["account"] for r in read_csv(out / "flagged_accounts.csv")}
    assert set().union(*map(set, data.cycles)) <= flagged
    for name in ("aml_report.json", "r_values.csv", "partition.csv"):
        assert (out / name).exists()


def test_aml_scan_r_value_one(tmp_path):
    # a lone 3-cycle: every path node is a cycle node
    f = tmp_path / "tx.csv"
    f.write_text("a,b,1,100,2010,2010\nb,c,1,100,2010,2010\nc,a,1,100,2010,2010\n")
    out = tmp_path / "o"
    assert main(["aml-scan", "--input", str(f), "--out", str(out), "--path-min", "1", "--path-max", "2"]) == 0
    assert read_csv(out / "r_values.csv") == [{"community_id": "0", "r_value": "1.0"}]


def test_aml_scan_parse_error(tmp_path, capsys):
    f = tmp_path / "tx.csv"
    f.write_text("a,b,1,100,2010,2010\na,b,x,100,2010,2010\n")
    assert main(["aml-scan", "--input", str(f), "--out", str(tmp_path / "o")]) == 2
    assert "tx.csv:2" in capsys.readouterr().err


def test_oracle_check(capsys):
    assert main(["oracle-check", "--iterations", "100"]) == 0
    assert "passed" in capsys.readouterr().out
    assert main(["oracle-check", "--iterations", "2", "--seed", "77", "--inject-fault"]) == 1
    assert "seed=77" in capsys.readouterr().out
    assert main(["oracle-check", "--iterations", "0"]) == 0


def test_config_file(tmp_path, toy_dir):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text('format = "csv"\n[bis-analyze]\nformat = "json"\ndamping = 0.9\n')
    out = tmp_path / "out"
    assert main(["bis-analyze", "--config", str(cfg), "--input", str(toy_dir), "--out", str(out)]) == 0
    assert (out / "reports" / "2006-03.json").exists()
    # flags beat the file
    out2 = tmp_path / "out2"
    assert main(["bis-analyze", "--config", str(cfg), "--input", str(toy_dir), "--out", str(out2), "--format", "csv"]) == 0
    assert (out2 / "reports" / "2006-03.csv").exists()
    bad = tmp_path / "bad.toml"
    bad.write_text("no_such_key = 1\n")
    assert main(["bis-analyze", "--config", str(bad), "--input", str(toy_dir), "--out", str(out)]) == 2


def test_threads_do_not_change_output(tmp_path, toy_dir):
    outs = []
    for t in ("1", "3"):
        out = tmp_path / f"o{t}"
        assert main(["bis-analyze", "--input", str(toy_dir), "--out", str(out), "--threads", t]) == 0
        outs.append({p.relative_to(out): p.read_bytes() for p in out.rglob("*") if p.is_file()})
    assert outs[0] == outs[1]


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "banknet", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "aml-scan" in r.stdout
