import json
import math
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from ylab.cli import main
from ylab.io import BUNDLED, bundled_path, dumps_instance, load_instance
from ylab import instance_from_points


@pytest.fixture
def square_file(tmp_path, square):
    path = tmp_path / "square.json"
    path.write_text(dumps_instance(square))
    return path


def write_tour(path, order):
    path.write_text(json.dumps({"instance_name": "x", "order": order}))
    return path


def test_solve_square(square_file, tmp_path, capsys):
    out, trace, svg = tmp_path / "t.json", tmp_path / "trace.json", tmp_path / "t.svg"
    code = main(["solve", str(square_file), "--variant", "maxmin", "--out", str(out),
                 "--trace", str(trace), "--svg", str(svg)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert sorted(doc["order"]) == [0, 1, 2, 3]
    # max-min on the square ends in the bowtie, not the perimeter
    assert doc["length"] == pytest.approx(2 + 2 * math.sqrt(2))
    assert "initial pair (2 candidates)" in capsys.readouterr().err
    assert json.loads(trace.read_text())["version"] == "ylab.trace/1"
    root = ET.fromstring(svg.read_text())
    assert sum(1 for c in root.iter() if c.get("class") == "crossing") == 1


def test_solve_triangle_and_tsplib_output(tmp_path, capsys):
    path = tmp_path / "tri.json"
    path.write_text(json.dumps({"name": "tri", "points": [[0, 0], [3, 0], [0, 4]]}))
    assert main(["solve", str(path), "--variant", "minmin"]) == 0
    captured = capsys.readouterr()
    assert json.loads(captured.out)["length"] == 12 and captured.err == ""
    assert main(["solve", str(path), "--format", "tsplib"]) == 0
    assert "TOUR_SECTION" in capsys.readouterr().out


@pytest.mark.parametrize("content", ["{oops", "NAME : x\n", '{"points": [[0, 0]]}'])
def test_solve_malformed_exits_2(tmp_path, content, capsys):
    path = tmp_path / "bad.json"
    path.write_text(content)
    assert main(["solve", str(path)]) == 2
    assert "error" in capsys.readouterr().err


def test_missing_file_exits_2(tmp_path):
    assert main(["solve", str(tmp_path / "nope.json")]) == 2


def test_enumerate(tmp_path, capsys):
    grid2 = tmp_path / "g2.json"
    assert main(["generate", "grid", "2", "--out", str(grid2)]) == 0
    out = tmp_path / "rep.json"
    assert main(["enumerate", str(grid2), "--out", str(out)]) == 0
    assert "root branches: 4" in capsys.readouterr().out
    assert json.loads(out.read_text())["root_branches"] == 4

    rand = tmp_path / "r7.json"
    assert main(["generate", "random", "7", "3", "--out", str(rand)]) == 0
    main(["enumerate", str(rand), "--out", str(out)])
    assert json.loads(out.read_text())["leaves"] == 1

    grid4 = tmp_path / "g4.json"
    main(["generate", "grid", "4", "--out", str(grid4)])
    capsys.readouterr()
    assert main(["enumerate", str(grid4), "--max-nodes", "100000"]) == 0
    assert "TRUNCATED" in capsys.readouterr().out


def test_enumerate_dedup(tmp_path, capsys):
    grid2 = tmp_path / "g2.json"
    main(["generate", "grid", "2", "--out", str(grid2)])
    assert main(["enumerate", str(grid2), "--dedup"]) == 0
    assert "dedup hits: 6" in capsys.readouterr().out


def test_verify(square_file, tmp_path, capsys):
    good = write_tour(tmp_path / "good.json", [0, 1, 2, 3])
    assert main(["verify", str(square_file), str(good), "--oracle"]) == 0
    out = capsys.readouterr().out
    assert "gap: 0" in out and "crossings: 0" in out

    bow = write_tour(tmp_path / "bow.json", [0, 2, 1, 3])
    report = tmp_path / "r.json"
    assert main(["verify", str(square_file), str(bow), "--json", str(report)]) == 0
    assert "crossings: 1" in capsys.readouterr().out
    assert json.loads(report.read_text())["crossings"] == 1

    bad = write_tour(tmp_path / "bad.json", [0, 1, 1, 3])
    assert main(["verify", str(square_file), str(bad)]) == 1
    assert "valid: no" in capsys.readouterr().out

    garbage = tmp_path / "garbage.tour"
    garbage.write_text("nothing here")
    assert main(["verify", str(square_file), str(garbage)]) == 2


def test_verify_fixture_gap(tmp_path, capsys):
    inst_path, tour_path = tmp_path / "f.json", tmp_path / "t.json"
    assert main(["generate", "maxmin-counterexample", "--out", str(inst_path)]) == 0
    assert load_instance(inst_path).n == 4
    main(["solve", str(inst_path), "--out", str(tour_path)])
    capsys.readouterr()
    report = tmp_path / "r.json"
    assert main(["verify", str(inst_path), str(tour_path), "--oracle", "--json", str(report)]) == 0
    assert json.loads(report.read_text())["gap"] > 1e-6


def test_verify_bundled_tsplib(tmp_path, capsys):
    report = tmp_path / "r.json"
    code = main(["verify", str(bundled_path("pcb442")), str(bundled_path("pcb442", ".opt.tour")),
                 "--optimum", str(BUNDLED["pcb442"]), "--json", str(report)])
    assert code == 0
    doc = json.loads(report.read_text())
    assert doc["length"] == 50778 and doc["gap"] == 0


def test_experiment(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert main(["experiment", "--n", "3", "30", "--trials", "10", "--seed", "4", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "n,trials,with_crossings,rate,mean_uncross_improvement,seed"
    assert lines[1].startswith("3,10,0,0.0,")
    assert main(["experiment", "--n", "3", "--trials", "2"]) == 0
    assert capsys.readouterr().out.startswith("n,trials")


def test_generate(tmp_path, capsys):
    out = tmp_path / "g3.tsp"
    assert main(["generate", "grid", "3", "--out", str(out)]) == 0
    assert load_instance(out).n == 9 and "NODE_COORD_SECTION" in out.read_text()
    assert main(["generate", "minmin-counterexample"]) == 0
    assert len(json.loads(capsys.readouterr().out)["points"]) == 10
    assert main(["generate", "nosuch"]) == 2
    assert main(["generate", "grid", "1"]) == 2
    assert main(["generate", "random", "ten", "1"]) == 2


def test_eps_env_override(tmp_path, monkeypatch, capsys):
    # diagonals differ by about 6e-5: distinct by default, tied under 1e-3
    path = tmp_path / "rect.json"
    path.write_text(json.dumps({"name": "rect", "points": [[0, 0], [4, 3], [4, 0], [0, 3.0001]]}))
    assert main(["solve", str(path)]) == 0
    assert "initial pair" not in capsys.readouterr().err
    monkeypatch.setenv("YLAB_EPS", "1e-3")
    assert main(["solve", str(path)]) == 0
    assert "initial pair (2 candidates)" in capsys.readouterr().err


def test_solver_error_exits_3(tmp_path, capsys):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"name": "m", "matrix": [[0, 1, 1], [1, 0, 1], [1, 1, 0]]}))
    tour = write_tour(tmp_path / "t.json", [0, 1, 2])
    # --oracle on a valid instance works; an unknown variant is rejected by argparse
    with pytest.raises(SystemExit):
        main(["solve", str(path), "--variant", "maxmax"])
    big = instance_from_points([(i, i * i % 7) for i in range(25)])
    big_path = tmp_path / "big.json"
    big_path.write_text(dumps_instance(big))
    big_tour = write_tour(tmp_path / "bt.json", list(range(25)))
    assert main(["verify", str(big_path), str(big_tour), "--oracle"]) == 3
    assert "TooLarge" in capsys.readouterr().err


def test_module_entry_point(square_file):
    proc = subprocess.run([sys.executable, "-m", "ylab", "solve", str(square_file)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert sorted(json.loads(proc.stdout)["order"]) == [0, 1, 2, 3]
