import csv
import json
import shutil
import subprocess

import pytest

from gridlimit.cli import EXIT_ERROR, EXIT_FAIL, EXIT_OK, main


@pytest.fixture
def grid_json(tmp_path):
    path = tmp_path / "grid.json"
    assert main(["build-grid", "--lattice", "cubic", "--dim", "2", "--eps", "0.5",
                 "--window", "12", "--out", str(path)]) == EXIT_OK
    return path


def test_build_grid(grid_json):
    data = json.loads(grid_json.read_text())
    assert data["spec"]["epsilon"] == 0.5
    assert len(data["vertices"]) == 25 ** 2


def test_solve_extend_norms_slice(tmp_path, grid_json, capsys):
    out = tmp_path / "sol.json"
    assert main(["solve-action", "--grid", str(grid_json), "--p", "3", "--omega", "1",
                 "--out", str(out)]) == EXIT_OK
    sol = json.loads(out.read_text())
    assert sol["summary"]["converged"]
    assert sol["summary"]["scaled_level"] == pytest.approx(0.5 * sol["summary"]["level"])
    fn = tmp_path / "fn.json"
    fn.write_text(json.dumps(sol["function"]))
    ext = tmp_path / "ext.json"
    assert main(["extend", "--in", str(fn), "--out", str(ext)]) == EXIT_OK
    capsys.readouterr()
    assert main(["rd-norms", "--in", str(ext), "--q", "3"]) == EXIT_OK
    norms = json.loads(capsys.readouterr().out)
    assert norms["l2"] > 0 and norms["grad_l2"] > 0 and norms["lq_rel_error"] < 1e-2
    sl = tmp_path / "slice.csv"
    assert main(["eval-slice", "--in", str(ext), "--axis", "1", "--value", "0",
                 "--resolution", "11", "--out", str(sl)]) == EXIT_OK
    rows = list(csv.reader(sl.open()))
    assert rows[0] == ["x0", "x1", "value"] and len(rows) == 12


def test_solve_energy_nonconvergence_exits_2(tmp_path, grid_json):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"max_iters": 1}))
    assert main(["solve-energy", "--grid", str(grid_json), "--p", "3", "--mass", "100",
                 "--cfg", str(cfg), "--out", str(tmp_path / "s.json")]) == EXIT_ERROR


def test_reference(tmp_path, capsys):
    assert main(["reference-rd", "--dim", "2", "--p", "3", "--out",
                 str(tmp_path / "r.json")]) == EXIT_OK
    info = json.loads(capsys.readouterr().out)
    assert info["u0"] == pytest.approx(2.3919564, rel=1e-7)


def test_experiment_exit_codes(tmp_path, capsys):
    ok = tmp_path / "ok.json"
    ok.write_text(json.dumps({"kind": "sobolev_table", "dims": [2, 3]}))
    out = tmp_path / "ok.csv"
    assert main(["experiment", "--config", str(ok), "--out", str(out),
                 "--json", str(tmp_path / "ok.out.json")]) == EXIT_OK
    assert "PASS sobolev_table:ratios_exceed_one" in capsys.readouterr().out
    assert out.read_text().startswith("# config:")
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "convergence_action", "epsilon_list": [0.4],
                               "solver": {"max_iters": 1}}))
    assert main(["experiment", "--config", str(bad)]) == EXIT_FAIL
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps({"kind": "scaling_laws", "omega_list": [1.0]}))
    assert main(["experiment", "--config", str(broken)]) == EXIT_ERROR
    assert main(["experiment", "--config", str(tmp_path / "missing.json")]) == EXIT_ERROR


def test_bad_arguments_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["build-grid", "--lattice", "square", "--eps", "1", "--window", "2", "--out", "x"])
    assert exc.value.code == 2


@pytest.mark.skipif(shutil.which("gridlimit") is None, reason="console script not installed")
def test_console_script(tmp_path):
    out = tmp_path / "g.json"
    proc = subprocess.run(["gridlimit", "build-grid", "--lattice", "hex", "--eps", "1",
                           "--window", "3", "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0 and "hexagonal" in proc.stdout
