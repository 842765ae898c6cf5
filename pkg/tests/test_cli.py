import csv
import json
import xml.etree.ElementTree as ET

import pytest

from conftest import STAIRS

from evlab.cli import main
from evlab.config import D1, GROUND
from evlab.render import staircase_svg

SVG = "{http://www.w3.org/2000/svg}"


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestDriftCheck:
    def test_single_point(self, capsys):
        code, out, err = _run(capsys, "drift-check", "--beta", "4/7", "--p", "0",
                              "--functional", "phi1", "--max-size", "8")
        assert code == 0
        rows = list(csv.reader(out.splitlines()))
        assert rows[0] == ["config_blocks", "beta", "p", "functional", "formula", "oracle", "gap"]
        unit = [r for r in rows if r[0] == "1,1"][0]
        assert unit[4] == unit[5] == "-2/63" and unit[6] == "0"
        assert "largest drift" in err

    def test_f2_martingale_under_voter(self, capsys):
        code, out, _ = _run(capsys, "drift-check", "--beta", "1", "--p", "1/2",
                            "--functional", "f2", "--max-size", "10")
        rows = list(csv.DictReader(out.splitlines()))
        assert code == 0 and len(rows) == 511
        assert {r["oracle"] for r in rows} == {"0"}

    def test_guard(self, capsys):
        code, _, err = _run(capsys, "drift-check", "--max-size", "20")
        assert code == 2 and "guard" in err

    def test_half_specified_grid(self, capsys):
        code, _, _ = _run(capsys, "drift-check", "--beta", "1/2", "--max-size", "4")
        assert code == 2

    def test_full_grid_small(self, capsys, tmp_path):
        out = tmp_path / "d.csv"
        code, _, _ = _run(capsys, "drift-check", "--functional", "f2", "--max-size", "5",
                          "-o", str(out))
        assert code == 0
        assert len(out.read_text().splitlines()) == 1 + 15 * 64


class TestAudit:
    def test_single(self, capsys):
        code, out, _ = _run(capsys, "audit", "--s0", "8,3,4,1,2,1,2,1,8,4")
        assert code == 0
        data = json.loads(out)
        assert data["failing"] == 0 and data["details"][0]["config_blocks"] == list(STAIRS.blocks)

    def test_exhaustive(self, capsys):
        code, out, _ = _run(capsys, "audit", "--max-size", "8")
        assert code == 0 and json.loads(out)["configurations"] == 128

    def test_bad_config(self, capsys):
        code, _, err = _run(capsys, "audit", "--s0", "1,0")
        assert code == 2 and "invalid --s0" in err


class TestSimulation:
    def test_simulate(self, capsys):
        code, out, _ = _run(capsys, "simulate", "--beta", "0.3", "--p", "0.5",
                            "--horizon", "300", "--seed", "2")
        assert code == 0
        rows = list(csv.DictReader(out.splitlines()))
        assert rows[0]["t"] == "0" and rows[-1]["t"] == "300"
        assert rows[0]["config_blocks"] == "1,1"

    def test_simulate_coloured(self, capsys):
        code, out, _ = _run(capsys, "simulate", "--coloured", "--s0", "0011",
                            "--beta", "0.5", "--p", "0.5", "--horizon", "50")
        assert code == 0 and out.startswith("t,size,chi,overlap,obstruction")

    def test_bad_params(self, capsys):
        code, _, _ = _run(capsys, "simulate", "--beta", "2", "--p", "0.5")
        assert code == 2

    def test_tau(self, capsys, tmp_path):
        spec = tmp_path / "spec.json"
        code, out, err = _run(capsys, "tau", "--beta", "0", "--p", "0.7", "--replicas", "30",
                              "--cap", "10000", "--spec-out", str(spec))
        assert code == 0
        assert len(out.splitlines()) == 31
        assert json.loads(spec.read_text())["mode"] == "tau"
        assert "censored fraction 0.0000" in err

    def test_tau_absorbing(self, capsys):
        code, _, err = _run(capsys, "tau", "--beta", "1", "--p", "0", "--s0", "()",
                            "--replicas", "2")
        assert code == 2 and "absorbing" in err

    def test_growth(self, capsys):
        code, out, err = _run(capsys, "growth", "--beta", "0", "--p", "0.5", "--s0", "()",
                              "--replicas", "2", "--horizon", "2000")
        assert code == 0 and out.startswith("replica,t,max_size")
        assert "slope" in err


class TestRender:
    def test_svg_from_config(self, capsys):
        code, out, _ = _run(capsys, "render", "--s0", "8,3,4,1,2,1,2,1,8,4", "--highlight-rect")
        assert code == 0
        root = ET.fromstring(out)
        rect = [e for e in root.iter(SVG + "rect") if e.get("class") == "g-rect"]
        assert len(rect) == 1
        assert float(rect[0].get("width")) == 24 * 16 and float(rect[0].get("height")) == 4 * 16
        texts = " ".join(e.text for e in root.iter(SVG + "text"))
        assert "area 162" in texts and "24x4 = 96" in texts

    def test_svg_from_csv(self, capsys, tmp_path):
        traj = tmp_path / "traj.csv"
        assert main(["simulate", "--horizon", "100", "-o", str(traj)]) == 0
        code, out, _ = _run(capsys, "render", "--csv", str(traj), "--row", "all")
        assert code == 0
        n_rows = len(traj.read_text().splitlines()) - 1
        assert len(ET.fromstring(out).findall(f"{SVG}text")) >= n_rows

    def test_render_usage(self, capsys):
        assert _run(capsys, "render")[0] == 2

    def test_staircase_points(self):
        root = ET.fromstring(staircase_svg(D1))
        line = [e for e in root.iter(SVG + "polyline") if e.get("class") == "staircase"][0]
        pts = [tuple(map(float, p.split(","))) for p in line.get("points").split()]
        assert len(pts) == 3

    def test_ground_panel(self):
        assert "ground state" in staircase_svg(GROUND)


class TestProbe:
    def test_size_bound(self, capsys):
        code, out, _ = _run(capsys, "probe", "size-bound", "--t", "500", "--replicas", "100")
        assert code == 0 and json.loads(out)["passed"]

    def test_size_bound_wrong_p(self, capsys):
        code, _, _ = _run(capsys, "probe", "size-bound", "--p", "0.3", "--t", "10")
        assert code == 2


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
