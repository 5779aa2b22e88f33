import json
import math

import pytest
import yaml

from fwm_biphoton import cli, io
from fwm_biphoton.config import DEFAULTS
from fwm_biphoton.entanglement import schmidt_gaussian_minimum
from fwm_biphoton.modes import BeamGeometry

ZR = BeamGeometry(1e-3).z_R


def write_config(tmp_path, data, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data))
    return str(path)


def read_table(path):
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    header = lines[0].split(",")
    return [dict(zip(header, l.split(","))) for l in lines[1:]]


def run(tmp_path, command, data, *extra, out="out"):
    cfg = write_config(tmp_path, data)
    return cli.main([command, "--config", cfg, "--out", str(tmp_path / out), *extra])


def test_print_config(capsys):
    assert cli.main(["amplitudes", "--print-config"]) == 0
    assert yaml.safe_load(capsys.readouterr().out) == DEFAULTS


def test_help_lists_subcommands(capsys):
    with pytest.raises(SystemExit):
        cli.main(["--help"])
    text = capsys.readouterr().out
    for name in ("modes", "pump-expand", "amplitudes", "entanglement", "g2", "distance", "sweep"):
        assert name in text


@pytest.mark.parametrize(
    "data",
    [
        {"subspace": {"l_max": 9}},
        {"detection": {"grid": {"half_extent_w": 0.0}}},
        {"unknown": True},
    ],
)
def test_config_errors_write_nothing(tmp_path, data, capsys):
    assert run(tmp_path, "g2", data) == 2
    assert not (tmp_path / "out").exists()
    assert "config error" in capsys.readouterr().err


def test_malformed_yaml(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("beam: {w0: [\n")
    assert cli.main(["amplitudes", "--config", str(path), "--out", str(tmp_path / "o")]) == 2
    assert not (tmp_path / "o").exists()


def test_unreachable_charge_is_config_error(tmp_path):
    data = {"pump": {"modes": [{"ell": 3, "q": 0, "re": 1.0}]}, "subspace": {"l_max": 1, "p_max": 0}}
    assert run(tmp_path, "amplitudes", data) == 2
    assert not (tmp_path / "out").exists()


def test_convergence_failure_exit(tmp_path, capsys):
    data = {"representation": "momentum", "subspace": {"l_max": 1, "p_max": 1},
            "quadrature": {"momentum_nodes": 8, "convergence_tol": 1e-12}}
    assert run(tmp_path, "amplitudes", data) == 3
    assert not (tmp_path / "out").exists()
    assert "convergence" in capsys.readouterr().err


def test_gaussian_amplitudes_top_entry(tmp_path):
    assert run(tmp_path, "amplitudes", {}) == 0
    rows, conf = io.read_amplitudes_csv(tmp_path / "out" / "amplitudes.csv")
    top = max(rows, key=lambda r: float(r["re"]) ** 2 + float(r["im"]) ** 2)
    assert (top["ell_pr"], top["p_pr"], top["ell_s"], top["p_s"]) == ("0", "0", "0", "0")
    assert conf["subspace"] == {"l_max": 2, "p_max": 4, "ell_center": 0}
    assert "threads" not in conf and "dir" not in conf["output"]
    log = (tmp_path / "out" / "run.log").read_text()
    assert "amplitudes amplitudes.csv" in log


def test_byte_identical_reruns(tmp_path):
    data = {"representation": "momentum", "subspace": {"l_max": 1, "p_max": 1},
            "quadrature": {"check_convergence": False}}
    assert run(tmp_path, "amplitudes", data, "--threads", "1", out="a") == 0
    assert run(tmp_path, "amplitudes", data, "--threads", "1", out="b") == 0
    assert run(tmp_path, "amplitudes", data, "--threads", "4", out="c") == 0
    ref = (tmp_path / "a" / "amplitudes.csv").read_bytes()
    assert (tmp_path / "b" / "amplitudes.csv").read_bytes() == ref
    assert (tmp_path / "c" / "amplitudes.csv").read_bytes() == ref


def test_json_output(tmp_path):
    assert run(tmp_path, "amplitudes", {"subspace": {"l_max": 1, "p_max": 1}}, "--format", "json") == 0
    payload = json.loads((tmp_path / "out" / "amplitudes.json").read_text())
    assert payload["representation"] == "position"
    assert payload["config"]["output"]["format"] == "json"
    assert abs(sum(e["re"] ** 2 + e["im"] ** 2 for e in payload["entries"]) - 1) < 1e-10


def test_modes_and_pump_expand(tmp_path):
    assert run(tmp_path, "modes", {"subspace": {"l_max": 1, "p_max": 2}}) == 0
    rows = read_table(tmp_path / "out" / "modes.csv")
    assert len(rows) == 9
    assert all(abs(float(r["norm_integral"]) - 1) < 1e-10 for r in rows)
    assert run(tmp_path, "pump-expand", {}) == 0
    rows = read_table(tmp_path / "out" / "expansion.csv")
    assert [float(r["norm_re"]) for r in rows] == pytest.approx([0.9429, 0.3143, 0.1048], abs=5e-4)


def test_momentum_distance_thin_medium(tmp_path):
    data = {"medium": {"L": 1e-4 * ZR}, "subspace": {"l_max": 2, "p_max": 1}}
    assert run(tmp_path, "distance", data) == 0
    row = read_table(tmp_path / "out" / "distance.csv")[0]
    assert float(row["trace_distance"]) < 1e-3
    assert row["converged"] == "True"


def test_entanglement_gaussian_minimum(tmp_path):
    zeta = schmidt_gaussian_minimum()
    data = {"medium": {"L": zeta * ZR}, "subspace": {"l_max": 1, "p_max": 1}}
    assert run(tmp_path, "entanglement", data, "--format", "json") == 0
    report = json.loads((tmp_path / "out" / "entanglement.json").read_text())
    assert abs(report["schmidt_k_gaussian"] - 1.0) < 1e-6
    assert report["schmidt_k"] == pytest.approx(1 / report["purity"])


def test_lt_sweep_monotone(tmp_path):
    assert run(tmp_path, "sweep", {"sweep": {"parameter": "lT", "values": [0, 2, 4, 6]}}) == 0
    rows = read_table(tmp_path / "out" / "sweep.csv")
    for col in ("sbw", "entropy_bits"):
        vals = [float(r[col]) for r in rows]
        assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_length_sweep(tmp_path):
    data = {"sweep": {"parameter": "L", "values": [0.01, 0.1, 1.0]}, "subspace": {"l_max": 1, "p_max": 1},
            "quadrature": {"check_convergence": False}}
    assert run(tmp_path, "sweep", data) == 0
    d = [float(r["trace_distance"]) for r in read_table(tmp_path / "out" / "sweep.csv")]
    assert d[0] < d[1] < d[2]


def test_g2_point_signs(tmp_path):
    data = {"detection": {"grid": {"n": 64}}}
    assert run(tmp_path, "g2", data) == 0
    rows = read_table(tmp_path / "out" / "g2_summary.csv")
    pearson = [float(r["pearson"]) for r in rows]
    assert pearson[0] > 0 and pearson[-1] < 0
    assert all(b < a for a, b in zip(pearson, pearson[1:]))
    assert (tmp_path / "out" / "g2_z3.csv").exists()


def test_g2_full_probe_reference(tmp_path):
    data = {"pump": {"modes": [{"ell": 1, "q": 0, "re": 1.0}]}, "subspace": {"l_max": 3, "p_max": 4},
            "detection": {"kind": "full-probe", "planes": [0.025], "grid": {"n": 64}}}
    assert run(tmp_path, "g2", data) == 0
    row = read_table(tmp_path / "out" / "g2_summary.csv")[0]
    assert float(row["ncc_vs_pump"]) >= 0.95
    assert (tmp_path / "out" / "pump_reference_z0.csv").exists()
    assert math.isclose(max(float(v) for l in (tmp_path / "out" / "g2_z0.csv").read_text().splitlines()[3:]
                            for v in l.split(",")[1:]), 1.0)
