import csv
import io
import json
import math
from pathlib import Path

import pytest

from rellich.cli import run

GOLDEN = Path(__file__).parent / "golden"


def invoke(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_constant_example(capsys):
    code, out, _ = invoke(capsys, "constant", "--n", "3", "--alpha", "0", "--domain", "whole")
    assert code == 0
    assert table(out)[0]["value"] == "0.5625"


def test_constant_json_golden(capsys):
    code, out, _ = invoke(capsys, "constant", "--n", "3", "--alpha", "0", "--domain", "whole", "--format", "json")
    assert code == 0 and out == (GOLDEN / "constant_whole.json").read_text()


def test_mu2_alpha_figure(capsys):
    code, out, _ = invoke(capsys, "figure", "--name", "mu2-alpha", "--from", "-6", "--to", "10", "--step", "0.05")
    assert code == 0
    assert out == (GOLDEN / "mu2_alpha.csv").read_text()
    rows = table(out)
    zeros = [float(r["param"]) for r in rows if float(r["value"]) == 0.0]
    assert zeros == [float(a) for a in range(-6, 11, 2)]


def test_arc_theta_figure(capsys):
    code, out, _ = invoke(capsys, "figure", "--name", "arc-theta", "--step", "0.005")
    assert code == 0
    assert out == (GOLDEN / "arc_theta.csv").read_text()
    rows = [(float(r["param"]), float(r["value"])) for r in table(out)]
    peak = math.pi * math.sqrt(5 / 8)
    near = min(rows, key=lambda r: abs(r[0] - peak))
    assert near[1] == pytest.approx(9 / 25, abs=1e-6)
    assert dict(rows)[math.pi / 2] == 0.0
    assert "\r" not in out


def test_spectrum_golden(capsys):
    code, out, _ = invoke(capsys, "spectrum", "--n", "3", "--shape", "half", "--count", "6")
    assert code == 0 and out == (GOLDEN / "spectrum_hemisphere.csv").read_text()
    assert [float(r["value"]) for r in table(out)] == [2, 6, 12, 20, 30, 42]


@pytest.mark.parametrize(
    "argv",
    [
        ["constant", "--bogus"],
        ["nosuch"],
        ["constant", "--n", "1"],
        ["constant", "--domain", "arc"],
        ["spectrum", "--shape", "cap"],
        ["spectrum", "--nodes", "4"],
        ["hardy1d", "--smin", "0"],
        ["quotient", "--kind", "dirichlet", "--shape", "full"],
        ["verify", "--bc", "robin"],
        ["figure", "--name", "nosuch"],
        ["constant", "--alpha", "nan"],
    ],
)
def test_validation_exit_2(capsys, argv):
    assert invoke(capsys, *argv)[0] == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["theta-star", "--target", "1e6"],
        ["sharpness", "--shape", "full", "--n", "2", "--alpha", "6"],
    ],
)
def test_numerical_exit_3(capsys, argv):
    code, _, err = invoke(capsys, *argv)
    assert code == 3 and err


@pytest.mark.parametrize(
    "argv",
    [
        ["constant", "--domain", "halfspace", "--n", "4"],
        ["sweep", "--param", "alpha", "--from", "-2", "--to", "6", "--step", "0.5", "--n", "3"],
        ["spectrum", "--shape", "cap", "--theta", "1.2", "--count", "5", "--nodes", "500"],
        ["quotient", "--kind", "navier", "--nodes", "500"],
        ["quotient", "--kind", "mode", "--lam", "2", "--nodes", "500", "--S", "10"],
        ["quotient", "--kind", "minseq", "--t", "0.01"],
        ["theta-star", "--nodes", "1000"],
        ["hardy1d", "--order", "2", "--steps", "1", "--count", "512"],
        ["corollary", "--n", "5"],
    ],
)
@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_byte_identical_and_json_keys(capsys, argv, fmt):
    a = invoke(capsys, *argv, "--format", fmt)
    b = invoke(capsys, *argv, "--format", fmt)
    assert a[0] == 0 and a == b
    if fmt == "json":
        data = json.loads(a[1])
        keys = list(data)
        assert keys[0] == "inputs" and keys[-3:] == ["method", "grid", "refinement_trail"]
        assert keys[1] in ("value", "values")
    else:
        assert a[1].endswith("\n") and "\r" not in a[1]


def test_verify_small_grid(capsys):
    code, out, _ = invoke(capsys, "verify", "--samples", "4", "--count", "1024", "--bc", "mixed")
    assert code == 0
    rows = table(out)
    assert len(rows) == 8 and all(r["holds"] == "true" for r in rows)
    ball = [r for r in rows if r["kind"] == "ball"]
    ext = [r for r in rows if r["kind"] == "exterior"]
    strip = lambda r: {k: v for k, v in r.items() if k != "kind"}
    assert [strip(r) for r in ball] == [strip(r) for r in ext]


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "rellich.toml"
    cfg.write_text('n = 5\nalpha = 2.0\ndomain = "halfspace"\n')
    code, out, _ = invoke(capsys, "constant", "--config", str(cfg))
    assert code == 0 and table(out)[0] == {"n": "5", "alpha": "2", "domain": "halfspace", "value": "39.0625"}
    code, out, _ = invoke(capsys, "constant", "--config", str(cfg), "--n", "3")
    assert table(out)[0]["n"] == "3"
    bad = tmp_path / "bad.toml"
    bad.write_text("colour = 1\n")
    assert invoke(capsys, "constant", "--config", str(bad))[0] == 2
    assert invoke(capsys, "constant", "--config", str(tmp_path / "missing.toml"))[0] == 2


def test_output_file(tmp_path, capsys):
    path = tmp_path / "out.csv"
    assert run(["corollary", "--n", "3", "--output", str(path)]) == 0
    assert capsys.readouterr().out == ""
    assert path.read_bytes() == b"n,mu,log2,log4\n3,0.5625,0.625,0.5625\n"


def test_quotient_dirichlet_arc(capsys):
    code, out, _ = invoke(capsys, "quotient", "--kind", "dirichlet", "--shape", "cap", "--n", "2",
                          "--theta", repr(math.pi / 2), "--gamma", "-1", "--nodes", "2000")
    assert code == 0
    assert float(table(out)[-1]["value"]) > 0.36
