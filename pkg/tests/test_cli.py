import csv
import io
import json
import math

import pytest

from qwabsorb import cli
from qwabsorb.errors import ConfigurationError, IntegrityError


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def json_lines(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def test_compute_hadamard_semi_all_methods(capsys):
    code, out, _ = run(capsys, "compute", "--walk", "two-state", "--coin", "hadamard", "--m", "1",
                       "--n", "inf", "--method", "all", "--format", "json-lines")
    assert code == 0
    recs = json_lines(out)
    values = {r["method"]: r["value"] for r in recs if "method" in r}
    assert set(values) == {"closed-form", "hadamard", "simulation"}
    for v in values.values():
        assert abs(v - 2 / math.pi) < 1e-3
    assert recs[-1]["max_deviation"] < 1e-3


def test_compute_grover3_two_sites(capsys):
    code, out, _ = run(capsys, "compute", "--walk", "grover3", "--m", "1", "--n", "2",
                       "--method", "closed-form", "--format", "json-lines")
    assert code == 0
    assert json_lines(out)[0]["value"] == pytest.approx(2 / 3, abs=1e-12)


def test_compute_classical(capsys):
    code, out, _ = run(capsys, "compute", "--walk", "classical", "--p", "0.5", "--m", "1", "--n", "100")
    assert code == 0
    assert "0.99" in out


def test_compute_general_coin_agrees(capsys):
    code, out, _ = run(capsys, "compute", "--walk", "two-state", "--coin", "0.35", "--phase-a", "0.4",
                       "--m", "2", "--n", "5", "--amplitudes", "0.6,0.8j", "--format", "json-lines")
    assert code == 0
    assert json_lines(out)[-1]["max_deviation"] < 1e-8


@pytest.mark.parametrize("argv", [
    ("compute", "--walk", "two-state", "--coin", "1.5", "--m", "1", "--n", "3"),
    ("compute", "--walk", "two-state", "--coin", "hadamard", "--m", "3", "--n", "3"),
    ("compute", "--walk", "two-state", "--coin", "hadamard", "--m", "1", "--n", "3", "--amplitudes", "1,1"),
    ("compute", "--walk", "nope", "--m", "1"),
    ("compute", "--walk", "grover3", "--m", "2", "--n", "inf", "--method", "closed-form"),
    ("sweep", "--walk", "classical", "--p", "0.5", "--n", "10"),
    ("sweep", "--walk", "classical", "--p", "0.5", "--n", "10", "--vary", "q=1:3"),
    (),
])
def test_config_errors_exit_2(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_integrity_error_exits_3(capsys, monkeypatch):
    def boom(*a, **k):
        raise IntegrityError("imaginary residue")

    monkeypatch.setattr(cli, "compute", boom)
    code, _, err = run(capsys, "compute", "--walk", "grover3", "--m", "1", "--n", "2")
    assert code == 3
    assert "imaginary" in err


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "compute", "walk": "classical", "p": 0.5, "m": 3, "n": 10,
                               "method": "closed-form", "format": "json-lines"}))
    code, out, _ = run(capsys, "--config", str(cfg))
    assert code == 0
    assert json_lines(out)[0]["value"] == pytest.approx(0.7, abs=1e-15)
    # flags override config values
    code, out, _ = run(capsys, "--config", str(cfg), "compute", "--m", "1")
    assert json_lines(out)[0]["value"] == pytest.approx(0.9, abs=1e-15)


def test_config_unknown_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "compute", "walk": "classical", "colour": "red"}))
    code, _, err = run(capsys, "--config", str(cfg))
    assert code == 2
    assert "colour" in err


def test_config_unreadable(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "--config", str(bad))[0] == 2
    assert run(capsys, "--config", str(tmp_path / "missing.json"))[0] == 2


def test_sweep_csv_schema_and_determinism(capsys):
    argv = ("sweep", "--walk", "two-state", "--coin", "hadamard", "--n", "6", "--vary", "m=1:5",
            "--method", "closed-form")
    code, first, _ = run(capsys, *argv)
    assert code == 0
    _, second, _ = run(capsys, *argv)
    assert first == second
    rows = list(csv.reader(io.StringIO(first)))
    assert rows[0] == ["m", "value", "method", "residual"]
    assert len(rows) == 6
    from qwabsorb.closed_forms import two_state_finite_components
    from qwabsorb.walk import CoinSpec
    assert rows[1][1] == "%.17g" % two_state_finite_components(CoinSpec.hadamard(), 1, 6).p10


def test_sweep_thread_cap(capsys, monkeypatch):
    argv = ("sweep", "--walk", "classical", "--p", "0.4", "--n", "12", "--vary", "m=1:11",
            "--method", "closed-form")
    monkeypatch.setenv("QWALK_THREADS", "1")
    _, serial, _ = run(capsys, *argv)
    monkeypatch.setenv("QWALK_THREADS", "4")
    _, threaded, _ = run(capsys, *argv)
    assert serial == threaded
    monkeypatch.setenv("QWALK_THREADS", "zero")
    assert run(capsys, *argv)[0] == 2


def test_parse_vary():
    assert cli.parse_vary("m=1:4") == ("m", [1, 2, 3, 4])
    assert cli.parse_vary("m=2:8:3") == ("m", [2, 5, 8])
    assert cli.parse_vary("p=0.3,0.5") == ("p", [0.3, 0.5])
    with pytest.raises(ConfigurationError):
        cli.parse_vary("m")


def test_verify_discrepancies_json_lines(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "discrepancies")
    assert code == 0
    recs = json_lines(out)
    assert recs[-1] == {"summary": True, "records": len(recs) - 1, "failed": 0}
    printed = [r for r in recs[:-1] if r["check"].startswith("printed lattice")]
    assert printed and printed[0]["expect"] == "fail"
    for r in recs[:-1]:
        assert {"suite", "check", "observed", "threshold", "passed"} <= set(r)


def test_verify_failure_exits_1(capsys, monkeypatch):
    from qwabsorb import verify as vf

    bad = vf.Record("classical", "forced", 1.0, 0.0, False)
    monkeypatch.setitem(vf.SUITE_FUNCS, "classical", lambda: [bad])
    code, out, _ = run(capsys, "verify", "--suite", "classical")
    assert code == 1
    assert json_lines(out)[-1]["failed"] == 1


def test_figures_written(tmp_path, capsys):
    code, out, _ = run(capsys, "figures", "--which", "fig1", "fig5", "--outdir", str(tmp_path))
    assert code == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["fig1.csv", "fig1.svg", "fig5.csv", "fig5.svg"]
    rows = list(csv.reader((tmp_path / "fig1.csv").open(encoding="utf-8")))
    assert rows[0][-3:] == ["value", "method", "residual"]
    first = (tmp_path / "fig1.csv").read_bytes()
    run(capsys, "figures", "--which", "fig1", "--outdir", str(tmp_path))
    assert (tmp_path / "fig1.csv").read_bytes() == first
    assert (tmp_path / "fig1.svg").read_text(encoding="utf-8").startswith("<svg")


def test_figures_io_error_names_path(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, err = run(capsys, "figures", "--which", "fig1", "--outdir", str(blocker / "sub"))
    assert code == 2
    assert str(blocker) in err
