import csv
import io
import json
import subprocess
import sys

import pytest

from impgreen import __version__
from impgreen.cli import CSV_COLUMNS, EXIT_CONFIG, EXIT_OK, EXIT_VALIDATE, ConfigError, build_parser, main, parse_grid
from impgreen.validation import SUITES


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_grid():
    assert parse_grid("0.5,1,2") == [0.5, 1.0, 2.0]
    assert parse_grid("0:1:3") == [0.0, 0.5, 1.0]
    assert parse_grid(2) == [2.0]
    for bad in ("", "0:1", "0:1:0", "1,nan"):
        with pytest.raises(ConfigError):
            parse_grid(bad)


def test_grid_csv(capsys):
    code, out, _ = run(["compute", "--x", "0.5,1,1.5", "--t", "0.25:0.75:3", "--threads", "3"], capsys)
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 9
    assert all(r["converged"] == "true" for r in rows)
    keys = [(float(r["x"]), float(r["t"])) for r in rows]
    assert keys == sorted(keys)


def test_json_deterministic_and_schema(tmp_path):
    path = tmp_path / "g.json"
    outs = []
    for threads in (1, 4, 1):
        assert main(["compute", "--x", "0.5,1", "--t", "0.5", "--format", "json", "--threads", str(threads), "--output", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[2]
    # the config block records the thread count, the results must not depend on it
    docs = [json.loads(o) for o in outs]
    assert docs[0]["results"] == docs[1]["results"]
    doc = docs[0]
    assert set(doc) == {"config", "results", "version"}
    assert doc["version"] == __version__
    assert all(set(r) == set(CSV_COLUMNS) for r in doc["results"])


def test_infinite_c_mode_matches_large_c(tmp_path):
    def g(args):
        path = tmp_path / "o.json"
        assert main(["compute", "--x", "1", "--t", "0.5", "--format", "json", "--tol", "1e-9", "--output", str(path), *args]) == 0
        r = json.loads(path.read_text())["results"][0]
        return complex(r["re_g"], r["im_g"])

    ginf = g(["--mode", "infinite-c"])
    gc = g(["--c", "1e4"])
    assert abs(gc - ginf) / abs(ginf) < 1e-3


def test_finite_n_oracle_mode(capsys):
    code, out, _ = run(["compute", "--mode", "finite-N-oracle", "--L", "9.42477796", "--N", "3", "--x", "1", "--t", "0.5",
                        "--damping", "0.1", "--cutoff", "14", "--tol", "1e-3"], capsys)
    assert code == EXIT_OK
    assert len(list(csv.DictReader(io.StringIO(out)))) == 1
    assert main(["compute", "--mode", "finite-N-oracle", "--x", "1"]) == EXIT_CONFIG


def test_validate_only_runs_one_suite(capsys):
    code, out, _ = run(["validate", "--only", "osc-primitives"], capsys)
    assert code == EXIT_OK
    body = out.strip().splitlines()[1:]
    assert body and all(line.startswith("osc-primitives") for line in body)
    assert all(line.endswith("PASS") for line in body)


def test_threshold_override_forces_failure(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"thresholds": {"insertion-identity": 1e-30}}))
    code, out, _ = run(["validate", "--config", str(cfg), "--only", "insertion-identity"], capsys)
    assert code == EXIT_VALIDATE
    assert "FAIL" in out


def test_validate_json_report(tmp_path, capsys):
    path = tmp_path / "v.json"
    code, _, _ = run(["validate", "--only", "equal-time", "--format", "json", "--output", str(path)], capsys)
    assert code == EXIT_OK
    doc = json.loads(path.read_text())
    assert [s["name"] for s in doc["suites"]] == ["equal-time"]


@pytest.mark.parametrize(
    "argv",
    [
        ["compute", "--bogus"],
        ["compute", "--tol", "2"],
        ["compute", "--x", "0", "--t", "0"],
        ["compute", "--c", "-1"],
        ["validate", "--only", "nope"],
        ["compute", "--format", "xml"],
    ],
)
def test_bad_input_exit_1(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        code = main(argv)
        raise SystemExit(code)
    assert exc.value.code == EXIT_CONFIG


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"colour": "red"}))
    assert main(["compute", "--config", str(cfg)]) == EXIT_CONFIG


def test_help_lists_every_flag():
    text = build_parser()._subparsers._group_actions[0].choices["compute"].format_help()
    for flag in ("--config", "--mode", "--x", "--t", "--c", "--kf", "--L", "--N", "--cutoff", "--damping",
                 "--tol", "--threads", "--output", "--format", "--only", "--seed"):
        assert flag in text
    for name in SUITES:
        assert name in text


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "impgreen.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and __version__ in out.stdout
