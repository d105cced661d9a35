import json

import pytest

from jdisc.cli import main


def write(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def manifest(out):
    with open(out / "manifest.json") as fh:
        return json.load(fh)


def test_check_command(tmp_path):
    out = tmp_path / "out"
    code = main(["check", "--config", write(tmp_path, 'command = "check"\n'), "--out", str(out)])
    assert code == 0
    m = manifest(out)
    assert m["passed"] and m["complete"]
    assert {f["path"] for f in m["files"]} == {"check.dat"}


def test_bad_config_exit_code(tmp_path, capsys):
    code = main(["trace", "--config", write(tmp_path, "[field]\na0 = 1.5\n"), "--out", str(tmp_path / "o")])
    assert code == 2
    assert "taming bound" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["trace", "--config", str(tmp_path / "absent.toml"), "--out", str(tmp_path / "o")]) == 2


def test_setup_error_exit_code(tmp_path):
    text = 'command = "nonsqueeze"\n[nonsqueeze]\nr = 1.5\nR = 1.0\n'
    out = tmp_path / "o"
    assert main(["nonsqueeze", "--config", write(tmp_path, text), "--out", str(out)]) == 2
    assert manifest(out)["error"]["type"] == "DemoSetupError"


def test_solve_local_writes_outputs(tmp_path):
    text = 'N = 16\n[field]\nkind = "bump"\na0 = 0.3\n[anchor]\np = [0.5, 1.0]\nv = [0.5, 0.0]\n'
    out = tmp_path / "o"
    assert main(["solve-local", "--config", write(tmp_path, text), "--out", str(out)]) == 0
    names = {f["path"] for f in manifest(out)["files"]}
    assert {"disc_boundary.dat", "disc_coefficients.txt", "iterations.dat", "disc.png", "convergence.png"} <= names


def test_trace_outputs_and_determinism(tmp_path):
    text = 'N = 12\ntol = 1e-6\n[field]\nkind = "bump"\na0 = 0.2\n'
    cfg = write(tmp_path, text)
    runs = []
    for k in range(2):
        out = tmp_path / f"o{k}"
        assert main(["trace", "--config", cfg, "--out", str(out), "--seed", "17"]) == 0
        runs.append(manifest(out))
    assert runs[0]["files"] == runs[1]["files"]
    names = {f["path"] for f in runs[0]["files"]}
    assert {"trace.dat", "trace.png", "trace_final_boundary.dat"} <= names


def test_seed_out_of_range(tmp_path):
    assert main(["check", "--config", write(tmp_path, ""), "--seed", str(2**64), "--out", str(tmp_path)]) == 2


def test_unknown_command_rejected(tmp_path):
    with pytest.raises(SystemExit):
        main(["fly", "--config", write(tmp_path, "")])
