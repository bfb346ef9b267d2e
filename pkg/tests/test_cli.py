import json
import subprocess
import sys

import pytest

from bidisk_realize.cli import EXIT_FAIL, EXIT_INPUT, EXIT_OK, main
from bidisk_realize.poly import MatPoly


@pytest.fixture
def S_file(tmp_path):
    path = tmp_path / "S.json"
    assert main(["example", "--name", "kummert-4x4", "--part", "S", "--out", str(path)]) == EXIT_OK
    return path


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return path


def test_example_roundtrip(S_file, fx):
    assert MatPoly.from_json_obj(json.loads(S_file.read_text())).equals(fx["S"])


def test_breakdown_prints(S_file, capsys):
    assert main(["breakdown", str(S_file)]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "[2, 2]"


def test_realize_verify_decompose(S_file, tmp_path):
    R = tmp_path / "R.json"
    assert main(["realize", str(S_file), "--out", str(R)]) == EXIT_OK
    out = json.loads(R.read_text())
    assert out["verification"]["pass"]
    assert main(["verify", "--tfr", str(R), "--fn", str(S_file)]) == EXIT_OK
    assert main(["nilpotency", "--tfr", str(R)]) == EXIT_OK
    dec = tmp_path / "dec.json"
    assert main(["decompose", "--tfr", str(R), "--fn", str(S_file), "--out", str(dec)]) == EXIT_OK
    assert main(["recompose", "--dec", str(dec), "--fn", str(S_file)]) == EXIT_OK
    assert main(["reflect", "--dec", str(dec), "--fn", str(S_file)]) == EXIT_OK


def test_realize_deterministic(S_file, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["realize", str(S_file), "--out", str(a)]) == EXIT_OK
    assert main(["realize", str(S_file), "--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_non_inner(tmp_path):
    f = write(tmp_path, "half.json", MatPoly.scalar({(1, 0): "1/2"}, 2).to_json_obj())
    # a failed precondition is an input error, a failed check is a verification failure
    assert main(["realize", str(f)]) == EXIT_INPUT
    assert main(["verify", "--fn", str(f)]) == EXIT_FAIL


def test_fr_and_sos2(tmp_path):
    T = MatPoly.scalar({(-1,): "1/2", (0,): "5/4", (1,): "1/2"}, 1)
    assert main(["fr", str(write(tmp_path, "T.json", T.to_json_obj()))]) == EXIT_OK
    T2 = MatPoly.scalar({(0, 0): 3, (1, 0): 1, (-1, 0): 1}, 2)
    assert main(["sos2", str(write(tmp_path, "T2.json", T2.to_json_obj()))]) == EXIT_OK


def test_input_errors(tmp_path, capsys):
    assert main(["realize", str(tmp_path / "missing.json")]) == EXIT_INPUT
    assert main(["realize", str(write(tmp_path, "bad.json", {"bad": 1}))]) == EXIT_INPUT
    assert main(["example", "--name", "nope"]) == EXIT_INPUT
    assert main(["frobnicate"]) == EXIT_INPUT
    assert "error" in capsys.readouterr().err


def test_console_entry_point(S_file):
    proc = subprocess.run([sys.executable, "-m", "bidisk_realize.cli", "breakdown", str(S_file)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == EXIT_OK and proc.stdout.strip() == "[2, 2]"
