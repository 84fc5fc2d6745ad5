from __future__ import annotations

import shutil
import subprocess
import sys

import numpy as np
import pytest

from conftest import DATA, scramble
from cajux.cli import main
from cajux.core import CoveringArray
from cajux.store import read_ca, read_library, read_manifest, write_ca


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_pass_and_fail(capsys):
    code, out, _ = run(capsys, "verify", DATA / "ca_54_5_9_2.ca", 5)
    assert code == 0 and out.strip() == "strength 5: PASS"
    code, out, _ = run(capsys, "verify", DATA / "ca_54_5_9_2.ca", "--t", 6)
    assert code == 1 and out.startswith("strength 6: FAIL columns ")


def test_verify_defaults_to_header_strength(capsys):
    code, out, _ = run(capsys, "verify", DATA / "ca_33_3_6_3.ca")
    assert code == 0 and out.strip() == "strength 3: PASS"


def test_verify_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.ca"
    bad.write_text("CA 2 1 2 2\n0 1\n1 2\n")
    code, _, err = run(capsys, "verify", bad)
    assert code == 2 and "line 3" in err


def test_missing_file(tmp_path, capsys):
    code, _, err = run(capsys, "verify", tmp_path / "nope.ca")
    assert code == 2


def test_bounds_and_multisets(capsys):
    assert run(capsys, "bounds", 3, 5, 2)[1] == "exact 10\n"
    assert run(capsys, "bounds", "--t", 2, "--k", 4, "--v", 3)[1] == "exact 9\n"
    assert run(capsys, "multisets", 29, 2, 4, 3)[1] == "9 9 11\n9 10 10\n"
    assert run(capsys, "multisets", 7, 2, 3, 2)[1] == ""


def test_bad_parameters(capsys):
    assert run(capsys, "bounds", 3, 2, 2)[0] == 2
    assert run(capsys, "bounds", 3, 5)[0] == 2
    assert run(capsys, "bounds", 3, 5, 2, "--t", 4)[0] == 2


def test_canon(tmp_path, capsys, ca33, rng):
    a, b = tmp_path / "a.ca", tmp_path / "b.ca"
    write_ca(scramble(ca33, rng), a)
    write_ca(scramble(ca33, rng), b)
    code, out, _ = run(capsys, "canon", a, "--out", tmp_path / "ca.ca")
    assert code == 0 and out.strip() in ("canonicalized", "already canonical")
    run(capsys, "canon", b, "--out", tmp_path / "cb.ca")
    assert (tmp_path / "ca.ca").read_bytes() == (tmp_path / "cb.ca").read_bytes()
    code, out, _ = run(capsys, "canon", tmp_path / "ca.ca", "--out", tmp_path / "cc.ca")
    assert out.strip() == "already canonical"
    code, out, err = run(capsys, "canon", tmp_path / "ca.ca")
    assert out == (tmp_path / "ca.ca").read_text() and "already canonical" in err


def test_generate(tmp_path, capsys):
    code, out, _ = run(capsys, "generate", 11, 2, 5, 3, "--out", tmp_path)
    assert code == 0 and out.strip() == "3"
    lib = read_library(tmp_path / "CA_11_2_5_3.calib", validate=True)
    assert len(lib) == 3
    m = read_manifest(tmp_path / "generate_11_2_5_3.manifest")
    assert m["verdict"] == "exists" and m["result_count"] == "3"


def test_generate_empty(tmp_path, capsys):
    code, out, _ = run(capsys, "generate", "--n", 3, "--t", 2, "--k", 3, "--v", 2, "--out", tmp_path)
    assert code == 0 and out.strip() == "0"
    assert (tmp_path / "CA_3_2_3_2.calib").read_text() == "CALIB 0 3 2 3 2\n"


def test_generate_budget(tmp_path, capsys):
    code, _, err = run(capsys, "generate", 11, 2, 5, 3, "--out", tmp_path, "--node-budget", 20)
    assert code == 3 and "not authoritative" in err
    assert (tmp_path / "CA_11_2_5_3.calib.partial").exists()
    assert not (tmp_path / "CA_11_2_5_3.calib").exists()
    assert read_manifest(tmp_path / "generate_11_2_5_3.manifest")["verdict"] == "budget-exhausted"


def test_search_flow(tmp_path, capsys):
    libs, out = tmp_path / "libs", tmp_path / "out"
    code, _, err = run(capsys, "search", 6, 2, 4, 2, "--libs", libs, "--out", out)
    assert code == 4 and "2 3 4" in err
    for n in (2, 3, 4):
        assert run(capsys, "generate", n, 1, 3, 2, "--out", libs)[0] == 0
    code, stdout, _ = run(capsys, "search", 6, 2, 4, 2, "--libs", libs, "--out", out, "--validate")
    assert code == 0
    assert "multiset: 2 4" in stdout and "multiset: 3 3" in stdout and "results: 8" in stdout
    m = read_manifest(out / "search_6_2_4_2.manifest")
    assert m["verdict"] == "exists" and m["result_count"] == "8"
    assert set(m) >= {"input.CA_2_1_3_2.calib", "input.CA_3_1_3_2.calib", "input.CA_4_1_3_2.calib"}
    for i in range(8):
        assert read_ca(out / f"CA_6_2_4_2_{i:04d}.ca").is_valid()


def test_search_partial(tmp_path, capsys):
    libs = tmp_path / "libs"
    run(capsys, "generate", 3, 1, 3, 2, "--out", libs)
    code, stdout, _ = run(capsys, "search", 6, 2, 4, 2, "--libs", libs, "--out", tmp_path, "--allow-partial")
    assert code == 0
    assert read_manifest(tmp_path / "search_6_2_4_2.manifest")["verdict"] in ("exists", "not-found-partial")


def test_search_nonexistent_is_instant(tmp_path, capsys):
    code, out, _ = run(capsys, "search", 7, 3, 4, 2, "--out", tmp_path)
    assert code == 0 and "multisets: 0" in out and "verdict: nonexistent" in out
    m = read_manifest(tmp_path / "search_7_3_4_2.manifest")
    assert m["verdict"] == "nonexistent" and m["multisets"] == "none"


def test_search_budget(tmp_path, capsys):
    libs = tmp_path / "libs"
    run(capsys, "generate", 9, 2, 3, 3, "--out", libs)
    code, _, _ = run(capsys, "search", 27, 3, 4, 3, "--libs", libs, "--out", tmp_path, "--node-budget", 10)
    assert code == 3
    assert read_manifest(tmp_path / "search_27_3_4_3.manifest")["verdict"] == "budget-exhausted"


def test_workers_byte_identical(tmp_path, capsys):
    libs = tmp_path / "libs"
    for n in (2, 3, 4):
        run(capsys, "generate", n, 1, 3, 2, "--out", libs)
    outputs = []
    for w in (1, 2, 8):
        out = tmp_path / f"w{w}"
        run(capsys, "search", 6, 2, 4, 2, "--libs", libs, "--out", out, "--workers", w)
        files = sorted(p.name for p in out.iterdir())
        body = {}
        for name in files:
            text = (out / name).read_text()
            if name.endswith(".manifest"):
                text = "\n".join(l for l in text.splitlines() if not l.startswith("wall_time"))
            body[name] = text
        outputs.append(body)
    assert outputs[0] == outputs[1] == outputs[2]


def test_console_entry_point():
    exe = shutil.which("cajux")
    cmd = [exe] if exe else [sys.executable, "-m", "cajux"]
    res = subprocess.run(cmd + ["bounds", "2", "10", "2"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout == "exact 6\n"
