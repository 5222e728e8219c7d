import io
import math
import subprocess
import sys
from pathlib import Path

import pytest

from genexp.cli import main
from genexp.render import read_trace_csv

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
EXP = str(CONFIGS / "exp_circle.ini")
DIAMOND = str(CONFIGS / "diamond_a2.ini")


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def parse_kv(text):
    return dict(line.split(" = ", 1) for line in text.splitlines())


def test_constants():
    code, out, _ = run("constants", "--config", EXP)
    assert code == 0
    kv = parse_kv(out)
    assert float(kv["M"]) == pytest.approx(math.log(2), abs=1e-6)
    assert float(kv["xi.re"]) == pytest.approx(-4.9932162, abs=1e-6)
    assert kv["certified"] == "yes"


def test_validate_is_seeded():
    a = run("validate", "--config", EXP, "--seed", "4")
    b = run("validate", "--config", EXP, "--seed", "4")
    assert a[0] == 0 and a == b
    assert parse_kv(a[1])["roundtrip_ok"] == "yes"


def test_classify_and_address():
    code, out, _ = run("classify", "--config", EXP, "--point", "1+3.14159j", "--max-iter", "10")
    assert code == 0 and parse_kv(out)["verdict"] == "attracted_certified"
    code, out, _ = run("address", "--config", EXP, "--point", "1.9368474", "--depth", "5")
    assert parse_kv(out)["address"] == "0,0,0,0,0"


def test_render_uncertified_image(tmp_path):
    path = tmp_path / "fig.ppm"
    code, out, _ = run("render", "--config", DIAMOND, "--out", str(path), "--res", "64x64")
    assert code == 0
    assert parse_kv(out)["stamp"] == "uncertified"
    data = path.read_bytes()
    assert data.startswith(b"P6\n# uncertified\n64 64\n255\n")
    assert len(data) == len(b"P6\n# uncertified\n64 64\n255\n") + 3 * 64 * 64


def test_render_is_byte_identical(tmp_path):
    p1, p2 = tmp_path / "a.ppm", tmp_path / "b.ppm"
    c1, c2 = tmp_path / "a.csv", tmp_path / "b.csv"
    run("render", "--config", EXP, "--out", str(p1), "--csv", str(c1), "--res", "48x40")
    run("render", "--config", EXP, "--out", str(p2), "--csv", str(c2), "--res", "48x40", "--workers", "2")
    assert p1.read_bytes() == p2.read_bytes()
    assert c1.read_bytes() == c2.read_bytes()


def test_hair_csv(tmp_path):
    path = tmp_path / "hair.csv"
    code, _, _ = run("hair", "--config", EXP, "--address", "|per:0,1", "--depth", "8", "--samples", "5", "--t-max", "4", "--out", str(path))
    assert code == 0
    rows = read_trace_csv(path)
    assert len(rows) == 5 and rows[0][0] == 0.0
    code, out, _ = run("hair", "--config", EXP, "--depth", "8", "--samples", "5", "--anchors", "potential")
    assert code == 0
    assert out.splitlines()[0] == "t,re,im,depth_used"
    assert len(out.splitlines()) == 6


def test_endpoint_and_admissible():
    code, out, _ = run("endpoint", "--config", EXP, "--address", "|const:0", "--tol", "1e-10")
    assert code == 0
    assert float(parse_kv(out)["z.re"]) == pytest.approx(1.9368474, abs=1e-6)
    code, out, _ = run("admissible", "--config", EXP, "--address", "0,1|per:0,1")
    assert parse_kv(out)["verdict"] == "bounded"


def test_shadow_check_exit_codes(tmp_path):
    code, out, _ = run("shadow-check", "--config", EXP)
    assert code == 0
    assert out.count("level.") == 6 and "FAIL" not in out
    cfg = tmp_path / "diamond.ini"
    cfg.write_text("[curve]\nvariant = diamond\n[growth]\nvariant = exponential\n[map]\na = 7\n[run]\naddress = |const:0\ndepth = 6\n")
    code, out, err = run("shadow-check", "--config", str(cfg))
    assert code == 1 and "error[check_failed]" in err


def test_accumulate():
    code, out, _ = run("accumulate", "--config", EXP, "--point", "2.9368474", "--p", "3")
    kv = parse_kv(out)
    assert code == 0
    assert float(kv["dist_plus"]) <= float(kv["bound"]) * (1 + 1e-6)


def test_error_exit_codes(tmp_path):
    code, _, err = run("frobnicate", "--config", EXP)
    assert code == 1 and err.startswith("error[usage]")
    code, _, err = run("endpoint", "--config", EXP, "--address", "99999999|zero")
    assert code == 2 and "error[not_g_bounded]" in err
    code, _, err = run("render", "--config", EXP, "--out", str(tmp_path / "no" / "x.ppm"), "--res", "4x4")
    assert code == 2 and "error[io_failure]" in err
    code, _, err = run("constants", "--config", str(tmp_path / "missing.ini"))
    assert code == 2 and "error[io_failure]" in err
    code, _, err = run("classify", "--config", EXP)
    assert code == 1 and "--point" in err


def test_config_error_names_line(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[curve]\nvariant = unit_circle\n[growth]\nvariant = exponential\n[map]\na = 5\nfoo = 1\n")
    code, _, err = run("constants", "--config", str(cfg))
    assert code == 1 and "line 7" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "genexp", "constants", "--config", EXP], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "certified = yes" in proc.stdout
