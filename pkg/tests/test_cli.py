import json
import os
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from pantsdecomp import cli, io
from pantsdecomp.bounds import bavard_bound, bers_bound, r_g, r_g_rough
from pantsdecomp.surface import random_surface

SVG = "{http://www.w3.org/2000/svg}"


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    (d / "s.json").write_text(random_surface(2, 1.8, 4.0, 3).to_json())
    assert cli.main(["decompose", "--input", str(d / "s.json"), "--out", str(d / "d.json")]) == 0
    return d


# ---------------------------------------------------------------- bounds


def test_bounds_table(capsys):
    code, out, _ = run(capsys, "bounds", "--genus", 2)
    assert code == 0
    rows = dict(line.split() for line in out.splitlines()[1:])
    assert rows == {
        "bavard": f"{bavard_bound(2):.6f}",
        "r_g": f"{r_g(2):.6f}",
        "r_g_rough": f"{r_g_rough(2):.6f}",
        "bers": f"{bers_bound(2):.6f}",
    }


def test_bounds_genus_100(capsys):
    code, out, _ = run(capsys, "bounds", "--genus", 100)
    rows = dict(line.split() for line in out.splitlines()[1:])
    assert code == 0 and float(rows["r_g"]) < float(rows["r_g_rough"])


@pytest.mark.parametrize("g", ["1", "0", "x", "2.5"])
def test_bounds_bad_genus(capsys, g):
    code, _, _ = run(capsys, "bounds", "--genus", g)
    assert code == 1


def test_usage_errors(capsys):
    assert run(capsys)[0] == 1
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys, "--help")[0] == 0


# ---------------------------------------------------------------- random surfaces


def test_random_surface_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert run(capsys, "random-surface", "--genus", 2, "--seed", 5, "--out", p)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.json"
    run(capsys, "random-surface", "--genus", 2, "--seed", 6, "--out", c)
    assert json.loads(a.read_text())["twists"] != json.loads(c.read_text())["twists"]
    doc = json.loads(a.read_text())
    assert all(1.8 <= x <= 4.0 for x in doc["lengths"])


def test_random_surface_bad_range(capsys):
    assert run(capsys, "random-surface", "--genus", 2, "--min", 3, "--max", 1)[0] == 1
    assert run(capsys, "random-surface", "--genus", 1)[0] == 1


def test_random_surface_stdout(capsys):
    code, out, _ = run(capsys, "random-surface", "--genus", 3, "--shape", "ring", "--seed", 1)
    assert code == 0 and json.loads(out)["genus"] == 3


# ---------------------------------------------------------------- decompose / verify


def test_decompose_outputs(workdir):
    doc = json.loads((workdir / "d.json").read_text())
    assert doc["genus"] == 2 and len(doc["curves"]) == 3 and len(doc["pants"]) == 2
    assert doc["certificate"]["max_length"] <= doc["certificate"]["bers_bound"]
    for c in doc["curves"]:
        assert c["length"] == float(f"{c['length']:.9g}")
    trace = json.loads((workdir / "d.trace.json").read_text())
    assert trace[0]["kind"] == "INIT"


def test_decompose_is_deterministic(workdir, tmp_path, capsys):
    out = tmp_path / "again.json"
    assert run(capsys, "decompose", "--input", workdir / "s.json", "--out", out)[0] == 0
    assert out.read_bytes() == (workdir / "d.json").read_bytes()


def test_verify_round_trip(workdir, capsys):
    code, out, _ = run(capsys, "verify", "--input", workdir / "s.json", "--decomposition", workdir / "d.json")
    assert code == 0
    assert "curve_count_ok  True" in out


def test_verify_tampered_word(workdir, tmp_path, capsys):
    doc = json.loads((workdir / "d.json").read_text())
    w = doc["curves"][0]["word"]
    doc["curves"][0]["word"] = w + [1]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, _, _ = run(capsys, "verify", "--input", workdir / "s.json", "--decomposition", bad)
    assert code == 2


def test_verify_dropped_curve(workdir, tmp_path, capsys):
    doc = json.loads((workdir / "d.json").read_text())
    doc["curves"] = doc["curves"][:2]
    doc["pants"] = []
    bad = tmp_path / "short.json"
    bad.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "verify", "--input", workdir / "s.json", "--decomposition", bad)
    assert code == 2 and "curve_count_ok  False" in out


def test_verify_genus_mismatch(workdir, tmp_path, capsys):
    other = tmp_path / "g3.json"
    other.write_text(random_surface(3, 1.8, 4.0, 0, "ring").to_json())
    code, _, err = run(capsys, "verify", "--input", other, "--decomposition", workdir / "d.json")
    assert code == 1 and "genus" in err


@pytest.mark.parametrize(
    "text",
    ["", "{", '{"genus": 2, "curves": [{"word": [0]}]}', '{"genus": 2, "curves": [{"word": [1], "length": NaN}]}',
     '{"genus": 2, "curves": [{"word": [1]}], "pants": [[0, 0, 5]]}'],
)
def test_verify_unparseable_decomposition(workdir, tmp_path, capsys, text):
    bad = tmp_path / "x.json"
    bad.write_text(text)
    code, _, _ = run(capsys, "verify", "--input", workdir / "s.json", "--decomposition", bad)
    assert code == 1


def test_verify_letter_out_of_range(workdir, tmp_path, capsys):
    doc = json.loads((workdir / "d.json").read_text())
    doc["curves"][0]["word"] = [9]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert run(capsys, "verify", "--input", workdir / "s.json", "--decomposition", bad)[0] == 1


def test_decompose_nonpositive_length(tmp_path, capsys):
    doc = json.loads(random_surface(2, 1.8, 4.0, 0).to_json())
    doc["lengths"][1] = -1.0
    p = tmp_path / "neg.json"
    p.write_text(json.dumps(doc))
    out = tmp_path / "out.json"
    code, _, err = run(capsys, "decompose", "--input", p, "--out", out)
    assert code == 1 and err
    assert not out.exists()


def test_decompose_missing_file(tmp_path, capsys):
    assert run(capsys, "decompose", "--input", tmp_path / "nope.json")[0] == 1


def test_adversarial_relation_tolerance(workdir, tmp_path, capsys):
    out = tmp_path / "never.json"
    code, _, err = run(capsys, "decompose", "--input", workdir / "s.json", "--out", out, "--tol-rel", "1e-30")
    assert code == 3
    assert "holonomy construction failed" in err
    assert not out.exists()
    assert not [f for f in os.listdir(tmp_path) if f.startswith(".tmp-")]


def test_run_flag_validation(workdir, capsys):
    s = workdir / "s.json"
    assert run(capsys, "decompose", "--input", s, "--budget", 100)[0] == 1
    assert run(capsys, "decompose", "--input", s, "--tol-len", "-1")[0] == 1
    assert run(capsys, "decompose", "--input", s, "--base-point", "0,-1")[0] == 1
    assert run(capsys, "decompose", "--input", s, "--base-point", "zero")[0] == 1


def test_decompose_base_point(workdir, tmp_path, capsys):
    out = tmp_path / "bp.json"
    trace = tmp_path / "bp-trace.json"
    code, _, _ = run(capsys, "decompose", "--input", workdir / "s.json", "--out", out,
                     "--trace", trace, "--base-point", "0.02,0.95")
    assert code == 0
    assert json.loads(trace.read_text())[0]["point"] == [0.02, 0.95]


def test_systole_command(capsys, tmp_path):
    from pantsdecomp.surface import bolza_group  # noqa: F401

    p = tmp_path / "short.json"
    doc = json.loads(random_surface(2, 1.8, 4.0, 0).to_json())
    doc["lengths"][0] = 1.25
    p.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "systole", "--input", p)
    assert code == 0
    assert float(out.split()[1]) == pytest.approx(1.25, abs=1e-6)


# ---------------------------------------------------------------- render


def test_render(workdir, tmp_path, capsys):
    out = tmp_path / "pic.svg"
    code, _, _ = run(capsys, "render", "--input", workdir / "s.json", "--decomposition", workdir / "d.json", "--out", out)
    assert code == 0
    root = ET.parse(out).getroot()
    assert root.tag == f"{SVG}svg" and root.get("version") == "1.1"
    paths = root.findall(f"{SVG}path")
    assert len(paths) >= 4
    assert len({p.get("stroke") for p in paths if p.get("id", "").startswith("curve-")}) == 3
    assert sum("length" in (t.text or "") for t in root.iter(f"{SVG}text")) == 3


def test_render_empty_decomposition(workdir, tmp_path, capsys):
    empty = tmp_path / "empty.json"
    empty.write_text("")
    out = tmp_path / "outline.svg"
    code, _, _ = run(capsys, "render", "--input", workdir / "s.json", "--decomposition", empty, "--out", out)
    assert code == 0
    paths = ET.parse(out).getroot().findall(f"{SVG}path")
    assert [p.get("id") for p in paths] == ["domain"]


def test_render_bad_decomposition(workdir, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run(capsys, "render", "--input", workdir / "s.json", "--decomposition", bad)[0] == 1


# ---------------------------------------------------------------- io helpers


def test_atomic_write_replaces(tmp_path):
    p = tmp_path / "f.txt"
    io.atomic_write(p, "one")
    io.atomic_write(p, "two")
    assert p.read_text() == "two"
    assert os.listdir(tmp_path) == ["f.txt"]


def test_atomic_write_leaves_nothing_on_failure(tmp_path):
    p = tmp_path / "f.txt"
    with pytest.raises(TypeError):
        io.atomic_write(p, None)
    assert os.listdir(tmp_path) == []


def test_sig9_and_dumps():
    assert io.sig9(3.14159265358979) == 3.14159265
    assert json.loads(io.dumps({"x": [1 / 3]}))["x"][0] == 0.333333333
    with pytest.raises(ValueError):
        io.dumps({"x": float("nan")})


def test_module_entry_point(workdir):
    got = subprocess.run([sys.executable, "-m", "pantsdecomp", "bounds", "--genus", "3"], capture_output=True, text=True)
    assert got.returncode == 0
    assert f"{r_g(3):.6f}" in got.stdout
