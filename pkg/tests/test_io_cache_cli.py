import json
import os

import numpy as np
import pytest
from click.testing import CliRunner

from jointspec import cache as C
from jointspec.cli import main
from jointspec.errors import CorruptCache, ParseError, UsageError, ValidationError
from jointspec.io import parse_input, write_csv
from jointspec.matgroup import JORDAN
from jointspec.scenarios import Flags, triangular_set, run_scenario
from jointspec.spectrum import NECKLACE, enumerate_level

DOC = {
    "dim": 2,
    "field": "real",
    "group": {"kind": "GL"},
    "generators": [{"label": "a", "entries": [[2, 1], [1, 1]]},
                   {"label": "b", "entries": [[1, 0], [1, 1]]}],
    "weights": [0.5, 0.5],
}


def test_parse_roundtrip_and_hash():
    d = parse_input(json.dumps(DOC))
    assert d.labels == ["a", "b"] and d.frame.kind == "GL"
    d2 = parse_input(json.dumps(DOC, indent=4))
    assert d.content_hash() == d2.content_hash()
    other = dict(DOC, weights=[0.25, 0.75])
    assert parse_input(json.dumps(other)).content_hash() != d.content_hash()


def test_parse_errors():
    with pytest.raises(ParseError) as ei:
        parse_input('{"dim": 2,\n "generators": [}')
    assert ei.value.line == 2
    bad_shape = dict(DOC, generators=[{"label": "a", "entries": [[1, 2, 3]]}])
    with pytest.raises(ValidationError):
        parse_input(json.dumps(bad_shape))
    dup = dict(DOC, generators=[DOC["generators"][0], DOC["generators"][0]])
    with pytest.raises(ValidationError):
        parse_input(json.dumps(dup))
    prod = dict(DOC, dim=4, group={"kind": "PRODUCT", "blocks": 2},
                generators=[{"label": "a", "entries": np.ones((4, 4)).tolist()}], weights=None)
    with pytest.raises(ValidationError):
        parse_input(json.dumps(prod))


def test_csv_columns(tmp_path):
    p = tmp_path / "x.csv"
    write_csv(p, "demo", [(3, "JORDAN", "NECKLACE", 0.1, 1 / 3, "a.b")])
    lines = p.read_text().splitlines()
    assert lines[0] == "scenario,level,kind,mode,x,y,word"
    assert lines[1] == "demo,3,JORDAN,NECKLACE,0.1,0.333333333333,a.b"


def test_cache_corruption_detected_and_recomputed(tmp_path):
    S = triangular_set()
    compute = lambda: enumerate_level(S, 6, JORDAN, NECKLACE)
    h = "cd" * 32
    cl, hit = C.cached_cloud(str(tmp_path), h, compute, 6, JORDAN, NECKLACE)
    assert not hit
    path = C.cache_path(str(tmp_path), h, 6, JORDAN, NECKLACE)
    blob = bytearray(open(path, "rb").read())
    blob[100] ^= 0xFF
    open(path, "wb").write(bytes(blob))
    with pytest.raises(CorruptCache):
        C.cache_get(str(tmp_path), h, 6, JORDAN, NECKLACE)
    cl2, hit2 = C.cached_cloud(str(tmp_path), h, compute, 6, JORDAN, NECKLACE)
    assert not hit2 and np.array_equal(cl2.points, cl.points)
    _, hit3 = C.cached_cloud(str(tmp_path), h, compute, 6, JORDAN, NECKLACE)
    assert hit3


def test_unknown_scenario():
    with pytest.raises(UsageError):
        run_scenario("nope")


def test_run_scenario_alias_and_files(tmp_path):
    res = run_scenario("fig5", Flags(out=str(tmp_path)), n=6)
    assert res.verdict and res.key_numbers["level"] == 6
    assert sorted(os.path.basename(f) for f in res.files) == ["fig5.csv", "fig5.svg"]
    svg = open(res.files[1]).read()
    assert svg.startswith("<svg") and 'viewBox="0 0 800 800"' in svg


def test_cli_exit_codes(tmp_path):
    r = CliRunner()
    assert r.invoke(main, ["list"]).exit_code == 0
    assert r.invoke(main, ["run", "nope"]).exit_code == 2
    assert r.invoke(main, ["run"]).exit_code == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert r.invoke(main, ["run", "--input", str(bad)]).exit_code == 3
    out = str(tmp_path / "o")
    res = r.invoke(main, ["run", "fig5", "--level", "12", "--budget", "1000", "--out", out])
    assert res.exit_code == 5
    # an impossible tolerance makes the verdict fail
    res = r.invoke(main, ["run", "fig6", "--level", "6", "--tol", "-1", "--strict", "--out", out])
    assert res.exit_code == 4
    res = r.invoke(main, ["run", "fig6", "--level", "6", "--tol", "-1", "--out", out])
    assert res.exit_code == 0


def test_cli_input_and_cache(tmp_path):
    r = CliRunner()
    doc = tmp_path / "doc.json"
    doc.write_text(json.dumps(DOC))
    args = ["run", "--input", str(doc), "--level", "6", "--out", str(tmp_path / "o"),
            "--cache", str(tmp_path / "c"), "--format", "csv"]
    first = r.invoke(main, args)
    assert first.exit_code == 0, first.output
    out = json.loads(first.output)
    assert out["files"][0].endswith("input.csv")
    assert "lyapunov" in out["key_numbers"]
    again = r.invoke(main, args + ["--verify-cache"])
    assert again.exit_code == 0
    assert json.loads(again.output)["key_numbers"]["cache_verified"] is True
    assert len(os.listdir(tmp_path / "c")) == 2


def test_cli_threads_match_serial(tmp_path):
    r = CliRunner()
    a = r.invoke(main, ["run", "fig3", "--level", "11", "--out", str(tmp_path / "a")])
    b = r.invoke(main, ["run", "fig3", "--level", "11", "--threads", "4", "--out", str(tmp_path / "b")])
    assert a.exit_code == b.exit_code == 0
    assert (tmp_path / "a" / "fig3.csv").read_bytes() == (tmp_path / "b" / "fig3.csv").read_bytes()
