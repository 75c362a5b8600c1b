import json

import pytest
from hypothesis import given, strategies as st

from wandering_iem import cli
from wandering_iem.config import ConfigError, RunConfig
from wandering_iem.formats import read_points_csv

configs = st.builds(
    RunConfig,
    theta=st.floats(-10, 10, allow_nan=False),
    letter=st.sampled_from("123456789"),
    depth=st.integers(1, 30),
    N=st.integers(0, 10**6),
    tol=st.floats(1e-15, 1.0),
    out=st.text(alphabet="abc/_-", min_size=1, max_size=12),
)


@given(configs)
def test_config_round_trip(cfg):
    assert RunConfig.from_json(cfg.to_json()) == cfg


@pytest.mark.parametrize("bad", [{"letter": "x"}, {"depth": 0}, {"tol": -1.0}, {"N": -3}, {"surprise": 1},
                                 {"depth": "7"}])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(bad)


def test_config_rejects_non_object():
    with pytest.raises(ConfigError):
        RunConfig.from_json("[1, 2]")
    with pytest.raises(ConfigError):
        RunConfig.from_json("{not json")


def test_bad_config_exit_code(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"tol": 0}))
    assert cli.main(["verify-urp", "--config", str(path), "--out", str(tmp_path)]) == 2
    assert "error" in capsys.readouterr().err
    assert cli.main(["verify-urp", "--letter", "0", "--out", str(tmp_path)]) == 2


def test_unknown_verb_is_usage_error():
    with pytest.raises(SystemExit) as e:
        cli.main(["transmogrify"])
    assert e.value.code == 2


def test_render_fractal_files(tmp_path):
    assert cli.main(["render-fractal", "--letter", "1", "--depth", "10", "--out", str(tmp_path)]) == 0
    z, labels = read_points_csv(tmp_path / "fractal_1_d10.csv")
    assert len(z) == len(labels) > 10
    svg = (tmp_path / "fractal_1_d10.svg").read_text()
    assert svg.startswith("<svg") and 'viewBox="0 0 1000 1000"' in svg and svg.rstrip().endswith("</svg>")
    import xml.etree.ElementTree as ET
    ET.fromstring(svg)


def test_verify_urp_table(tmp_path, capsys):
    assert cli.main(["verify-urp", "--depth", "10", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    rows = [l for l in out.splitlines()[1:] if l and not l.startswith("verify-urp")]
    assert len(rows) == 14
    cert = json.loads((tmp_path / "urp_certificate.json").read_text())
    assert cert["ok"] and len(cert["rows"]) == 14


def test_extreme_and_psi(tmp_path):
    assert cli.main(["extreme-points", "--depth", "8", "--out", str(tmp_path)]) == 0
    d = json.loads((tmp_path / "extreme_1_d8.json").read_text())
    assert d["monotone"] and len(d["directions"]) == 64
    assert cli.main(["psi-scan", "--depth", "8", "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "psi_1_d8.json").read_text())["candidates"]


def test_minimal_and_affine(tmp_path):
    assert cli.main(["minimal-window", "--N", "1000", "--out", str(tmp_path)]) == 0
    assert "·" in (tmp_path / "minimal_window.txt").read_text()
    assert cli.main(["build-affine", "--N", "800", "--out", str(tmp_path)]) == 0
    f = json.loads((tmp_path / "affine_iem.json").read_text())
    assert len(f["slopes"]) == len(f["breaks"]) - 1
    rep = json.loads((tmp_path / "wandering_report.json").read_text())
    assert rep["ok"] and rep["wandering"]["disjoint"]
    assert (tmp_path / "gap_orbit.svg").exists()


def test_failure_exit_code(tmp_path, capsys, monkeypatch):
    monkeypatch.setitem(cli.STAGES, "psi-scan", lambda cfg, out: (False, {"why": "forced"}))
    assert cli.main(["psi-scan", "--out", str(tmp_path)]) == 1
    out = capsys.readouterr().out
    diag = json.loads(out[: out.rindex("}") + 1])
    assert diag == {"verb": "psi-scan", "ok": False, "certificate": {"why": "forced"}}
    assert out.rstrip().endswith("psi-scan: FAIL")


def _run(verb, out, *extra):
    assert cli.main([verb, "--out", str(out), *extra]) == 0
    return {p.name: p.read_bytes() for p in sorted(out.iterdir())}


@pytest.mark.parametrize("verb,extra", [("render-fractal", ["--depth", "9"]), ("verify-urp", ["--depth", "9"]),
                                        ("build-affine", ["--N", "600"])])
def test_deterministic_outputs(tmp_path, verb, extra):
    a = _run(verb, tmp_path / "a", *extra)
    b = _run(verb, tmp_path / "b", *extra)
    assert a == b and a
