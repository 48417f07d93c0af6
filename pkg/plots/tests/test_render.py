import json
import math
from pathlib import Path

import pytest

from regionplots import RegionFormatError, read_region_csv, render_region
from regionplots.cli import main_region, main_verify
from regionplots.render import corner_markers, render_verify_summary

DATA = Path(__file__).parent / "data"
FIXTURE = DATA / "curve_a0.8_b0_p6_p6.csv"


def test_read_fixture_csv():
    data = read_region_csv(FIXTURE)
    assert data.base == "nats"
    assert len(data.outer) == 60 and len(data.inner) == 60
    # curves were produced for a=0.8, P1=P2=6: check endpoints numerically
    upper = max(data.outer, key=lambda p: p[1])
    assert upper[1] == pytest.approx(0.5 * math.log(7.0), abs=1e-9)
    assert upper[0] == pytest.approx(0.5 * math.log1p(0.64 * 6.0 / 7.0), abs=1e-9)


def test_markers_are_the_three_corners():
    data = read_region_csv(FIXTURE)
    markers = corner_markers(data)
    assert len(markers) == 3
    labels = {label for _, _, label in markers}
    assert labels == {"upper corner", "lower corner", "outer-bound edge"}
    lower = next(m for m in markers if m[2] == "lower corner")
    assert lower[0] == pytest.approx(0.5 * math.log(7.0), abs=1e-9)  # C1
    assert lower[1] == pytest.approx(0.5 * math.log1p(6.0 / (1 + 0.64 * 6)), abs=1e-9)


def test_render_region_criterion(tmp_path):
    """Secondary acceptance: figure from the (0.8, 0, 6, 6) CSV with both
    curves and three corner markers; malformed CSV fails loudly."""
    out = tmp_path / "fig.svg"
    summary = render_region(FIXTURE, out, title="rate region")
    assert out.exists() and out.stat().st_size > 0
    assert summary["legend"] == ["outer", "inner"]
    assert len(summary["markers"]) == 3
    assert summary["outer_points"] == 60 and summary["inner_points"] == 60
    print("[criterion 13] PASS  render_region drew both curves and 3 corner markers")


def test_render_is_deterministic(tmp_path):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    render_region(FIXTURE, a)
    render_region(FIXTURE, b)
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize(
    "content, message",
    [
        ("", "empty"),
        ("R1,R2,base,kind\n", "header"),
        ("R1,R2,kind,base\n", "no curve points"),
        ("R1,R2,kind,base\n0.1,0.2,sideways,nats\n", "kind"),
        ("R1,R2,kind,base\nabc,0.2,outer,nats\n", "non-numeric"),
        ("R1,R2,kind,base\n0.1,0.2,outer\n", "columns"),
        ("R1,R2,kind,base\n0.1,0.2,outer,nats\n0.1,0.2,inner,bits\n", "base"),
    ],
)
def test_malformed_csv_fails_loudly(tmp_path, content, message):
    bad = tmp_path / "bad.csv"
    bad.write_text(content)
    with pytest.raises(RegionFormatError, match=message):
        read_region_csv(bad)
    assert main_region(["--in", str(bad), "--out", str(tmp_path / "x.svg")]) == 1


def test_cli_region_roundtrip(tmp_path, capsys):
    out = tmp_path / "fig.svg"
    assert main_region(["--in", str(FIXTURE), "--out", str(out)]) == 0
    assert "markers=3" in capsys.readouterr().out


def _write_report(path, family, min_slack, failures):
    path.write_text(json.dumps({
        "family": family,
        "seed": 1,
        "trials_run": 5,
        "failures": failures,
        "min_slack": min_slack,
        "certified": True,
        "tolerance": 1e-9,
    }))


def test_verify_summary(tmp_path):
    _write_report(tmp_path / "a.json", "jpt", 0.12, [])
    _write_report(tmp_path / "b.json", "marton_chain", -0.01,
                  [{"trial": 0, "digest": "x", "lhs": 1.0, "rhs": 0.5, "slack": -0.01}])
    out = tmp_path / "slack.svg"
    summary = render_verify_summary(
        [tmp_path / "a.json", tmp_path / "b.json"], out
    )
    assert out.exists()
    assert summary["failing"] == ["marton_chain"]
    assert summary["min_slacks"] == [0.12, -0.01]


def test_verify_summary_rejects_garbage(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(RegionFormatError):
        render_verify_summary([bad], tmp_path / "x.svg")
    assert main_verify(["--in", str(bad), "--out", str(tmp_path / "x.svg")]) == 1


def test_verify_summary_cli_glob(tmp_path, capsys):
    _write_report(tmp_path / "r1.json", "jpt", 0.1, [])
    _write_report(tmp_path / "r2.json", "fc", 0.2, [])
    out = tmp_path / "s.svg"
    assert main_verify(["--in", str(tmp_path / "r*.json"), "--out", str(out)]) == 0
    assert "2 families" in capsys.readouterr().out
