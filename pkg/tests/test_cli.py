import json
import math

import pytest

from wbounds.cli import main
from wbounds.core import (
    Channel,
    GaussianMixture1D,
    Pmf,
    save_channel,
    save_mixture,
    save_pmf,
    save_two_input_channel,
    TwoInputChannel,
)

LN2 = math.log(2.0)


@pytest.fixture()
def data(tmp_path):
    save_pmf(Pmf.from_probs([0.8, 0.1, 0.1]), tmp_path / "p2.json")
    save_pmf(Pmf.from_probs([0.2, 0.8]), tmp_path / "bern02.json")
    save_pmf(Pmf.from_probs([0.5, 0.5]), tmp_path / "bern05.json")
    save_channel(Channel.bsc(0.11), tmp_path / "bsc.json")
    save_channel(Channel.bsc(0.1), tmp_path / "bsc01.json")
    save_mixture(GaussianMixture1D.single(0.0, 2.0), tmp_path / "g2.json")
    save_mixture(GaussianMixture1D.single(0.0, 2.1), tmp_path / "g21.json")
    w = TwoInputChannel.additive_mod(Pmf.from_probs([0.8, 0.1, 0.1]), 3, 2)
    save_two_input_channel(w, tmp_path / "w.json")
    return tmp_path


def test_corners_bits_example(capsys):
    assert main(["corners", "--a", "0", "--b", "0", "--p1", "1", "--p2", "1",
                 "--base", "bits"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["c1_prime"] == pytest.approx(0.5)
    assert obj["base"] == "bits"


def test_corners_base_conversion_exact(capsys):
    args = ["corners", "--a", "0.6", "--b", "0.4", "--p1", "2", "--p2", "3"]
    assert main(args + ["--base", "nats"]) == 0
    nats = json.loads(capsys.readouterr().out)
    assert main(args + ["--base", "bits"]) == 0
    bits = json.loads(capsys.readouterr().out)
    for key in ("c1", "c2", "c2_tilde", "c1_prime", "c2_prime"):
        assert bits[key] == nats[key] / LN2


def test_region_validation_exit_code(tmp_path, capsys):
    code = main(["region", "gic", "--a", "1.5", "--p1", "1", "--p2", "1",
                 "--out", str(tmp_path / "c.csv")])
    assert code == 1
    err = capsys.readouterr().err
    assert err.startswith("E1: a must lie in (0,1]")


def test_region_csv_and_determinism(tmp_path):
    out1, out2 = tmp_path / "c1.csv", tmp_path / "c2.csv"
    args = ["region", "gic", "--a", "0.8", "--b", "0", "--p1", "6", "--p2", "6",
            "--grid", "30", "--quiet"]
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    lines = out1.read_text().splitlines()
    assert lines[0] == "R1,R2,kind,base"
    kinds = {row.split(",")[2] for row in lines[1:]}
    assert kinds == {"outer", "inner"}


def test_region_base_conversion(tmp_path):
    args = ["region", "gic", "--a", "0.5", "--p1", "2", "--p2", "2", "--grid", "5",
            "--quiet"]
    nats, bits = tmp_path / "n.csv", tmp_path / "b.csv"
    assert main(args + ["--base", "nats", "--out", str(nats)]) == 0
    assert main(args + ["--base", "bits", "--out", str(bits)]) == 0
    for ln, lb in zip(nats.read_text().splitlines()[1:], bits.read_text().splitlines()[1:]):
        r1n, r2n = (float(v) for v in ln.split(",")[:2])
        r1b, r2b = (float(v) for v in lb.split(",")[:2])
        # CSV prints 12 significant digits; equality holds at that precision
        assert r1b == pytest.approx(r1n / LN2, rel=1e-11, abs=1e-11)
        assert r2b == pytest.approx(r2n / LN2, rel=1e-11, abs=1e-11)


def test_determinism_across_processes(tmp_path):
    import subprocess
    import sys

    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    for out in (out1, out2):
        subprocess.run(
            [sys.executable, "-m", "wbounds.cli", "verify", "--family", "gic_corner",
             "--trials", "20", "--seed", "4", "--quiet", "--out", str(out)],
            check=True,
        )
    assert out1.read_bytes() == out2.read_bytes()


def test_verify_cli_report_and_determinism(tmp_path):
    out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
    base = ["verify", "--family", "jpt", "--trials", "10", "--seed", "1", "--quiet"]
    assert main(base + ["--out", str(out1)]) == 0
    assert main(base + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    report = json.loads(out1.read_text())
    assert report["trials_run"] == 10 and not report["failures"]


def test_verify_unknown_family_is_usage_error(capsys):
    assert main(["verify", "--family", "bogus", "--trials", "1", "--seed", "0"]) == 1
    assert capsys.readouterr().err.startswith("E1:")


def test_noncertified_quadrature_exits_2(tmp_path, capsys):
    # atoms make the quantile integrand discontinuous; a tight tolerance
    # cannot be certified and the CLI must say so via exit code 2
    save_mixture(GaussianMixture1D.atoms([0.0, 1.0], [0.5, 0.5]), tmp_path / "a.json")
    save_mixture(GaussianMixture1D.atoms([0.3, 1.4], [0.4, 0.6]), tmp_path / "b.json")
    code = main(["w2", "--p", str(tmp_path / "a.json"), "--q", str(tmp_path / "b.json"),
                 "--p-order", "1", "--abs-tol", "1e-12"])
    assert code == 2
    captured = capsys.readouterr()
    assert captured.err.startswith("E2:")
    assert float(captured.out.strip()) == pytest.approx(0.46, abs=1e-9)


def test_unknown_flag_is_usage_error(capsys):
    assert main(["corners", "--a", "0", "--b", "0", "--p1", "1", "--p2", "1",
                 "--frobnicate", "1"]) == 1
    assert capsys.readouterr().err.startswith("E1:")


def test_w2_and_distance_verbs(data, capsys):
    assert main(["w2", "--p", str(data / "g2.json"), "--q", str(data / "g21.json")]) == 0
    val = float(capsys.readouterr().out.strip())
    assert val == pytest.approx(math.sqrt(2.1) - math.sqrt(2.0), abs=1e-6)

    assert main(["tv", "--p", str(data / "bern02.json"), "--q", str(data / "bern05.json")]) == 0
    assert float(capsys.readouterr().out.strip()) == pytest.approx(0.3)

    assert main(["dbar", "--p", str(data / "bern02.json"), "--q", str(data / "bern05.json")]) == 0
    assert float(capsys.readouterr().out.strip()) == pytest.approx(0.3)


def test_entropy_kl_mi_verbs(data, capsys):
    assert main(["entropy", "--pmf", str(data / "bern05.json"), "--base", "bits"]) == 0
    assert float(capsys.readouterr().out.strip()) == pytest.approx(1.0)

    assert main(["kl", "--p", str(data / "bern02.json"), "--q", str(data / "bern05.json"),
                 "--base", "nats"]) == 0
    expected = 0.2 * math.log(0.4) + 0.8 * math.log(1.6)
    assert float(capsys.readouterr().out.strip()) == pytest.approx(expected)

    assert main(["mi", "--pmf", str(data / "bern05.json"), "--channel", str(data / "bsc.json"),
                 "--base", "nats"]) == 0
    hb = -(0.11 * math.log(0.11) + 0.89 * math.log(0.89))
    assert float(capsys.readouterr().out.strip()) == pytest.approx(LN2 - hb)


def test_dentropy_verb(data, capsys):
    assert main(["dentropy", "--mixture", str(data / "g2.json"), "--base", "nats"]) == 0
    val = float(capsys.readouterr().out.strip())
    assert val == pytest.approx(0.5 * math.log(2 * math.pi * math.e * 2.0), abs=1e-8)


def test_eta_verb(data, capsys):
    assert main(["eta", "--two-input", str(data / "w.json"), "--grid", "30"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["eta_tv"] == pytest.approx(0.7)
    assert 0.0 <= obj["eta_kl_grid"] <= 1.0


def test_fc_verb(data, tmp_path, capsys):
    out = tmp_path / "fc.csv"
    assert main(["fc", "--channel-a", str(data / "bsc01.json"),
                 "--channel-b", str(data / "bsc01.json"), "--grid", "80",
                 "--base", "nats", "--out", str(out), "--quiet"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,Fc,grid_err"
    t, fc_val, err = (float(v) for v in lines[2].split(","))
    assert fc_val <= t and err > 0


def test_discrete_corner_verb(data, capsys):
    assert main(["discrete-corner", "--p2", str(data / "p2.json"), "--base", "nats"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["q_star"] == pytest.approx(0.5, abs=1e-5)
    assert obj["p3"] == pytest.approx([0.45, 0.45, 0.1], abs=1e-7)
    assert obj["case"] == "theorem"


def test_malformed_input_is_invariant_violation(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"alphabet_size": 2, "n": 1, "probs": [0.4, 0.4]}')
    assert main(["entropy", "--pmf", str(bad)]) == 3
    assert capsys.readouterr().err.startswith("E3:")


def test_bounds_regularity_verb(capsys):
    assert main(["bounds", "regularity", "--sigma-sq", "1.0",
                 "--v-atoms=-1:0.5,1:0.5", "--u-atoms", "0:1",
                 "--base", "nats"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["c1"] == pytest.approx(3.0)
    assert obj["c2"] == pytest.approx(4.0)
    assert obj["delta_ppr"] >= 0.0
    assert obj["symmetric_kl_bound"] == pytest.approx(2 * obj["delta_ppr"])
