import json
import math
import subprocess
import sys

import pytest

from hopsim.cli import main
from hopsim.ensemble import ensemble_from_amplitudes, read_ensemble, write_ensemble


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def hops_file(tmp_path):
    path = tmp_path / "hops.csv"
    code = run("generate", "--kind", "hops", "--chi-h", math.pi / 2, "--delta-h", 0, "--a0", 1,
               "--n", 20000, "--seed", 42, "--out", path)
    assert code == 0
    return path


class TestGenerate:
    def test_row_count_and_determinism(self, tmp_path):
        args = ["generate", "--kind", "hops", "--chi-h", "1.5708", "--delta-h", "0", "--a0", "1",
                "--n", "100000", "--seed", "42"]
        assert run(*args, "--out", tmp_path / "a.csv") == 0
        assert run(*args, "--workers", 3, "--out", tmp_path / "b.csv") == 0
        text = (tmp_path / "a.csv").read_text()
        assert len(text.splitlines()) == 100000 + 2
        assert (tmp_path / "b.csv").read_bytes() == (tmp_path / "a.csv").read_bytes()
        meta = json.loads((tmp_path / "a.csv.meta.json").read_text())
        assert meta["randomness"]["seed"] == 42 and meta["command"] == "generate"

    def test_missing_chi_h(self, tmp_path, capsys):
        assert run("generate", "--kind", "hops", "--delta-h", 0, "--n", 5, "--seed", 1, "--out", tmp_path / "x") == 2
        assert "--chi-h" in capsys.readouterr().err

    def test_out_of_range(self, tmp_path, capsys):
        assert run("generate", "--kind", "polarized", "--chi", 4, "--delta", 0, "--n", 5, "--seed", 1,
                   "--out", tmp_path / "x") == 2
        assert "--chi" in capsys.readouterr().err

    def test_bad_amplitude_law(self, tmp_path):
        assert run("generate", "--kind", "unpolarized", "--amplitude", "uniform", "--lo", 2, "--hi", 1,
                   "--n", 5, "--seed", 1, "--out", tmp_path / "x") == 2

    def test_unwritable(self, tmp_path):
        assert run("generate", "--kind", "unpolarized", "--n", 5, "--seed", 1,
                   "--out", tmp_path / "missing" / "x.csv") == 3

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("kind = hops\nchi-h = 1.0\ndelta_h = 0.5\nn = 50\nseed = 3  # fixed\n")
        assert run("generate", "--config", cfg, "--n", 10, "--out", tmp_path / "c.csv") == 0
        e = read_ensemble(tmp_path / "c.csv")
        assert len(e) == 10 and e.kind.chi_h == 1.0

    def test_config_unknown_key(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("colour = red\n")
        assert run("generate", "--config", cfg) == 2


class TestParams:
    def test_hops_values(self, hops_file, tmp_path, capsys):
        tol = 5 / math.sqrt(20000)
        assert run("stokes", hops_file, "--json", tmp_path / "s.json") == 0
        s = json.loads((tmp_path / "s.json").read_text())["parameters"]
        assert abs(s["s0"] - 1) < 1e-12
        assert all(abs(s[k]) <= tol for k in ("s1", "s2", "s3"))
        assert run("hidden", hops_file, "--json", tmp_path / "h.json") == 0
        h = json.loads((tmp_path / "h.json").read_text())["parameters"]
        for k, want in zip(("h0", "h1", "h2", "h3"), (1, 0, 1, 0)):
            assert abs(h[k] - want) <= tol
        assert "s0" in capsys.readouterr().out

    def test_x_polarized(self, tmp_path):
        path = tmp_path / "x.csv"
        write_ensemble(ensemble_from_amplitudes([1.0, -1.0, 1j], [0, 0, 0]), path)
        assert run("stokes", path, "--json", tmp_path / "s.json") == 0
        s = json.loads((tmp_path / "s.json").read_text())["parameters"]
        assert [s[k] for k in ("s0", "s1", "s2", "s3")] == [1.0, -1.0, 0.0, 0.0]

    def test_malformed(self, tmp_path, capsys):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        assert run("stokes", empty) == 2
        bad = tmp_path / "bad.csv"
        bad.write_text('# {"kind": {"name": "unpolarized"}}\nre_ax,im_ax,re_ay,im_ay\n1,0,0,0\n1,0\n')
        assert run("hidden", bad) == 2
        assert "line 4" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert run("stokes", tmp_path / "nope.csv") == 3


class TestPcmi:
    def test_certificate(self, tmp_path):
        src = tmp_path / "pol.csv"
        run("generate", "--kind", "polarized", "--chi", math.pi / 2, "--delta", math.pi / 4,
            "--amplitude", "rayleigh", "--scale", 1, "--n", 1000, "--seed", 5, "--out", src)
        assert run("pcmi", "--in", src, "--out", tmp_path / "out.csv") == 0
        report = json.loads((tmp_path / "out.csv.report.json").read_text())
        assert report["certificate"]["passed"]
        phase_sum = next(c for c in report["certificate"]["checks"] if c["name"] == "phase_sum")
        assert abs(phase_sum["value"] + math.pi / 4) < 1e-10
        assert report["audit"]["classification"] == "hidden-polarized"

    def test_second_pass(self, tmp_path):
        src = tmp_path / "pol.csv"
        run("generate", "--kind", "polarized", "--chi", 1.0, "--delta", 0.3, "--n", 200, "--seed", 5, "--out", src)
        run("pcmi", "--in", src, "--out", tmp_path / "once.csv")
        assert run("pcmi", "--in", tmp_path / "once.csv", "--out", tmp_path / "twice.csv",
                   "--report", tmp_path / "r.json") == 0
        report = json.loads((tmp_path / "r.json").read_text())
        assert report["audit"]["classification"] == "polarized"
        assert "polarized" in report["note"]

    def test_rotated_basis(self, tmp_path):
        src = tmp_path / "pol.csv"
        run("generate", "--kind", "polarized", "--chi", 1.0, "--delta", 0.3, "--n", 200, "--seed", 5, "--out", src)
        assert run("pcmi", "--in", src, "--eps", "0.6,0.8j", "--delta-m", 0.2, "--out", tmp_path / "o.csv") == 0

    def test_bad_delta(self, hops_file, tmp_path, capsys):
        assert run("pcmi", "--in", hops_file, "--delta-m", 4, "--out", tmp_path / "o.csv") == 2
        assert "--delta-m" in capsys.readouterr().err

    def test_bad_eps(self, hops_file, tmp_path):
        assert run("pcmi", "--in", hops_file, "--eps", "0,0", "--out", tmp_path / "o.csv") == 2


class TestVerify:
    def test_default(self, tmp_path):
        assert run("verify", "--cutoff", 6, "--out", tmp_path / "v.json") == 0
        report = json.loads((tmp_path / "v.json").read_text())
        assert report["all_passed"]
        assert report["algebra"]["h0_h2_sign"]["verified"] == "-"
        for rel in report["algebra"]["relations"]:
            if rel["expected_zero"]:
                assert rel["residual"] < 1e-10
        res = report["measurement_identities"]["residuals"]
        assert res["D2-S2"] < 1e-10 and res["D2-H2"] > 0
        assert report["hops_factorization_polarized_index_pattern"] > 0.5

    @pytest.mark.parametrize("cutoff", [2, 11])
    def test_range(self, cutoff):
        assert run("verify", "--cutoff", cutoff) == 2

    def test_stdout(self, capsys):
        assert run("verify", "--cutoff", 3) == 0
        captured = capsys.readouterr()
        assert json.loads(captured.out)["algebra"]["cutoff"] == 3
        assert "-2i H3" in captured.err


class TestMeasure:
    def test_direct(self, hops_file, tmp_path):
        assert run("measure", "--in", hops_file, "--scheme", "direct", "--shots", 5, "--seed", 1,
                   "--report", tmp_path / "r.json", "--counts", tmp_path / "c.csv",
                   "--plot-data", tmp_path / "p.csv") == 0
        r = json.loads((tmp_path / "r.json").read_text())
        est, h = r["estimate"], r["ensemble_hidden"]
        assert abs(est["mean_sum"] - h["h0"]) <= 5 * est["stderr_sum"]
        assert est["shots"] == 100000
        assert len((tmp_path / "c.csv").read_text().splitlines()) == 100001
        assert (tmp_path / "p.csv").read_text().startswith("shots,")
        assert (tmp_path / "c.csv.meta.json").exists()

    def test_rotated(self, hops_file, tmp_path):
        assert run("measure", "--in", hops_file, "--scheme", "rotated45", "--shots", 2, "--seed", 1,
                   "--report", tmp_path / "r.json") == 0
        est = json.loads((tmp_path / "r.json").read_text())["estimate"]
        assert abs(est["mean_diff"]) <= 5 * est["stderr_diff"]

    def test_zero_shots(self, hops_file):
        assert run("measure", "--in", hops_file, "--scheme", "direct", "--shots", 0, "--seed", 1) == 2

    def test_bad_scheme(self, hops_file):
        assert run("measure", "--in", hops_file, "--scheme", "sideways", "--shots", 1, "--seed", 1) == 2


def test_console_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "hopsim", "verify", "--cutoff", "4", "--out", tmp_path / "v.json"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads((tmp_path / "v.json").read_text())["all_passed"]


def test_no_command():
    assert run() == 2
