import json

import numpy as np
import pytest

from qwplates import cli


def write_config(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


BASIC = """
[protocol]
family = U1
tau = 10
delta = pi

[grid]
bz_length_mm = 5.0
pitch_um = 4.0
"""


class TestParseAngle:
    @pytest.mark.parametrize("text,value", [
        ("pi", np.pi),
        ("7pi/4", 7 * np.pi / 4),
        ("-pi/5", -np.pi / 5),
        ("2*pi", 2 * np.pi),
        ("0.75", 0.75),
        ("3/4", 0.75),
        ("0", 0.0),
    ])
    def test_valid(self, text, value):
        assert cli.parse_angle(text) == pytest.approx(value)

    @pytest.mark.parametrize("text", ["", "pie", "pi/", "two pi", "1..2"])
    def test_invalid(self, text):
        with pytest.raises(cli.ConfigError):
            cli.parse_angle(text)


class TestConfigValidation:
    def test_unknown_section_rejected(self, tmp_path):
        cfg = write_config(tmp_path, BASIC + "\n[banana]\nkey = 1\n")
        rc = cli.main(["compile", "--config", cfg, "--out", str(tmp_path / "o")])
        assert rc == cli.EXIT_CONFIG

    def test_unknown_key_rejected(self, tmp_path):
        cfg = write_config(tmp_path, BASIC + "\n[optics]\nwobble = 3\n")
        rc = cli.main(["compile", "--config", cfg, "--out", str(tmp_path / "o")])
        assert rc == cli.EXIT_CONFIG

    def test_missing_required_key(self, tmp_path):
        cfg = write_config(tmp_path, "[protocol]\nfamily = U1\n")
        rc = cli.main(["compile", "--config", cfg, "--out", str(tmp_path / "o")])
        assert rc == cli.EXIT_CONFIG

    def test_missing_file(self, tmp_path):
        rc = cli.main(["compile", "--config", str(tmp_path / "nope.ini"),
                       "--out", str(tmp_path / "o")])
        assert rc == cli.EXIT_CONFIG

    def test_bad_angle_value(self, tmp_path):
        cfg = write_config(tmp_path, BASIC.replace("delta = pi", "delta = pie"))
        rc = cli.main(["compile", "--config", cfg, "--out", str(tmp_path / "o")])
        assert rc == cli.EXIT_CONFIG


class TestCompile:
    def test_writes_patterns_and_report(self, tmp_path):
        cfg = write_config(tmp_path, BASIC)
        out = tmp_path / "out"
        assert cli.main(["compile", "--config", cfg, "--out", str(out)]) == 0
        assert (out / "patterns.txt").exists()
        report = json.loads((out / "feasibility.json").read_text())
        assert report["n_stages"] == 1
        assert report["stages"][0]["resolution_ok"] is True
        lines = [ln for ln in (out / "patterns.txt").read_text().splitlines()
                 if not ln.startswith("#")]
        assert len(lines) == 1250

    def test_feasibility_hard_fail(self, tmp_path):
        cfg = write_config(tmp_path, BASIC.replace("tau = 10", "tau = 1000"))
        rc = cli.main(["compile", "--config", cfg, "--out", str(tmp_path / "o")])
        assert rc == cli.EXIT_FEASIBILITY

    def test_force_overrides_feasibility(self, tmp_path):
        cfg = write_config(tmp_path, BASIC.replace("tau = 10", "tau = 1000"))
        rc = cli.main(["compile", "--config", cfg, "--out", str(tmp_path / "o"),
                       "--force"])
        assert rc == 0

    def test_deterministic_pattern_bytes(self, tmp_path):
        """Identical config + seed give byte-identical pattern files."""
        cfg = write_config(tmp_path, BASIC)
        for name in ("a", "b"):
            assert cli.main(["compile", "--config", cfg,
                             "--out", str(tmp_path / name)]) == 0
        assert ((tmp_path / "a" / "patterns.txt").read_bytes()
                == (tmp_path / "b" / "patterns.txt").read_bytes())

    def test_two_stage_compile(self, tmp_path):
        cfg = write_config(tmp_path, BASIC)
        out = tmp_path / "out"
        assert cli.main(["compile", "--config", cfg, "--out", str(out),
                         "--stages", "2"]) == 0
        assert (out / "patterns_stage1.txt").exists()
        assert (out / "patterns_stage2.txt").exists()

    def test_tau_zero(self, tmp_path):
        cfg = write_config(tmp_path, BASIC.replace("tau = 10", "tau = 0"))
        out = tmp_path / "out"
        assert cli.main(["compile", "--config", cfg, "--out", str(out)]) == 0
        data = np.loadtxt(out / "patterns.txt")
        assert np.ptp(data[:, 1:], axis=0).max() < 1e-9


class TestSimulate:
    def test_outputs_and_similarity(self, tmp_path):
        cfg = write_config(tmp_path, BASIC)
        out = tmp_path / "out"
        assert cli.main(["simulate", "--config", cfg, "--out", str(out)]) == 0
        report = json.loads((out / "similarity.json").read_text())
        assert report["similarity"] >= 0.999
        assert (out / "optics_distribution.csv").exists()
        assert (out / "oracle_distribution.csv").exists()
        assert (out / "camera.pgm").exists()
        assert (out / "camera_off.pgm").exists()

    def test_deterministic_csv_bytes(self, tmp_path):
        cfg = write_config(tmp_path, BASIC)
        for name in ("a", "b"):
            assert cli.main(["simulate", "--config", cfg, "--out",
                             str(tmp_path / name), "--seed", "4"]) == 0
        for fname in ("optics_distribution.csv", "oracle_distribution.csv"):
            assert ((tmp_path / "a" / fname).read_bytes()
                    == (tmp_path / "b" / fname).read_bytes())


ENTROPY_CFG = """
[entropy]
family = U3
tau = 12
n_phis = 4
n_realizations = 3
delta_center = pi
half_width = pi/5
"""


class TestEntropy:
    def test_outputs(self, tmp_path):
        cfg = write_config(tmp_path, ENTROPY_CFG)
        out = tmp_path / "out"
        assert cli.main(["entropy", "--config", cfg, "--out", str(out)]) == 0
        lines = (out / "entropy_phi.csv").read_text().splitlines()
        assert lines[0] == "phi,mean_entropy,stderr"
        assert len(lines) == 5
        rhos = json.loads((out / "density_matrices.json").read_text())
        assert len(rhos) == 4

    def test_deterministic(self, tmp_path):
        cfg = write_config(tmp_path, ENTROPY_CFG)
        for name in ("a", "b"):
            assert cli.main(["entropy", "--config", cfg, "--out",
                             str(tmp_path / name), "--seed", "3"]) == 0
        assert ((tmp_path / "a" / "entropy_phi.csv").read_bytes()
                == (tmp_path / "b" / "entropy_phi.csv").read_bytes())

    def test_curve_outputs(self, tmp_path):
        cfg = write_config(tmp_path, ENTROPY_CFG +
                           "curve = true\ncurve_n_inputs = 5\ncurve_tau_stride = 6\n")
        out = tmp_path / "out"
        assert cli.main(["entropy", "--config", cfg, "--out", str(out)]) == 0
        assert (out / "entropy_tau_disordered.csv").exists()
        assert (out / "entropy_tau_ordered.csv").exists()


def test_presets_ship_with_package(tmp_path):
    from importlib import resources
    names = {"fig2.ini", "fig3a.ini", "fig3b.ini", "fig3c.ini", "fig4.ini"}
    shipped = {p.name for p in resources.files("qwplates.presets").iterdir()
               if p.name.endswith(".ini")}
    assert names <= shipped
