import json
import math

import numpy as np
import pytest

import saddlebench as sb
from saddlebench import harness
from saddlebench.cli import main as cli_main
from saddlebench.errors import InvalidConfigError, InvalidParamsError

CC_CONFIG = """
# bilinear cell
instance.family = bilinear_cc
instance.n = 2
instance.d = 2
instance.seed = 3
algorithm = ds_ogda
regime = cc
T = 50
stride = 1
measures = gap,gs
init.seed = 0
"""

MANUAL_CONFIG = """
instance.family = hard_gda
instance.bounded = false
algorithm = gda
regime = manual
params.r_x = 0
params.r_y = 0
params.eta_x = 0.1
params.eta_y = 0.1
params.beta_x = 0
params.beta_y = 0
T = 20
measures = gap
init.x0 = 0.2
init.y0 = 1.0
"""


class TestConfigParsing:
    def test_round_trip_fields(self):
        cfg = harness.parse_config(CC_CONFIG)
        assert cfg.instance.family == "bilinear_cc"
        assert cfg.instance.n == 2 and cfg.instance.seed == 3
        assert cfg.algorithm is sb.AlgorithmKind.DS_OGDA
        assert cfg.regime is sb.Regime.CC
        assert cfg.T == 50 and cfg.stride == 1
        assert cfg.measures == ("gap", "gs")

    def test_manual_params(self):
        cfg = harness.parse_config(MANUAL_CONFIG)
        assert cfg.params is not None and cfg.params.eta_x == 0.1
        assert cfg.x0 == (0.2,) and cfg.y0 == (1.0,)

    def test_unknown_key_rejected(self):
        with pytest.raises(InvalidConfigError):
            harness.parse_config(CC_CONFIG + "\nwhatever = 1\n")
        with pytest.raises(InvalidConfigError):
            harness.parse_config(CC_CONFIG + "\ninstance.shape = 3\n")

    def test_duplicate_key_rejected(self):
        with pytest.raises(InvalidConfigError):
            harness.parse_config(CC_CONFIG + "\nT = 60\n")

    def test_incomplete_manual_params_rejected(self):
        bad = MANUAL_CONFIG.replace("params.beta_y = 0\n", "")
        with pytest.raises(InvalidConfigError):
            harness.parse_config(bad)

    def test_horizon_floor(self):
        with pytest.raises(InvalidConfigError):
            harness.parse_config(CC_CONFIG.replace("T = 50", "T = 1"))

    def test_transposed_base_keys(self):
        text = """
instance.family = transposed
instance.base.family = polynomial_nc_c
algorithm = ds_ogda
regime = c_nc
T = 10
measures =
"""
        cfg = harness.parse_config(text)
        assert cfg.instance.base.family == "polynomial_nc_c"
        harness._execute(cfg)  # runs end to end


class TestPersistence:
    def test_trace_shape_and_roundtrip(self, tmp_path):
        cfg = harness.parse_config(CC_CONFIG.replace("T = 50", "T = 10"))
        trace, summary_path, summary = harness.run_experiment(cfg, tmp_path)
        text = trace.read_text(encoding="utf-8")
        lines = text.strip().split("\n")
        assert lines[0] == ",".join(harness.TRACE_COLUMNS)
        assert len(lines) == 11  # header + one row per iteration
        assert "\r" not in text
        records = harness.read_trace(trace)
        _, summary2 = harness._execute(cfg)
        fresh = harness._execute(cfg)[0]
        for a, b in zip(records, fresh):
            assert a == b  # 17-significant-digit float round trip is exact

    def test_rerun_is_byte_identical(self, tmp_path):
        cfg = harness.parse_config(CC_CONFIG)
        t1, s1, _ = harness.run_experiment(cfg, tmp_path / "a")
        t2, s2, _ = harness.run_experiment(cfg, tmp_path / "b")
        assert t1.read_bytes() == t2.read_bytes()
        assert s1.read_bytes() == s2.read_bytes()

    def test_summary_schema_guard(self, tmp_path):
        cfg = harness.parse_config(CC_CONFIG)
        _, spath, _ = harness.run_experiment(cfg, tmp_path)
        summary = harness.load_summary(spath)
        assert summary["status"] == "ok"
        assert summary["params"]["regime"] == "cc"
        data = json.loads(spath.read_text())
        data["mystery"] = 1
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(data))
        with pytest.raises(InvalidConfigError):
            harness.load_summary(bad)

    def test_diverged_run_persisted(self, tmp_path):
        text = MANUAL_CONFIG.replace("params.eta_x = 0.1", "params.eta_x = 3.0")
        text = text.replace("params.eta_y = 0.1", "params.eta_y = 3.0")
        text = text.replace("init.x0 = 0.2", "init.x0 = 1e300")
        cfg = harness.parse_config(text)
        _, spath, summary = harness.run_experiment(cfg, tmp_path)
        assert summary["status"] == "diverged"
        assert summary["diverged_at"] >= 1


class TestFitRate:
    def test_exact_power_laws(self):
        ts = np.arange(1, 200)
        fit = harness.fit_rate([(t, 3.0 / t) for t in ts])
        assert fit.slope == pytest.approx(-1.0, abs=1e-6)
        assert fit.r_squared >= 1 - 1e-9
        fit = harness.fit_rate([(t, 5.0 / math.sqrt(t)) for t in ts])
        assert fit.slope == pytest.approx(-0.5, abs=1e-6)
        fit = harness.fit_rate([(t, 2.0) for t in ts])
        assert fit.slope == pytest.approx(0.0, abs=1e-6)
        assert fit.r_squared == 1.0

    def test_window_and_nonpositive_handling(self):
        pts = [(t, 1.0 / t) for t in range(1, 100)] + [(100, 0.0)]
        with pytest.warns(UserWarning):
            fit = harness.fit_rate(pts)
        assert fit.slope == pytest.approx(-1.0, abs=1e-6)
        with pytest.raises(InvalidParamsError):
            harness.fit_rate([(1, 1.0), (2, 0.5), (3, 0.3), (4, 0.2)])

    def test_min_so_far_envelope(self):
        recs = [sb.IterationRecord(t=t, f_val=0.0, gap=g)
                for t, g in [(1, 3.0), (2, 1.0), (3, 2.0), (4, 0.5)]]
        assert harness.min_so_far(recs, "gap") == [
            (1, 3.0), (2, 1.0), (3, 1.0), (4, 0.5)]


class TestCompare:
    def _configs(self, Ts=(50,), algorithms=("ds_ogda", "ds_gda")):
        out = []
        for algo in algorithms:
            for T in Ts:
                text = CC_CONFIG.replace("algorithm = ds_ogda",
                                         f"algorithm = {algo}")
                text = text.replace("T = 50", f"T = {T}")
                out.append(harness.parse_config(text))
        return out

    def test_requires_two_configs(self):
        with pytest.raises(InvalidConfigError):
            harness.compare(self._configs(algorithms=("ds_ogda",)))

    def test_requires_shared_instance(self):
        a = harness.parse_config(CC_CONFIG)
        b = harness.parse_config(CC_CONFIG.replace("instance.seed = 3",
                                                   "instance.seed = 4"))
        with pytest.raises(InvalidConfigError):
            harness.compare([a, b])

    def test_identical_configs_identical_rows(self):
        a, b = harness.parse_config(CC_CONFIG), harness.parse_config(CC_CONFIG)
        table = harness.compare([a, b])
        assert table["rows"][0] == table["rows"][1]

    def test_rows_follow_input_order(self, tmp_path):
        configs = self._configs()
        out = tmp_path / "cmp.json"
        table = harness.compare(configs, out_path=out)
        assert [r["algorithm"] for r in table["rows"]] == ["ds_ogda", "ds_gda"]
        assert out.exists() and (tmp_path / "cmp.json.txt").exists()
        rendered = harness.render_comparison(table)
        assert "ds_ogda" in rendered and "slope_gap" in rendered

    def test_across_horizon_slopes_grouped(self):
        configs = self._configs(Ts=(50, 100, 200))
        table = harness.compare(configs)
        across = table["across_T"]
        assert "ds_ogda/cc" in across and "ds_gda/cc" in across
        assert "gap" in across["ds_ogda/cc"]

    def test_slope_ordering_optimistic_vs_plain(self):
        # three-horizon comparison on one instance: the optimistic cc cell
        # improves roughly at 1/T while the plain descent-ascent cells sit
        # near 1/sqrt(T), so the fitted exponents separate cleanly
        spec = sb.InstanceSpec(family="bilinear_cc", n=2, d=2, seed=3)
        configs = []
        for T in (100, 1000, 10000):
            configs.append(harness.ExperimentConfig(
                instance=spec, algorithm=sb.AlgorithmKind.DS_OGDA, T=T,
                regime=sb.Regime.CC, overrides={"c_r": 15.0},
                measures=("gap",), init_seed=0))
            eta = 0.2 / math.sqrt(T)
            for algo, r in ((sb.AlgorithmKind.DS_GDA, 1.0),
                            (sb.AlgorithmKind.GDA, 0.0)):
                params = sb.SolverParams(r, r, eta, eta, eta * r, eta * r,
                                         sb.Regime.MANUAL)
                configs.append(harness.ExperimentConfig(
                    instance=spec, algorithm=algo, T=T, params=params,
                    measures=("gap",), init_seed=0))
        table = harness.compare(configs)
        across = table["across_T"]
        s_ogda = across["ds_ogda/cc"]["gap"]
        s_dsgda = across["ds_gda/manual"]["gap"]
        s_gda = across["gda/manual"]["gap"]
        # optimistic cell strictly fastest; both plain cells clearly slower
        # (un-smoothed descent-ascent stalls on the rotation and comes out
        # shallowest of all)
        assert s_ogda <= s_dsgda - 0.2
        assert s_ogda <= s_gda - 0.2
        assert s_gda >= s_dsgda - 0.1
        assert -1.4 <= s_ogda <= -0.8
        assert -0.8 <= s_dsgda <= -0.3


class TestTightness:
    def test_floor_holds(self):
        rows = harness.tightness_report(eta=0.1, eps=0.02, T=60)
        assert len(rows) == 60
        assert all(ok for _, _, _, ok in rows)
        t, gap, bound, _ = rows[-1]
        assert gap == pytest.approx((0.9 ** 60) ** 2 * 0.02, rel=1e-12)


class TestCli:
    def test_run_and_plot(self, tmp_path, capsys):
        cfgfile = tmp_path / "cell.cfg"
        cfgfile.write_text(CC_CONFIG.replace("T = 50", "T = 30"))
        code = cli_main(["run", "--config", str(cfgfile), "--out",
                         str(tmp_path), "--plot"])
        out = capsys.readouterr().out
        assert code == 0
        assert "status:  ok" in out
        svgs = list(tmp_path.glob("*.svg"))
        assert svgs and svgs[0].read_text().startswith("<svg")

    def test_params_json(self, capsys):
        # the cc weight r = 1/T sits below the curvature constant, so the
        # certificate constants are undefined and reported as such
        code = cli_main(["params", "--regime", "cc", "--instance",
                         "bilinear_cc,n=2,d=2,seed=3", "--T", "100"])
        assert code == 0
        data = json.loads(capsys.readouterr().out)
        assert data["params"]["regime"] == "cc"
        assert "error" in data["validation"]

        code = cli_main(["params", "--regime", "nc_c", "--instance",
                         "polynomial_nc_c", "--T", "100"])
        assert code == 0
        data = json.loads(capsys.readouterr().out)
        assert data["validation"]["satisfied"] is False  # practical profile

    def test_params_strict_validates(self, capsys):
        code = cli_main(["params", "--regime", "universal", "--instance",
                         "bilinear_cc,n=2,d=2,seed=3", "--T", "100",
                         "--strict"])
        assert code == 0
        data = json.loads(capsys.readouterr().out)
        assert data["validation"]["satisfied"] is True

    def test_invalid_config_exit_code(self, tmp_path, capsys):
        cfgfile = tmp_path / "bad.cfg"
        cfgfile.write_text("nonsense = true\n")
        assert cli_main(["run", "--config", str(cfgfile)]) == 2
        assert cli_main(["params", "--regime", "nc_kl", "--instance",
                         "bilinear_cc,n=1,d=1,seed=0", "--T", "10"]) == 2

    def test_diverged_exit_code(self, tmp_path):
        text = MANUAL_CONFIG.replace("params.eta_x = 0.1", "params.eta_x = 3.0")
        text = text.replace("params.eta_y = 0.1", "params.eta_y = 3.0")
        text = text.replace("init.x0 = 0.2", "init.x0 = 1e300")
        cfgfile = tmp_path / "div.cfg"
        cfgfile.write_text(text)
        assert cli_main(["run", "--config", str(cfgfile), "--out",
                         str(tmp_path)]) == 3

    def test_compare_cli(self, tmp_path, capsys):
        a = tmp_path / "a.cfg"
        b = tmp_path / "b.cfg"
        a.write_text(CC_CONFIG.replace("T = 50", "T = 30"))
        b.write_text(CC_CONFIG.replace("T = 50", "T = 30").replace(
            "algorithm = ds_ogda", "algorithm = gda"))
        code = cli_main(["compare", "--configs", str(a), str(b), "--out",
                         str(tmp_path / "cmp.json")])
        assert code == 0
        assert (tmp_path / "cmp.json").exists()

    def test_tightness_cli(self, capsys):
        assert cli_main(["tightness", "--eta", "0.1", "--eps", "0.02",
                         "--T", "25"]) == 0
        out = capsys.readouterr().out
        assert "ok: gap >=" in out
