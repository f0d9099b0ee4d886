import json
import math

import numpy as np
import pytest

from weylab import harness
from weylab.domains import AnnularSector, Rectangle
from weylab.errors import (DegenerateFit, EmptyWindow, HypothesisViolation,
                           WindowViolation)
from weylab.harness import (ExperimentConfig, default_delta, delta_window,
                            fit_power_law, load_config, run_highenergy,
                            run_semiclassical, write_report)
from weylab.randomness import CoefficientLaw


def sc_law(rho=1.2, K_q=16):
    return CoefficientLaw(alpha_min=0, alpha_max=0, n=1, rho_decay=rho,
                          K_q=K_q)


def sc_config(f2, **kw):
    defaults = dict(
        sym=f2, law=sc_law(), domains=[Rectangle(0.1, 0.7, -0.5, 0.5)],
        mode="semiclassical", h_list=(0.1,), trials=2, seed=3)
    defaults.update(kw)
    return ExperimentConfig(**defaults)


def he_config(f4, **kw):
    defaults = dict(
        sym=f4, law=CoefficientLaw(alpha_min=0, alpha_max=0, n=1,
                                   rho_decay=1.1, K_q=16),
        domains=[AnnularSector(0.05, 2 * math.pi - 0.05, 1.0)],
        mode="highenergy", lambda_list=(2.0, 4.0), trials=2, seed=5)
    defaults.update(kw)
    return ExperimentConfig(**defaults)


class TestDeltaWindow:
    def test_window_shape(self):
        lo, hi = delta_window(0.1, 1.2, 0.25, 3.0)
        assert lo == pytest.approx(1e-3)
        assert hi == pytest.approx(0.1 ** 1.95 / math.log(10.0) ** 2)
        assert lo < hi

    def test_default_delta_is_geometric_midpoint(self):
        lo, hi = delta_window(0.1, 1.2, 0.25, 3.0)
        assert default_delta(0.1, 1.2, 0.25, 3.0) == pytest.approx(
            math.sqrt(lo * hi))

    def test_empty_window(self):
        # N0 barely above the upper exponent and a tiny h: the log factor
        # pushes the upper endpoint below the lower one
        with pytest.raises(EmptyWindow):
            delta_window(1e-6, 1.2, 0.25, 1.96)

    def test_n0_must_clear_upper_exponent(self):
        with pytest.raises(ValueError):
            delta_window(0.1, 1.2, 0.25, 1.5)


class TestConfigValidation:
    def test_f2_semiclassical_accepted(self, f2):
        cfg = sc_config(f2)
        assert cfg.mode == "semiclassical"

    def test_f1_rejected_separate_bases(self, f1):
        # the two roots of F1 live at different base points, violating the
        # shared-base requirement of the semiclassical construction
        with pytest.raises(HypothesisViolation):
            sc_config(f1, sym=f1, domains=[Rectangle(-0.2, 0.2, -0.4, 0.4)])

    def test_domain_outside_sigma_rejected(self, f2):
        with pytest.raises(HypothesisViolation):
            sc_config(f2, domains=[Rectangle(4.0, 5.0, 4.0, 5.0)])

    def test_perturbation_order_capped(self, f2):
        with pytest.raises(HypothesisViolation):
            sc_config(f2, law=CoefficientLaw(alpha_min=0, alpha_max=2, n=1,
                                             rho_decay=1.2))

    def test_highenergy_window_violation(self, f4):
        # m - alpha1 - rho - 3/4 <= 0
        with pytest.raises(WindowViolation):
            he_config(f4, law=CoefficientLaw(alpha_min=0, alpha_max=1, n=1,
                                             rho_decay=1.1))

    def test_highenergy_needs_sector(self, f4):
        with pytest.raises(ValueError):
            he_config(f4, domains=[Rectangle(0.0, 1.0, 0.0, 1.0)])

    def test_truncation_rule(self, f2):
        cfg = sc_config(f2)
        from weylab.symbol import xi_window
        K = cfg.truncation_K(0.1, 1.0)
        assert K == int(math.ceil(2.0 * xi_window(f2, 1.0) / 0.1)) + 2


class TestFit:
    def test_exact_power_law(self):
        pairs = [(s, 3.0 * s ** -0.5) for s in (1.0, 2.0, 4.0, 8.0)]
        slope, intercept, r2 = fit_power_law(pairs)
        assert slope == pytest.approx(-0.5)
        assert math.exp(intercept) == pytest.approx(3.0)
        assert r2 == pytest.approx(1.0)

    def test_degenerate(self):
        with pytest.raises(DegenerateFit):
            fit_power_law([(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)])


class TestSemiclassicalRun:
    def test_small_run(self, f2):
        cfg = sc_config(f2, h_list=(0.1, 0.08), trials=3)
        rep = run_semiclassical(cfg)
        assert rep.mode == "semiclassical"
        assert len(rep.records) == 6
        for h in (0.1, 0.08):
            agg = rep.aggregates[h]
            assert agg["trials"] == 3
            assert agg["W"] == pytest.approx(
                rep.extras["weyl_measure"] / (2 * math.pi * h))
        # finest-h coverage entry exists relative to the coarsest h
        assert 0.08 in rep.coverage

    def test_delta_floor_guard(self, f2):
        with pytest.raises(EmptyWindow):
            run_semiclassical(sc_config(f2, delta_override=1e-18))

    def test_trial_reuse_of_stream_labels(self, f2):
        cfg = sc_config(f2, trials=2)
        rep = run_semiclassical(cfg)
        labels = {r.seed_label for r in rep.records}
        assert labels == {"3/sc:0.1/0", "3/sc:0.1/1"}


class TestHighEnergyRun:
    def test_small_run(self, f4):
        cfg = he_config(f4)
        rep = run_highenergy(cfg)
        assert rep.mode == "highenergy"
        assert len(rep.records) == 4
        assert all(v for v in rep.extras["rescaling_identity"].values())
        for info in rep.extras["dyadic"].values():
            assert info["sum_matches"]
        # one omega per trajectory: same label across both lambdas
        labels = {(r.trial, r.seed_label) for r in rep.records}
        assert labels == {(0, "5/he/0"), (1, "5/he/1")}

    def test_weyl_prefactor_is_classical(self, f4):
        from weylab.domains import dilate, weyl_measure
        cfg = he_config(f4)
        rep = run_highenergy(cfg)
        lam = 4.0
        measure = weyl_measure(f4, dilate(cfg.domains[0], lam)).value
        assert rep.aggregates[lam]["W"] == pytest.approx(
            measure / (2 * math.pi), rel=1e-9)


class TestEnvelopeSanity:
    def test_mean_residual_exponent_in_band(self, f2):
        # in the converged regime the fitted exponent of mean |N - W| vs h
        # should sit in a broad band around the theoretical -1/2 (the
        # counting jitter floor pushes it toward the shallow end)
        law = CoefficientLaw(alpha_min=0, alpha_max=0, n=1, rho_decay=1.2,
                             K_q=256)
        cfg = ExperimentConfig(sym=f2, law=law,
                               domains=[Rectangle(0.1, 0.7, -0.5, 0.5)],
                               mode="semiclassical",
                               h_list=(0.05, 0.035, 0.025), trials=60,
                               seed=42)
        rep = run_semiclassical(cfg)
        slope = rep.envelope_fit_h[0]
        assert -0.75 <= slope <= -0.25


class TestReports:
    def test_write_report_files(self, f2, tmp_path):
        rep = run_semiclassical(sc_config(f2, trials=2))
        out = write_report(rep, tmp_path / "out")
        trials = (tmp_path / "out" / "trials.csv").read_text()
        lines = trials.strip().split("\n")
        assert lines[0] == harness.CSV_HEADER
        assert len(lines) == 3
        assert all(line.endswith(",0") for line in lines[1:])
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["mode"] == "semiclassical"
        assert "versions" in summary

    def test_rerun_byte_identical(self, f2, tmp_path):
        for sub in ("a", "b"):
            rep = run_semiclassical(sc_config(f2, trials=2))
            write_report(rep, tmp_path / sub)
        a = (tmp_path / "a" / "trials.csv").read_bytes()
        b = (tmp_path / "b" / "trials.csv").read_bytes()
        assert a == b

    def test_eigen_dump(self, f2, tmp_path):
        rep = run_semiclassical(sc_config(f2, trials=1), keep_eigs=True)
        write_report(rep, tmp_path / "out", dump_eigs=True)
        eigs = (tmp_path / "out" / "eigenvalues.csv").read_text()
        lines = eigs.strip().split("\n")
        assert lines[0] == "mode,h_or_lambda,trial,re,im"
        assert len(lines) > 10


class TestConfigFile:
    def test_load_config_roundtrip(self, tmp_path):
        raw = {
            "symbol": {"n": 1, "m": 2,
                       "coeffs": {"0": [[0, 0, 1, 0.0, 1.0]],
                                  "2": [[0, 0, 0, 1.0, 0.0]]}},
            "perturbation": {"alpha_min": 0, "alpha_max": 0, "rho": 1.2,
                             "K_q": 16},
            "domains": [{"type": "rectangle", "re_min": 0.1, "re_max": 0.7,
                         "im_min": -0.5, "im_max": 0.5}],
            "experiment": {"mode": "semiclassical", "h_list": [0.1],
                           "trials": 2},
            "seed": 9,
        }
        path = tmp_path / "config.json"
        path.write_text(json.dumps(raw))
        cfg = load_config(path)
        assert cfg.sym.m == 2
        assert cfg.law.K_q == 16
        assert cfg.seed == 9
        assert cfg.h_list == (0.1,)
        assert cfg.echo() == raw

    def test_parse_domains(self):
        sector = harness.parse_domain(
            {"type": "sector", "theta_min": 0.1, "theta_max": 1.0,
             "r_out": 2.0, "r_in": 1.0})
        assert isinstance(sector, AnnularSector)
        disk = harness.parse_domain({"type": "disk", "radius": 1.0})
        assert disk.contains(0.5)
        with pytest.raises(ValueError):
            harness.parse_domain({"type": "blob"})
