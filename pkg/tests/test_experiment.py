import json

import numpy as np
import pytest

from wavegap.experiment import (GapRunConfig, appendix_ratio_suite,
                                product_ratios, certified_radial_run,
                                report_verdict, scaling_suite,
                                gap_run)
from wavegap.field import ScalarField, TorusGrid
from wavegap.norms import bump_family


@pytest.fixture(scope="module")
def short_cfg():
    return GapRunConfig(deltas=(0.3, 0.1))


@pytest.fixture(scope="module")
def sphere_report(short_cfg):
    return gap_run(short_cfg)


@pytest.fixture(scope="module")
def flat_report():
    return gap_run(GapRunConfig(deltas=(0.3, 0.1), target="flat_line",
                                         negative_control=True))


def test_gap_run_rows_structure(sphere_report):
    assert len(sphere_report.rows) == 2
    for row in sphere_report.rows:
        assert row["gap"] > 0 and row["data_distance"] > 0
        assert 0 < row["t_j"] <= 1.0
        assert row["R"] >= 1.0
        # the bump sits where the normalized solution exceeds the half level
        assert row["extras"]["z_core_min"] >= 0.5 - 1e-9
        assert row["extras"]["z_core_max"] <= 1.0 + 1e-9


def test_gap_run_data_distance_decreases(sphere_report):
    dd = [r["data_distance"] for r in sphere_report.rows]
    assert dd[1] < dd[0]


def test_decomposition_inequality(sphere_report):
    for row in sphere_report.rows:
        t = row["terms"]
        lower = t["main"] - t["commutator"] - t["energy"]
        assert row["gap"] >= lower - 1e-10 * max(1.0, abs(lower))


def test_energy_term_controlled_by_data_distance(sphere_report):
    for row in sphere_report.rows:
        assert row["terms"]["energy"] <= row["data_distance"] * (1.0 + 1e-10)


def test_flat_target_needs_flag():
    with pytest.raises(ValueError, match="negative_control"):
        gap_run(GapRunConfig(deltas=(0.3,), target="flat_line"))


def test_flat_control_gap_tracks_data(flat_report):
    for row in flat_report.rows:
        assert row["gap"] <= 1.01 * row["data_distance"]
        assert row["terms"]["main"] == 0.0


def test_sphere_beats_flat_pointwise(sphere_report, flat_report):
    # the curvature term only adds on top of the linear gap
    for rs, rf in zip(sphere_report.rows, flat_report.rows):
        assert rs["gap"] >= rf["gap"] - 1e-12


def test_mu_zero_degenerates(short_cfg):
    rep = gap_run(GapRunConfig(deltas=(0.3,), mu=0.0))
    row = rep.rows[0]
    assert row["data_distance"] == 0.0
    assert abs(row["gap"]) < 1e-15


def test_admissibility_rejection():
    with pytest.raises(ValueError, match="admissibility"):
        gap_run(GapRunConfig(deltas=(0.3,), lam=5.0))


def test_verdict_pure_function(sphere_report):
    # recomputing the verdict from serialized rows reproduces it bit-exactly
    rows = json.loads(json.dumps(sphere_report.rows))
    verdict, detail = report_verdict(rows)
    assert verdict == sphere_report.verdict
    assert detail == sphere_report.verdict_detail


def test_certified_run_certificate(short_cfg):
    rep = certified_radial_run(short_cfg)
    assert rep.verdict == "pass"
    for row in rep.rows:
        cert = row["certificate"]
        assert cert["holds"] and cert["lhs"] >= 0.95 * cert["c3"]
        # window invariant: 1/2 < z < 2 on the certified inner ball at unit time
        assert row["extras"]["z_window_min"] > 0.5 - 1e-9
        assert row["extras"]["z_window_max"] < 2.0
    c = rep.constants
    assert abs(c["mu"] - c["c0"] / 2.0) < 1e-12
    assert abs(c["lam0"] - 0.5 / (8.0 * c["chi_l2"])) < 1e-12
    assert abs(c["c3"] - (c["c0"] * c["c1"] * c["lam0"] * c["chi_l2"]) ** 2 / 16.0) < 1e-15


def test_certified_run_rejects_mu_override():
    with pytest.raises(ValueError, match="pinned"):
        certified_radial_run(GapRunConfig(deltas=(0.3,), mu=0.1))
    with pytest.raises(ValueError, match="curved"):
        certified_radial_run(GapRunConfig(deltas=(0.3,), target="flat_line",
                                      negative_control=True))


def test_scaling_suite_slopes():
    rep = scaling_suite()  # default grid resolves the sharpest bump in the sweep
    for s, fit in rep["slopes"].items():
        assert fit["error"] < 0.05
    assert rep["sup_constant_spread"] < 0.15
    for row in rep["rows"]:
        assert row["energy_drift"] < 1e-12


def test_worker_count_invariance(sphere_report):
    # same report regardless of parallelism degree
    rep2 = gap_run(GapRunConfig(deltas=(0.3, 0.1), jobs=2))
    for a, b in zip(sphere_report.rows, rep2.rows):
        assert abs(a["gap"] - b["gap"]) <= 1e-14 * max(1.0, a["gap"])
        assert abs(a["data_distance"] - b["data_distance"]) <= 1e-14
        assert a["t_j"] == b["t_j"]


def test_product_ratios_degenerate_pair():
    g = TorusGrid(2, 16.0, 128)
    f = bump_family(g, 31, 1)[0]
    zero = ScalarField(g, np.zeros(g.shape))
    assert product_ratios(f, zero, 0.5, 0.75) is None
    r = product_ratios(f, f, 0.5, 0.75)
    assert r is not None and np.isfinite(r["multest"]) and np.isfinite(r["multest2"])


def test_appendix_suite_smoke():
    rep = appendix_ratio_suite(seed=3, grid=TorusGrid(2, 16.0, 128), n_pairs=8,
                               refine_check=True)
    assert np.isfinite(rep["multest_max"]) and rep["multest_max"] > 0
    assert np.isfinite(rep["multest2_max"])
    # feasibility region nonempty: finite c' for every probed c
    assert all(np.isfinite(v) for v in rep["below2_cprime_by_c"].values())
    assert rep["drift"]["multest"] < 0.5  # coarse smoke bound; tight in acceptance
    for level, val in rep["moser_max_by_level"].items():
        assert np.isfinite(val) and val > 0
