import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssdlbox.analysis import (
    aggregate,
    correlate,
    density_csv,
    feature_density_export,
    report_csv,
    report_matrix,
    report_text,
)
from ssdlbox.dissimilarity import DissimilarityReport
from ssdlbox.errors import DataError
from ssdlbox.features import FeatureMatrix
from ssdlbox.rng import Stream
from ssdlbox.sandbox import SandboxConfig


def cfg(**kw):
    base = dict(s_iod="a", t_ood="Dif", s_uood="b", pct_uood=0, n_l=60)
    base.update(kw)
    return SandboxConfig(**base)


def report(mean, p=0.01):
    return DissimilarityReport("COS", mean, 0.1, (mean,), p, 10, 1)


# --- aggregation ---------------------------------------------------------------


def test_aggregate_single():
    agg = aggregate([0.5], cfg())
    assert agg.mean == 0.5 and agg.variance == 0.0


def test_aggregate_pair():
    agg = aggregate([0.0, 1.0], cfg())
    assert agg.mean == 0.5 and agg.variance == 0.25


def test_aggregate_matches_recompute():
    vals = Stream(3).uniforms(10).tolist()
    agg = aggregate(vals, cfg())
    mean = sum(vals) / len(vals)
    var = sum((v - mean) ** 2 for v in vals) / len(vals)
    assert agg.mean == pytest.approx(mean, abs=1e-12)
    assert agg.variance == pytest.approx(var, abs=1e-12)
    assert len(agg.accuracies) == 10


def test_aggregate_empty_errors():
    with pytest.raises(DataError):
        aggregate([], cfg())


# --- correlation -----------------------------------------------------------------


def test_pearson_exact_line():
    pairs = [(x, 3.0 - 2.0 * x) for x in (0.0, 1.0, 2.0, 5.0)]
    assert correlate(pairs, "pearson") == pytest.approx(-1.0, abs=1e-12)


def test_spearman_reversed_ranks():
    pairs = [(1, 9), (2, 7), (3, 5), (4, 3)]
    assert correlate(pairs, "spearman") == pytest.approx(-1.0, abs=1e-12)


def test_pearson_matches_direct_formula():
    s = Stream(5)
    xs = s.uniforms(8)
    ys = s.uniforms(8)
    got = correlate(list(zip(xs, ys)), "pearson")
    expect = float(((xs - xs.mean()) * (ys - ys.mean())).mean() / (xs.std() * ys.std()))
    assert got == pytest.approx(expect, abs=1e-12)


def test_correlate_errors():
    with pytest.raises(DataError):
        correlate([(1, 2), (2, 3)], "pearson")
    with pytest.raises(DataError):
        correlate([(1.0, 2.0), (1.0, 3.0), (1.0, 4.0)], "pearson")
    with pytest.raises(DataError):
        correlate([(1, 2), (2, 3), (3, 4)], "kendall")


@given(
    st.lists(
        st.tuples(st.integers(-100, 100), st.integers(-100, 100)), min_size=3, max_size=12
    ),
    st.floats(0.1, 5.0),
    st.floats(-10, 10),
)
@settings(max_examples=60)
def test_pearson_affine_invariance(pairs, scale, offset):
    xs = [p[0] for p in pairs]
    ys = [p[1] for p in pairs]
    if len(set(xs)) < 2 or len(set(ys)) < 2:
        return
    base = correlate(pairs, "pearson")
    moved = correlate([(x * scale + offset, y) for x, y in pairs], "pearson")
    flipped = correlate([(-x * scale, y) for x, y in pairs], "pearson")
    assert moved == pytest.approx(base, abs=1e-9)
    assert flipped == pytest.approx(-base, abs=1e-9)


@given(
    st.lists(st.tuples(st.integers(-50, 50), st.integers(-50, 50)), min_size=3, max_size=12)
)
@settings(max_examples=60)
def test_spearman_monotone_invariance(pairs):
    xs = [p[0] for p in pairs]
    ys = [p[1] for p in pairs]
    if len(set(xs)) < 2 or len(set(ys)) < 2:
        return
    base = correlate(pairs, "spearman")
    warped = correlate([(np.exp(x / 50.0), y) for x, y in pairs], "spearman")
    assert warped == pytest.approx(base, abs=1e-9)


# --- density export ----------------------------------------------------------------


def test_density_identical_sets():
    m = FeatureMatrix(Stream(7).normals(60).reshape(20, 3))
    ha, hb, rows = feature_density_export(m, m, 1, bins=8)
    assert np.array_equal(ha.mass, hb.mass)
    assert len(rows) == 8


def test_density_index_out_of_range():
    m = FeatureMatrix(np.ones((4, 3), dtype=np.float32))
    with pytest.raises(DataError):
        feature_density_export(m, m, 3, bins=4)


def test_density_shifted_modes():
    s = Stream(8)
    a = FeatureMatrix(s.normals(80000).reshape(20000, 4) * 0.2)
    b = FeatureMatrix(s.normals(80000).reshape(20000, 4) * 0.2 + 3.0)
    ha, hb, _ = feature_density_export(a, b, 2, bins=30)
    centers = 0.5 * (ha.edges[:-1] + ha.edges[1:])
    mode_gap = centers[hb.mass.argmax()] - centers[ha.mass.argmax()]
    bin_width = ha.edges[1] - ha.edges[0]
    assert abs(mode_gap - 3.0) <= bin_width


def test_density_csv_headers():
    m = FeatureMatrix(np.arange(8, dtype=np.float32).reshape(4, 2))
    _, _, rows = feature_density_export(m, m, 0, bins=2)
    text = density_csv(rows)
    assert text.startswith("bin_lo,bin_hi,mass_a,mass_b\n")
    assert len(text.strip().split("\n")) == 3


# --- combined report -----------------------------------------------------------------


def acc_cell(s_uood, pct, n_l, mode, mean):
    return {
        "s_iod": "blobs",
        "s_uood": s_uood,
        "pct_uood": pct,
        "n_l": n_l,
        "mode": mode,
        "acc_mean": mean,
        "acc_var": 0.01,
    }


def dist_cell(s_uood, pct, cos_mean, p=0.01):
    return {
        "s_iod": "blobs",
        "s_uood": s_uood,
        "pct_uood": pct,
        "reports": {
            "L1": report(cos_mean, p),
            "L2": report(cos_mean, p),
            "JS": report(cos_mean, p),
            "COS": report(cos_mean, p),
        },
    }


def test_single_cell_table():
    rows = report_matrix([acc_cell("x", 50, 60, "ssdl", 0.7)], [dist_cell("x", 50, 1.0)])
    assert len(rows) == 1
    assert rows[0]["cos_rank"] == 1


def test_ranks_are_permutation():
    cells = [acc_cell(f"c{i}", 50, 60, "ssdl", 0.7 - 0.1 * i) for i in range(3)]
    dists = [dist_cell(f"c{i}", 50, float(3 - i)) for i in range(3)]
    rows = report_matrix(cells, dists)
    assert sorted(r["cos_rank"] for r in rows) == [1, 2, 3]


def test_rank_order_follows_distance():
    cells = [acc_cell(f"s{s}", 100, 60, "ssdl", 0.9 - s / 10) for s in (1, 2, 3)]
    dists = [dist_cell(f"s{s}", 100, float(s)) for s in (1, 2, 3)]
    rows = report_matrix(cells, dists)
    by_name = {r["s_uood"]: r["cos_rank"] for r in rows}
    assert by_name == {"s1": 1, "s2": 2, "s3": 3}


def test_missing_cells_listed():
    with pytest.raises(DataError, match="missing"):
        report_matrix([acc_cell("x", 50, 60, "ssdl", 0.7)], [])


def test_supervised_rows_carry_no_distance():
    rows = report_matrix([acc_cell("-", 0, 60, "supervised", 0.5)], [])
    assert "cos_mean" not in rows[0]


def test_report_csv_and_text_render():
    cells = [
        acc_cell("-", 0, 60, "supervised", 0.5),
        acc_cell("x", 50, 60, "ssdl", 0.7),
    ]
    rows = report_matrix(cells, [dist_cell("x", 50, 1.0, p=0.5)])
    csv_text = report_csv(rows)
    assert csv_text.splitlines()[0].startswith("s_iod,")
    assert len(csv_text.strip().splitlines()) == 3
    table = report_text(rows)
    assert "*" in table  # p > 0.05 marker
