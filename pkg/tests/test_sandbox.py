import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssdlbox.dissimilarity import dissimilarity
from ssdlbox.errors import DataError
from ssdlbox.features import SubsampleSpec
from ssdlbox.rng import Stream
from ssdlbox.sandbox import (
    SandboxConfig,
    build_run,
    check_reference_grid,
    gen_gaussian_noise,
    gen_salt_pepper,
    gen_synthetic_clusters,
    ood_row_count,
    split_other_half,
)


def make_sources(seed=0, per_class=80, num_classes=5, dim=4, ood_rows=300):
    iod = gen_synthetic_clusters(num_classes, per_class, dim, 1.5, 0.0, seed)
    ood = gen_synthetic_clusters(num_classes, ood_rows // num_classes, dim, 1.5, 4.0, seed + 1).features
    return iod, ood


# --- class split -------------------------------------------------------------


def test_split_ten_classes():
    iod, ood = split_other_half(list(range(10)), seed=1)
    assert len(iod) == len(ood) == 5
    assert set(iod) | set(ood) == set(range(10))
    assert not set(iod) & set(ood)


def test_split_two_classes():
    iod, ood = split_other_half(["a", "b"], seed=9)
    assert len(iod) == len(ood) == 1


def test_split_deterministic():
    assert split_other_half(list(range(8)), 4) == split_other_half(list(range(8)), 4)


def test_split_odd_errors():
    with pytest.raises(DataError):
        split_other_half([1, 2, 3], 0)


# --- run building ------------------------------------------------------------


def test_pct_zero_all_iod():
    iod, _ = make_sources()
    cfg = SandboxConfig("blobs", "Dif", "-", 0, n_l=20, n_u=50, num_classes=5, seed=3, runs=2, n_test=40)
    run = build_run(cfg, 0, iod, None)
    assert run.unlabelled.n == 50
    assert run.unlabelled_ood_idx.size == 0
    assert run.unlabelled_iod_idx.size == 50


def test_pct_hundred_exact_count():
    iod, ood = make_sources(ood_rows=1000)
    cfg = SandboxConfig("blobs", "Dif", "shift", 100, n_l=20, n_u=200, num_classes=5, seed=3, runs=2, n_test=40)
    run = build_run(cfg, 0, iod, ood)
    assert run.unlabelled_ood_idx.size == 200
    assert run.unlabelled_iod_idx.size == 0


def test_pct_fifty_rounding_rule():
    assert ood_row_count(1001, 50) in (500, 501)
    assert abs(ood_row_count(1001, 50) - 500.5) <= 0.5
    assert ood_row_count(1000, 50) == 500
    assert ood_row_count(3, 50) == 2  # half rounds up


def test_partitions_disjoint_and_balanced():
    iod, ood = make_sources()
    cfg = SandboxConfig("blobs", "Dif", "shift", 50, n_l=23, n_u=60, num_classes=5, seed=7, runs=3, n_test=50)
    run = build_run(cfg, 1, iod, ood)
    lab = set(run.labelled_idx.tolist())
    unl = set(run.unlabelled_iod_idx.tolist())
    tst = set(run.test_idx.tolist())
    assert not lab & unl and not lab & tst and not unl & tst
    counts = np.bincount(run.labelled.labels, minlength=5)
    assert counts.sum() == 23
    assert counts.max() - counts.min() <= 1


def test_rebuild_bit_identical():
    iod, ood = make_sources()
    cfg = SandboxConfig("blobs", "Dif", "shift", 50, n_l=20, n_u=60, num_classes=5, seed=11, runs=2, n_test=30)
    a = build_run(cfg, 0, iod, ood)
    b = build_run(cfg, 0, iod, ood)
    assert np.array_equal(a.labelled.features.data, b.labelled.features.data)
    assert np.array_equal(a.unlabelled.data, b.unlabelled.data)
    assert np.array_equal(a.test.features.data, b.test.features.data)
    assert np.array_equal(a.labelled_idx, b.labelled_idx)


def test_runs_differ():
    iod, ood = make_sources()
    cfg = SandboxConfig("blobs", "Dif", "shift", 0, n_l=20, n_u=60, num_classes=5, seed=11, runs=2, n_test=30)
    a = build_run(cfg, 0, iod, None)
    b = build_run(cfg, 1, iod, None)
    assert set(a.labelled_idx.tolist()) != set(b.labelled_idx.tolist())


def test_standardization_is_subset_local():
    iod, ood = make_sources()
    cfg = SandboxConfig("blobs", "Dif", "shift", 50, n_l=25, n_u=80, num_classes=5, seed=2, runs=1, n_test=30)
    run = build_run(cfg, 0, iod, ood)
    assert np.all(np.abs(run.labelled.features.data.mean(axis=0)) < 1e-3)
    mean_l, std_l = run.stats_l
    raw_lab = iod.features.data[run.labelled_idx].astype(np.float64)
    assert np.allclose(mean_l, raw_lab.mean(axis=0))
    # Every part is mapped with the labelled statistics.
    raw_test = iod.features.data[run.test_idx].astype(np.float64)
    expect = (raw_test - mean_l) / np.where(std_l == 0, 1, std_l)
    assert np.allclose(run.test.features.data, expect.astype(np.float32), atol=1e-6)
    # The unlabelled pool's own statistics are measured, not applied.
    mean_u, _ = run.stats_u
    assert not np.allclose(mean_u, mean_l, atol=1e-6)
    assert np.any(np.abs(run.unlabelled.data.mean(axis=0)) > 0.05)


def test_insufficient_rows_named():
    iod, _ = make_sources(per_class=5)
    cfg = SandboxConfig("blobs", "Dif", "-", 0, n_l=30, n_u=5, num_classes=5, seed=0, runs=1, n_test=5)
    with pytest.raises(DataError, match="class"):
        build_run(cfg, 0, iod, None)


def test_missing_ood_source_errors():
    iod, _ = make_sources()
    cfg = SandboxConfig("blobs", "Dif", "shift", 100, n_l=10, n_u=20, num_classes=5, seed=0, runs=1, n_test=10)
    with pytest.raises(DataError, match="OOD"):
        build_run(cfg, 0, iod, None)


def test_config_validation():
    with pytest.raises(DataError):
        SandboxConfig("a", "Dif", "b", 30, n_l=10)
    with pytest.raises(DataError):
        SandboxConfig("a", "XX", "b", 0, n_l=10)
    cfg = SandboxConfig("a", "OH", "b", 0, n_l=60)
    check_reference_grid(cfg)
    with pytest.raises(DataError):
        check_reference_grid(SandboxConfig("a", "OH", "b", 0, n_l=61))


@given(
    st.integers(0, 2**32),
    st.sampled_from([0, 50, 100]),
    st.integers(10, 40),
    st.integers(30, 90),
)
@settings(max_examples=40, deadline=None)
def test_run_contracts_random_configs(seed, pct, n_l, n_u):
    iod, ood = make_sources(seed=seed % 1000)
    cfg = SandboxConfig("blobs", "Dif", "shift", pct, n_l=n_l, n_u=n_u, num_classes=5, seed=seed, runs=1, n_test=30)
    run = build_run(cfg, 0, iod, ood)
    target = n_u * pct / 100
    assert abs(run.unlabelled_ood_idx.size - target) <= 1
    assert run.unlabelled.n == n_u
    lab = set(run.labelled_idx.tolist())
    assert not lab & set(run.unlabelled_iod_idx.tolist())
    assert not lab & set(run.test_idx.tolist())
    counts = np.bincount(run.labelled.labels, minlength=5)
    assert counts.max() - counts.min() <= 1


# --- noise generators ---------------------------------------------------------


def test_gaussian_noise_moments():
    # Reconstruct the pre-clip draws through the documented stream and check
    # the stated mean/variance; clipping never engages at sigma ~ 3.16.
    n, shape = 100, (100, 100)
    imgs = gen_gaussian_noise(n, shape, seed=5)
    z = Stream(5).child("gaussian-noise").normals(n * 100 * 100)
    pre_clip = 128.0 + np.sqrt(10.0) * z
    assert abs(z.mean()) < 0.01
    assert abs((np.sqrt(10.0) * z).var() - 10.0) < 0.1
    assert np.array_equal(imgs.ravel(), pre_clip.astype(np.float32).clip(0, 255))
    assert abs(imgs.mean() - 128.0) < 0.05


def test_gaussian_noise_deterministic():
    a = gen_gaussian_noise(3, (8, 8), 42)
    b = gen_gaussian_noise(3, (8, 8), 42)
    assert np.array_equal(a, b)


def test_salt_pepper_values_and_rate():
    imgs = gen_salt_pepper(100, (100, 100), seed=9)
    assert set(np.unique(imgs).tolist()) == {0.0, 255.0}
    frac = (imgs == 255.0).mean()
    assert abs(frac - 0.5) < 0.002


def test_salt_pepper_deterministic():
    assert np.array_equal(gen_salt_pepper(2, (4, 4), 1), gen_salt_pepper(2, (4, 4), 1))


# --- synthetic clusters --------------------------------------------------------


def test_clusters_same_seed_identical():
    a = gen_synthetic_clusters(3, 10, 4, 1.0, 0.0, 7)
    b = gen_synthetic_clusters(3, 10, 4, 1.0, 0.0, 7)
    assert np.array_equal(a.features.data, b.features.data)
    assert np.array_equal(a.labels, b.labels)


def test_clusters_shapes():
    s = gen_synthetic_clusters(5, 10, 3, 1.0, 0.0, 0)
    assert s.features.n == 50 and s.features.d == 3
    assert np.bincount(s.labels).tolist() == [10] * 5


def test_clusters_shift_increases_distance():
    base = gen_synthetic_clusters(4, 100, 4, 1.0, 0.0, 3).features
    same = gen_synthetic_clusters(4, 100, 4, 1.0, 0.0, 17).features
    far = gen_synthetic_clusters(4, 100, 4, 1.0, 5.0, 3).features
    spec = SubsampleSpec(tau=50, draws=8, seed=5)
    d_same = dissimilarity(base, same, spec, "COS", bins=16).mean
    d_far = dissimilarity(base, far, spec, "COS", bins=16).mean
    assert d_far > d_same


def test_clusters_validation():
    with pytest.raises(DataError):
        gen_synthetic_clusters(1, 10, 2, 1.0, 0.0, 0)
