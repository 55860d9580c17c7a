import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssdlbox.rng import Stream, _fold, _mix64


def reference_xoshiro(state, count):
    """Independent straight-line transcription of the generator step."""
    mask = (1 << 64) - 1
    s = list(state)
    out = []
    for _ in range(count):
        x = (s[1] * 5) & mask
        r = ((x << 7) | (x >> 57)) & mask
        out.append((r * 9) & mask)
        t = (s[1] << 17) & mask
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = ((s[3] << 45) | (s[3] >> 19)) & mask
    return out


def test_step_matches_published_vector():
    s = Stream(0)
    s._s0, s._s1, s._s2, s._s3 = 1, 2, 3, 4
    got = [s.next_u64() for _ in range(3)]
    assert got == [11520, 0, 1509978240]


def test_step_matches_reference_transcription():
    s = Stream(123456789)
    state = (s._s0, s._s1, s._s2, s._s3)
    assert [s.next_u64() for _ in range(64)] == reference_xoshiro(state, 64)


def test_same_seed_same_stream():
    a = [Stream(7).next_u64() for _ in range(10)]
    b = [Stream(7).next_u64() for _ in range(10)]
    assert a == b


def test_children_are_order_free_and_distinct():
    root = Stream(3)
    c1 = root.child("draw", 0)
    _ = root.next_u64()  # consuming the parent must not move children
    c2 = Stream(3).child("draw", 0)
    assert [c1.next_u64() for _ in range(4)] == [c2.next_u64() for _ in range(4)]
    assert Stream(3).child("draw", 0).next_u64() != Stream(3).child("draw", 1).next_u64()
    assert Stream(3).child("a", "b").next_u64() != Stream(3).child("ab").next_u64()


def test_fold_rejects_bools_and_floats():
    with pytest.raises(TypeError):
        _fold(1.5)
    with pytest.raises(TypeError):
        _fold(True)


def test_mix64_is_not_identity():
    assert _mix64(0) != 0 or _mix64(1) != 1


@given(st.integers(min_value=0, max_value=2**64 - 1), st.integers(min_value=1, max_value=1000))
@settings(max_examples=50)
def test_below_is_in_range(seed, bound):
    s = Stream(seed)
    assert all(0 <= s.below(bound) < bound for _ in range(20))


def test_uniforms_in_unit_interval():
    u = Stream(11).uniforms(10000)
    assert u.min() >= 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 0.02


def test_uniform_scalar_matches_vector():
    assert Stream(5).uniform() == Stream(5).uniforms(1)[0]


def test_permutation_is_a_permutation():
    for n in (1, 2, 17):
        p = Stream(9).child(n).permutation(n)
        assert sorted(p) == list(range(n))


def test_sample_without_replacement_prefix_of_permutation():
    a = Stream(21).sample_without_replacement(50, 8)
    b = Stream(21).permutation(50)[:8]
    assert list(a) == list(b)


def test_sample_without_replacement_distinct():
    idx = Stream(2).sample_without_replacement(100, 100)
    assert len(set(idx.tolist())) == 100


def test_sample_bad_args():
    with pytest.raises(ValueError):
        Stream(0).sample_without_replacement(3, 4)


def test_normals_moments_and_pairing():
    z = Stream(13).normals(200001)  # odd count exercises the discard rule
    assert abs(z.mean()) < 0.01
    assert abs(z.std() - 1.0) < 0.01
    assert Stream(13).normal() == Stream(13).normals(2)[0]


def test_gamma_moments():
    s = Stream(17)
    for shape in (0.75, 1.0, 2.5):
        draws = np.fromiter((s.gamma(shape) for _ in range(20000)), dtype=float)
        assert abs(draws.mean() - shape) < 0.05 * max(1.0, shape)
        assert abs(draws.var() - shape) < 0.12 * max(1.0, shape)


def test_beta_range_and_symmetry():
    draws = Stream(19).betas(0.75, 0.75, 20000)
    assert draws.min() > 0.0 and draws.max() < 1.0
    assert abs(draws.mean() - 0.5) < 0.01


def test_gamma_rejects_bad_shape():
    with pytest.raises(ValueError):
        Stream(0).gamma(0.0)
