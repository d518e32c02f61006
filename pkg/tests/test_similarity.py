import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import _oracles as oracle
from lqpat import DimensionError, FeatureVector, chi_square, classify_1nn, rank_gallery
from lqpat.similarity import distance_matrix

# multiples of 1/8 keep (x - y)**2 clear of underflow
bins = st.integers(0, 8000).map(lambda v: v / 8)
vectors = st.integers(1, 40).flatmap(
    lambda n: st.tuples(*[arrays(np.float64, n, elements=bins) for _ in range(2)]))


def test_chi_square_hand_values():
    assert oracle.chi2([1, 0], [0, 1]) == 1
    assert oracle.chi2([2, 0, 1], [0, 2, 1]) == 2
    assert chi_square([1, 0], [0, 1]) == pytest.approx(1, abs=1e-12)
    assert chi_square([2, 0, 1], [0, 2, 1]) == pytest.approx(2, abs=1e-12)
    assert chi_square([3, 0, 7], [3, 0, 7]) == 0


def test_chi_square_zero_bins():
    assert chi_square(np.zeros(4), np.zeros(4)) == 0


def test_chi_square_length_mismatch():
    with pytest.raises(DimensionError):
        chi_square([1, 2], [1, 2, 3])


def test_chi_square_accepts_feature_vectors():
    assert chi_square(FeatureVector([1, 0]), FeatureVector([0, 1])) == pytest.approx(1)


@settings(max_examples=200)
@given(vectors)
def test_chi_square_axioms(xy):
    x, y = xy
    d = chi_square(x, y)
    assert d >= 0
    assert d == chi_square(y, x)
    assert chi_square(x, x) == 0
    assert d == pytest.approx(oracle.chi2(x.tolist(), y.tolist()), rel=1e-9, abs=1e-9)
    if not np.array_equal(x, y):
        assert d > 0


@given(vectors, st.floats(0.01, 100))
def test_chi_square_scaling(xy, c):
    x, y = xy
    assert chi_square(c * x, c * y) == pytest.approx(c * chi_square(x, y), rel=1e-9, abs=1e-9)


def hand_gallery():
    # probe (1,0,0); distances 2, 0.5, 1 by disjoint/overlapping supports
    probe = [1, 0, 0]
    gallery = [("g1", [0, 3, 0]), ("g2", [1, 1, 0]), ("g3", [0, 1, 0])]
    return probe, gallery


def test_rank_gallery_hand_order():
    probe, gallery = hand_gallery()
    assert [oracle.chi2(probe, g) for _, g in gallery] == [2, 0.5, 1]
    ranked = rank_gallery(probe, gallery, query_id="q")
    assert ranked.ids == ("g2", "g3", "g1")
    assert ranked.distances.tolist() == [0.5, 1, 2]
    assert [r for _, _, r in ranked] == [1, 2, 3]


def test_rank_gallery_self_and_single():
    ranked = rank_gallery([1, 2, 3], [("a", [3, 2, 1]), ("self", [1, 2, 3])])
    assert ranked.ids[0] == "self" and ranked.distances[0] == 0
    ranked = rank_gallery([1, 2, 3], [("only", [9, 9, 9])])
    assert list(ranked) == [("only", pytest.approx(chi_square([1, 2, 3], [9, 9, 9])), 1)]


def test_rank_gallery_empty():
    with pytest.raises(ValueError):
        rank_gallery([1], [])
    with pytest.raises(ValueError):
        classify_1nn([1], [])


def test_rank_gallery_stable_ties():
    g = [("a", [0, 1]), ("b", [1, 0]), ("c", [0, 1])]
    ranked = rank_gallery([1, 1], g)
    assert ranked.ids == ("a", "b", "c")


def test_classify_1nn():
    g = [("x", "c1", [5, 0]), ("y", "c2", [0, 5])]
    assert classify_1nn([0, 5], g) == "c2"
    assert classify_1nn([1, 1], [("z", "only", [9, 9])]) == "only"
    # equal distance goes to the earlier entry
    assert classify_1nn([1, 1], g) == "c1"


def test_classify_invariant_to_uniform_scaling(rng):
    gallery = [(k, f"c{k % 3}", rng.random(8)) for k in range(12)]
    probe = rng.random(8)
    scaled = [(i, l, v * 7.5) for i, l, v in gallery]
    assert classify_1nn(probe, gallery) == classify_1nn(probe * 7.5, scaled)


def test_shuffle_unshuffle_determinism(rng):
    vecs = rng.integers(0, 3, size=(15, 4)).astype(float)
    gallery = [(k, v) for k, v in enumerate(vecs)]
    first = rank_gallery(vecs[0], gallery)
    perm = rng.permutation(15)
    shuffled = rank_gallery(vecs[0], [gallery[p] for p in perm])
    assert sorted(zip(first.distances, first.ids)) == sorted(zip(shuffled.distances, shuffled.ids))
    assert rank_gallery(vecs[0], gallery) == first
    # among equal distances, the shuffled input order is kept
    position = {gid: k for k, gid in enumerate(p for p in perm)}
    for (d1, a), (d2, b) in zip(zip(shuffled.distances, shuffled.ids),
                                zip(shuffled.distances[1:], shuffled.ids[1:])):
        if d1 == d2:
            assert position[a] < position[b]


def test_distance_matrix_thread_invariance(rng):
    feats = rng.random((30, 64))
    a = distance_matrix(feats, workers=1)
    b = distance_matrix(feats, workers=4)
    assert a.tobytes() == b.tobytes()
    assert a[3, 7] == chi_square(feats[3], feats[7])
