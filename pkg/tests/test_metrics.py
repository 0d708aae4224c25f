import itertools
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vscc.data_model import Partition
from vscc.errors import LengthMismatch
from vscc.metrics import adjusted_rand_index, contingency_table, rand_index


def pair_oracle(a, b):
    """Rand and adjusted Rand by enumerating every pair of observations."""
    n = len(a)
    agree = both = same_a = same_b = 0
    for i, j in itertools.combinations(range(n), 2):
        sa, sb = a[i] == a[j], b[i] == b[j]
        agree += sa == sb
        both += sa and sb
        same_a += sa
        same_b += sb
    total = comb(n, 2)
    expected = same_a * same_b / total
    mx = (same_a + same_b) / 2
    if mx == expected:
        ari = 1.0 if both == mx else 0.0
    else:
        ari = (both - expected) / (mx - expected)
    return agree / total, ari


def test_pair_oracle_equivalence():
    rng = np.random.default_rng(5)
    for _ in range(300):
        n = int(rng.integers(2, 51))
        a = rng.integers(1, int(rng.integers(1, 6)) + 1, n)
        b = rng.integers(1, int(rng.integers(1, 6)) + 1, n)
        if rng.random() < 0.2:
            b = a.copy()
        ri, ari = pair_oracle(a.tolist(), b.tolist())
        assert rand_index(a, b) == pytest.approx(ri, abs=1e-12)
        assert adjusted_rand_index(a, b) == pytest.approx(ari, abs=1e-12)


def test_hand_example():
    # pairs: (12) split/split disagree ... only the two "both apart" pairs agree
    assert rand_index([1, 1, 2, 2], [1, 2, 1, 2]) == pytest.approx(1 / 3)
    assert adjusted_rand_index([1, 1, 2, 2], [1, 2, 1, 2]) == pytest.approx(-0.5)


def test_identical_and_relabelled():
    a = np.array([1, 1, 2, 2, 3, 3, 3])
    assert adjusted_rand_index(a, a) == 1.0
    assert adjusted_rand_index(a, 4 - a) == pytest.approx(1.0)
    assert rand_index(Partition(a, 3), Partition(4 - a, 3)) == 1.0


def test_degenerate_single_groups():
    assert adjusted_rand_index([1, 1, 1], [2, 2, 2]) == 1.0
    # all singletons vs all singletons: identical structure
    assert adjusted_rand_index([1, 2, 3], [3, 1, 2]) == 1.0
    assert adjusted_rand_index([1, 1, 1], [1, 2, 3]) == 0.0


def test_random_labels_near_zero():
    rng = np.random.default_rng(0)
    vals = [adjusted_rand_index(rng.integers(1, 4, 200), rng.integers(1, 4, 200)) for _ in range(200)]
    assert abs(np.mean(vals)) < 0.02


def test_matches_sklearn():
    sk = pytest.importorskip("sklearn.metrics")
    rng = np.random.default_rng(9)
    for _ in range(50):
        a, b = rng.integers(0, 5, 120), rng.integers(0, 3, 120)
        assert adjusted_rand_index(a, b) == pytest.approx(sk.adjusted_rand_score(a, b), abs=1e-12)
        assert rand_index(a, b) == pytest.approx(sk.rand_score(a, b), abs=1e-12)


def test_contingency_table():
    t = contingency_table([1, 1, 2], ["x", "y", "y"])
    assert t.counts.tolist() == [[1, 1], [0, 1]]
    assert t.n == 3 and t.rows.tolist() == [2, 1] and t.cols.tolist() == [1, 2]


def test_errors():
    with pytest.raises(LengthMismatch):
        adjusted_rand_index([1, 2], [1, 2, 3])
    with pytest.raises(LengthMismatch):
        rand_index([1], [1])


labels = st.lists(st.integers(1, 4), min_size=2, max_size=40)


@settings(max_examples=200, deadline=None)
@given(labels, st.data())
def test_symmetry_and_bounds(a, data):
    b = data.draw(st.lists(st.integers(1, 4), min_size=len(a), max_size=len(a)))
    assert adjusted_rand_index(a, b) == pytest.approx(adjusted_rand_index(b, a), abs=1e-12)
    assert 0.0 <= rand_index(a, b) <= 1.0
    assert adjusted_rand_index(a, b) <= 1.0 + 1e-12
