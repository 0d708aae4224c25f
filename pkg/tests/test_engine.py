import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vscc.data_model import Dataset, Partition, Relationship, SoftAssignment
from vscc.engine import (
    WithinGroupVariances,
    select_all,
    select_variables,
    threshold,
    within_group_variances,
)
from vscc.errors import DimensionMismatch, EmptyGroupError
from vscc.preprocess import CorrelationMatrix, correlation_matrix, standardize


# -- oracles -----------------------------------------------------------------------


def naive_w(x, z):
    """Double loop straight from the definition: sum_g sum_i z_ig (x_ij - mu_gj)^2 / n."""
    n, p = len(x), len(x[0])
    G = len(z[0])
    out = []
    for j in range(p):
        total = 0.0
        for g in range(G):
            mass = sum(z[i][g] for i in range(n))
            mu = sum(z[i][g] * x[i][j] for i in range(n)) / mass
            for i in range(n):
                total += z[i][g] * (x[i][j] - mu) ** 2
        out.append(total / n)
    return out


def replay_oracle(w, rho, m):
    """Exhaustive characterisation of the stepwise rule.

    Enumerate every subset and keep those S for which: the first variable in
    visiting order is in S, and every later variable k is in S exactly when
    |rho_kr| < 1 - w_k^m for every r in S visited before k.  The rule has a
    unique fixed point, which is returned.
    """
    p = len(w)
    order = sorted(range(p), key=lambda j: (w[j], j))
    pos = {v: i for i, v in enumerate(order)}
    found = []
    for size in range(1, p + 1):
        for s in itertools.combinations(range(p), size):
            s = set(s)
            if order[0] not in s:
                continue
            ok = True
            for k in order[1:]:
                earlier = [r for r in s if pos[r] < pos[k]]
                passes = all(abs(rho[k][r]) < 1 - w[k] ** m for r in earlier)
                if passes != (k in s):
                    ok = False
                    break
            if ok:
                found.append(s)
    assert len(found) == 1
    return found[0]


def random_instance(rng, p):
    w = rng.uniform(0, 1, p)
    if rng.random() < 0.3:  # force ties
        w[rng.integers(p)] = w[0]
    a = rng.standard_normal((p + 3, p))
    c = np.atleast_2d(np.corrcoef(a, rowvar=False))
    return w, c


# -- within-group variances --------------------------------------------------------


def test_w_matches_naive_oracle_1000_instances():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        n = int(rng.integers(4, 12))
        p = int(rng.integers(1, 5))
        G = int(rng.integers(1, 4))
        x = rng.standard_normal((n, p))
        if rng.random() < 0.5:
            labels = np.concatenate([np.arange(1, G + 1), rng.integers(1, G + 1, n - G)])
            z = Partition(labels, G)
            zz = z.to_soft().probs
        else:
            zz = rng.dirichlet(np.ones(G), size=n)
            z = SoftAssignment(zz)
        got = within_group_variances(Dataset(x, [f"v{j}" for j in range(p)]), z).w
        np.testing.assert_allclose(got, naive_w(x.tolist(), zz.tolist()), rtol=0, atol=1e-12)


def test_w_zero_when_groups_are_points():
    x = np.array([[1.0, 2.0], [1.0, 2.0], [-1.0, 0.5], [-1.0, 0.5]])
    w = within_group_variances(Dataset(x, ["a", "b"]), Partition([1, 1, 2, 2], 2))
    assert np.all(w.w == 0)


def test_w_single_group_is_total_variance_over_n(rng):
    ds = standardize(Dataset(rng.standard_normal((30, 3)), ["a", "b", "c"]))
    w = within_group_variances(ds, Partition(np.ones(30, int), 1))
    np.testing.assert_allclose(w.w, 29 / 30, atol=1e-12)


def test_w_hard_equals_soft_embedding(rng):
    ds = Dataset(rng.standard_normal((20, 4)), list("abcd"))
    part = Partition(np.tile([1, 2, 3, 4], 5), 4)
    hard = within_group_variances(ds, part)
    soft = within_group_variances(ds, part.to_soft())
    assert np.array_equal(hard.w, soft.w)
    assert (hard.source, soft.source) == ("hard", "soft")


def test_w_bounded_by_total_variance(rng):
    ds = standardize(Dataset(rng.standard_normal((40, 5)), list("abcde")))
    part = Partition(rng.integers(1, 4, 40), 3)
    w = within_group_variances(ds, part).w
    assert np.all(w >= 0) and np.all(w <= 39 / 40 + 1e-9)


def test_w_errors(rng):
    ds = Dataset(rng.standard_normal((6, 2)), ["a", "b"])
    with pytest.raises(EmptyGroupError):
        within_group_variances(ds, Partition([1, 1, 1, 3, 3, 3], 3))
    with pytest.raises(DimensionMismatch):
        within_group_variances(ds, Partition([1, 2, 1, 2], 2))


# -- threshold and the worked example ----------------------------------------------


def test_threshold_values():
    assert threshold(Relationship.LINEAR, 0.6) == pytest.approx(0.4)
    assert threshold(Relationship.LINEAR, 0.2) == pytest.approx(0.8)
    assert threshold(Relationship.QUINTIC, 1.0) == 0.0
    assert threshold(Relationship.LINEAR, 1.2) < 0
    with pytest.raises(ValueError):
        threshold(Relationship.FULL_SET, 0.5)


def test_linear_rejects_w06_accepts_w02_at_rho075():
    assert not 0.75 < threshold(Relationship.LINEAR, 0.6)
    assert 0.75 < threshold(Relationship.LINEAR, 0.2)


MOTIVATING_W = np.array([0.05, 0.6, 0.2])
MOTIVATING_RHO = np.array([[1.0, 0.75, 0.75], [0.75, 1.0, 0.5], [0.75, 0.5, 1.0]])


def test_motivating_example():
    # variables 1, 2, 3 of the worked example are columns 0, 1, 2
    lin = select_variables(MOTIVATING_W, MOTIVATING_RHO, Relationship.LINEAR)
    quin = select_variables(MOTIVATING_W, MOTIVATING_RHO, Relationship.QUINTIC)
    assert lin.indices == (0, 2)
    assert quin.indices == (0, 2, 1)
    assert 1 - 0.6**5 == pytest.approx(0.92224)


def test_boundary_equality_rejects():
    w = np.array([0.0, 0.5])
    rho = np.array([[1.0, 0.5], [0.5, 1.0]])
    assert select_variables(w, rho, Relationship.LINEAR).indices == (0,)


def test_negative_correlation_uses_absolute_value():
    rho = -MOTIVATING_RHO + 2 * np.eye(3)
    assert select_variables(MOTIVATING_W, rho, Relationship.LINEAR).indices == (0, 2)


# -- select_variables / select_all ------------------------------------------------


def test_replay_oracle_1000_instances():
    rng = np.random.default_rng(77)
    for _ in range(1000):
        p = int(rng.integers(1, 7))
        w, rho = random_instance(rng, p)
        m = int(rng.integers(1, 6))
        got = select_variables(w, rho, Relationship(m))
        assert set(got.indices) == replay_oracle(w.tolist(), rho.tolist(), m)
        # insertion order follows ascending W
        assert list(got.indices) == sorted(got.indices, key=lambda j: (w[j], j))


def test_p1_single_subset():
    res = select_all(np.array([0.3]), np.eye(1))
    assert len(res.subsets) == 1
    assert res.subsets[0].indices == (0,)
    assert res.subsets[0].relationship is Relationship.LINEAR
    assert all(s.indices == (0,) for s in res.by_relationship.values())


def test_identity_correlation_selects_everything():
    w = np.array([0.9, 0.1, 0.5, 0.99])
    res = select_all(w, np.eye(4))
    assert len(res.subsets) == 1
    assert set(res.subsets[0].indices) == {0, 1, 2, 3}


def test_dedup_keeps_lowest_order_tag():
    res = select_all(MOTIVATING_W, MOTIVATING_RHO)
    tags = [(s.relationship, s.indices) for s in res.subsets]
    assert tags[0] == (Relationship.LINEAR, (0, 2))
    keys = [frozenset(s.indices) for s in res.subsets]
    assert len(keys) == len(set(keys))
    for rel, sub in res.by_relationship.items():
        tagged = next(s for s in res.subsets if frozenset(s.indices) == frozenset(sub.indices))
        assert tagged.relationship <= rel


def test_stable_ties_by_column_index():
    w = WithinGroupVariances(np.array([0.5, 0.2, 0.2, 0.5]), "hard")
    assert list(w.sorted_order()) == [1, 2, 0, 3]
    rho = np.ones((4, 4))
    assert select_variables(w, rho, Relationship.QUINTIC).indices == (1,)


def test_selection_on_real_pipeline_inputs(rng):
    x = rng.standard_normal((50, 4))
    x[:, 1] = x[:, 0] + 0.1 * rng.standard_normal(50)
    std = standardize(Dataset(x, list("abcd")))
    rho = correlation_matrix(std)
    w = within_group_variances(std, Partition(np.repeat([1, 2], 25), 2))
    res = select_all(w, rho)
    argmin = int(np.argmin(w.w))
    assert all(argmin in s.indices for s in res.subsets)


@st.composite
def instances(draw):
    p = draw(st.integers(1, 6))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    w, rho = random_instance(rng, p)
    return w, rho


@settings(max_examples=200, deadline=None)
@given(instances(), st.integers(1, 5))
def test_acceptance_predicate_monotone_in_order(inst, m):
    w, rho = inst
    order = np.argsort(w, kind="stable")
    chosen = list(order[: max(1, len(order) // 2)])
    for k in order:
        passes = [bool(np.all(np.abs(rho[k, chosen]) < threshold(Relationship(mm), w[k])))
                  for mm in range(1, 6)]
        # once a variable passes at some order it passes at every higher order
        first = passes.index(True) if True in passes else 5
        assert all(passes[first:])


@settings(max_examples=200, deadline=None)
@given(instances(), st.integers(1, 5), st.randoms(use_true_random=False))
def test_permutation_invariance(inst, m, rnd):
    w, rho = inst
    p = w.size
    # distinct W so the permuted problem has no tie-breaking ambiguity
    w = w + np.arange(p) * 1e-9
    perm = list(range(p))
    rnd.shuffle(perm)
    perm = np.array(perm)
    base = select_variables(w, rho, Relationship(m)).indices
    permuted = select_variables(w[perm], rho[np.ix_(perm, perm)], Relationship(m)).indices
    assert tuple(perm[list(permuted)]) == base


@settings(max_examples=200, deadline=None)
@given(instances())
def test_argmin_in_every_subset(inst):
    w, rho = inst
    res = select_all(w, CorrelationMatrix(rho))
    first = int(np.argsort(w, kind="stable")[0])
    assert all(s.indices[0] == first for s in res.subsets)
