import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from conftest import make_dataset
from gambledetect.boosting import (BoostedEnsemble, TrainingConfig, compute_gradients, efb_bundle,
                                   feature_importance, goss_sample, log_loss, train)
from gambledetect.boosting.binning import BinMapper
from gambledetect.boosting.bundling import conflict_rate
from gambledetect.boosting.model import Booster
from gambledetect.boosting.objective import GradientState, logistic
from gambledetect.boosting.tree import BinnedData, Tree, grow_tree
from gambledetect.dataset_io import SchemaMismatchError

PLAIN = dict(goss_top_rate=1.0, goss_other_rate=0.0)


def same_tree(a: Tree, b: Tree) -> bool:
    return all(np.array_equal(getattr(a, f.name), getattr(b, f.name)) for f in dataclasses.fields(Tree))


def leaf(w):
    return Tree(np.array([-1]), np.zeros(1), np.zeros(1, dtype=np.int64), np.ones(1, dtype=bool),
                np.array([-1]), np.array([-1]), np.array([w], dtype=np.float64))


def stump(feature, thr, lo, hi):
    return Tree(np.array([feature, -1, -1]), np.array([thr, 0.0, 0.0]), np.zeros(3, dtype=np.int64),
                np.ones(3, dtype=bool), np.array([1, -1, -1]), np.array([2, -1, -1]), np.array([0.0, lo, hi]))


# -- objective ---------------------------------------------------------------

def test_gradient_examples():
    g = compute_gradients([1, 0, 1], [0.0, 0.0, 50.0])
    assert np.allclose(g.grad[:2], [-0.5, 0.5]) and np.allclose(g.hess[:2], 0.25)
    assert abs(g.grad[2]) < 1e-20 and g.hess[2] < 1e-20


def test_gradients_match_finite_differences():
    rng = np.random.default_rng(3)
    raw = rng.uniform(-6, 6, size=100)
    y = rng.integers(0, 2, size=100).astype(float)

    def loss(r):
        return np.logaddexp(0.0, r) - y * r

    eps = 1e-5
    fd_g = (loss(raw + eps) - loss(raw - eps)) / (2 * eps)
    st_ = compute_gradients(y, raw)
    assert np.max(np.abs(fd_g - st_.grad) / np.maximum(np.abs(st_.grad), 1e-3)) < 1e-5
    eps = 1e-3
    fd_h = (loss(raw + eps) - 2 * loss(raw) + loss(raw - eps)) / eps ** 2
    assert np.max(np.abs(fd_h - st_.hess) / np.maximum(st_.hess, 1e-3)) < 1e-5


def test_logistic_is_stable():
    assert logistic(-1000.0) == 0.0 and logistic(1000.0) == 1.0 and logistic(0.0) == 0.5
    assert math.isfinite(log_loss([1, 0], [-800.0, 800.0]))


# -- GOSS --------------------------------------------------------------------

def test_goss_degenerate_keeps_everything():
    rows, w = goss_sample(np.linspace(-1, 1, 9), 1.0, 0.0, seed=0)
    assert list(rows) == list(range(9)) and np.all(w == 1)


def test_goss_amplification():
    g = np.array([0.9, -0.8, 0.1, 0.2, -0.1, 0.05, 0.3, -0.25, 0.15, 0.12])
    rows, w = goss_sample(g, 0.2, 0.1, seed=1)
    assert len(rows) == 3
    top = set(rows[w == 1])
    assert top == {0, 1}
    assert w[w != 1] == pytest.approx([8.0])


def test_goss_ties_go_to_lower_index():
    rows, w = goss_sample(np.ones(10), 0.3, 0.0)
    assert list(rows) == [0, 1, 2]


def test_goss_without_small_gradient_draw():
    rows, w = goss_sample(np.arange(10.0), 0.5, 0.0)
    assert list(rows) == [5, 6, 7, 8, 9] and np.all(w == 1)


def test_goss_rejects_bad_rates():
    with pytest.raises(ValueError):
        goss_sample(np.ones(4), 0.7, 0.5)


def test_goss_is_unbiased():
    rng = np.random.default_rng(0)
    g = rng.normal(size=200) * rng.exponential(size=200)
    sums = np.array([np.sum(g[r] * w) for r, w in (goss_sample(g, 0.2, 0.1, seed=s) for s in range(2000))])
    se = sums.std(ddof=1) / np.sqrt(len(sums))
    assert abs(sums.mean() - g.sum()) < 3 * se


def test_goss_is_deterministic_given_seed():
    g = np.random.default_rng(0).normal(size=50)
    a, b = goss_sample(g, 0.2, 0.1, seed=[3, 4]), goss_sample(g, 0.2, 0.1, seed=[3, 4])
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


# -- feature bundling ----------------------------------------------------------

def test_conflict_rate():
    a = np.array([1, 1, 0, 0], dtype=bool)
    b = np.array([0, 1, 1, 0], dtype=bool)
    assert conflict_rate(a, b) == pytest.approx(1 / 3)
    assert conflict_rate(np.zeros(3, bool), np.zeros(3, bool)) == 0.0


def test_exclusive_features_share_a_bundle():
    X = np.array([[1, 0], [0, 2], [0, 0]])
    bundles, packed, b = efb_bundle(X, 0.0)
    assert bundles == [[0, 1]] or bundles == [[1, 0]]
    assert packed.shape == (3, 1)


def test_overlapping_features_stay_apart():
    X = np.array([[1, 1], [0, 2], [0, 0]])
    bundles, _, _ = efb_bundle(X, 0.0)
    assert len(bundles) == 2


def test_one_hot_offsets():
    X = np.eye(3, dtype=np.int64)[[0, 1, 2, 0, 1]]
    bundles, packed, b = efb_bundle(X, 0.0)
    assert len(bundles) == 1 and b.bundle_widths() == [6]
    members = bundles[0]
    # offsets accumulate (max + 1) of earlier members: 0, v1 + 1, v1 + v2 + 2
    assert [b.offsets[j] for j in members] == [0, 2, 4]
    for j in range(3):
        assert np.array_equal(b.decode(packed, j), X[:, j])


@settings(max_examples=60, deadline=None)
@given(hnp.arrays(np.int64, st.tuples(st.integers(1, 30), st.integers(1, 6)), elements=st.integers(0, 4)),
       st.floats(0, 1))
def test_bundles_partition_features(X, thr):
    bundles, packed, b = efb_bundle(X, thr)
    assert sorted(j for m in bundles for j in m) == list(range(X.shape[1]))
    for m in bundles:
        for i, j in enumerate(m):
            for k in m[:i]:
                assert conflict_rate(X[:, j] != 0, X[:, k] != 0) <= thr


def sparse_exclusive(n=300, seed=0):
    """Mutually exclusive count columns in groups of three plus two dense ones."""
    rng = np.random.default_rng(seed)
    blocks = []
    for _ in range(3):
        which = rng.integers(0, 4, size=n)  # 3 means all zero
        block = np.zeros((n, 3))
        for j in range(3):
            block[which == j, j] = rng.integers(1, 6, size=np.count_nonzero(which == j))
        blocks.append(block)
    X = np.hstack(blocks + [rng.normal(size=(n, 2))])
    y = ((X[:, 0] > 2) | (X[:, 4] > 3) ^ (X[:, -1] > 0.3)).astype(np.int64)
    return X, y


def test_bundled_training_matches_unbundled():
    X, y = sparse_exclusive()
    data = BinnedData(X, enable_efb=True)
    assert data.bundling is not None and len(data.bundling.bundles) < X.shape[1]
    ds = make_dataset(X, y)
    cfg = TrainingConfig(n_rounds=30, min_samples_leaf=5, seed=2)
    with_efb = train(ds, cfg)
    without = train(ds, dataclasses.replace(cfg, enable_efb=False))
    assert np.max(np.abs(with_efb.predict_raw(X) - without.predict_raw(X))) < 1e-9
    assert with_efb.dumps().replace("enable_efb=True", "") == without.dumps().replace("enable_efb=False", "")


# -- binning -------------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(hnp.arrays(np.float64, st.integers(1, 400), elements=st.floats(-1e6, 1e6) | st.just(np.nan)),
       st.integers(2, 255))
def test_bin_order_matches_thresholds(col, max_bins):
    m = BinMapper.fit(col[:, None], max_bins)
    bins = m.transform(col[:, None])[:, 0]
    ok = ~np.isnan(col)
    assert np.all(bins[~ok] == m.missing_bin)
    assert np.all(bins[ok] <= m.n_cuts[0]) and m.n_cuts[0] < max_bins
    for b in range(m.n_cuts[0] + 1):
        assert np.array_equal(bins[ok] <= b, col[ok] <= m.threshold(0, b))


# -- tree growth -----------------------------------------------------------------

def test_four_sample_split():
    X = np.array([[0.0], [0.0], [1.0], [1.0]])
    grads = compute_gradients([1, 1, 0, 0], np.zeros(4))
    assert list(grads.grad) == [-0.5, -0.5, 0.5, 0.5]
    cfg = TrainingConfig(min_samples_leaf=1, l2_reg=1.0, min_split_gain=0.0, **PLAIN)
    tree = grow_tree(X, grads, cfg)
    assert tree.n_leaves == 2 and tree.feature[0] == 0
    assert tree.predict(X) == pytest.approx([2 / 3, 2 / 3, -2 / 3, -2 / 3])


def split_gain(G_L, H_L, G_R, H_R, lam):
    return 0.5 * (G_L ** 2 / (H_L + lam) + G_R ** 2 / (H_R + lam) - (G_L + G_R) ** 2 / (H_L + H_R + lam))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_root_split_matches_exhaustive_search(seed):
    rng = np.random.default_rng(seed)
    n, k = 24, 3
    X = rng.integers(0, 6, size=(n, k)).astype(float)
    grads = GradientState(rng.normal(size=n), rng.uniform(0.05, 0.25, size=n))
    cfg = TrainingConfig(min_samples_leaf=1, max_leaves=2, **PLAIN)
    best = 0.0
    for j in range(k):
        for t in np.unique(X[:, j])[:-1]:
            left = X[:, j] <= t
            best = max(best, split_gain(grads.grad[left].sum(), grads.hess[left].sum(),
                                        grads.grad[~left].sum(), grads.hess[~left].sum(), 1.0))
    tree = grow_tree(X, grads, cfg)
    if best <= 0:
        assert tree.n_leaves == 1
        return
    left = tree.apply(X) == tree.left[0]
    got = split_gain(grads.grad[left].sum(), grads.hess[left].sum(),
                     grads.grad[~left].sum(), grads.hess[~left].sum(), 1.0)
    assert got == pytest.approx(best, rel=1e-12)
    for node in (tree.left[0], tree.right[0]):
        rows = tree.apply(X) == node
        assert tree.value[node] == pytest.approx(-grads.grad[rows].sum() / (grads.hess[rows].sum() + 1.0))


def test_zero_gradients_give_single_zero_leaf():
    X = np.random.default_rng(0).normal(size=(50, 3))
    tree = grow_tree(X, GradientState(np.zeros(50), np.full(50, 0.25)), TrainingConfig(min_samples_leaf=1))
    assert tree.n_leaves == 1 and tree.value[0] == 0.0


def test_constant_column_is_never_split():
    rng = np.random.default_rng(1)
    X = np.column_stack([np.full(100, 3.0), rng.normal(size=100)])
    grads = GradientState(rng.normal(size=100), np.full(100, 0.25))
    tree = grow_tree(X, grads, TrainingConfig(min_samples_leaf=2))
    assert tree.n_leaves > 1 and 0 not in set(tree.split_features())


def test_max_leaves_and_min_samples_respected(small_binary):
    grads = compute_gradients(small_binary.labels, np.zeros(len(small_binary)))
    tree = grow_tree(small_binary.features, grads, TrainingConfig(max_leaves=7, min_samples_leaf=15))
    assert tree.n_leaves <= 7
    counts = np.bincount(tree.apply(small_binary.features), minlength=tree.n_nodes)
    assert all(counts[i] >= 15 for i in range(tree.n_nodes) if tree.feature[i] < 0)


def test_missing_values_follow_default_direction():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(400, 2))
    y = (X[:, 0] > 0).astype(np.int64)
    X[rng.random(400) < 0.2, 0] = np.nan
    y[np.isnan(X[:, 0])] = 1
    model = train(make_dataset(X, y), TrainingConfig(n_rounds=30, **PLAIN))
    assert model.predict(np.array([[np.nan, 0.0]]))[0] == 1
    booster = Booster(X, y, ["a", "b"], TrainingConfig(n_rounds=5, **PLAIN))
    for t in range(5):
        tree = booster.boosting_round(t)
        assert np.array_equal(tree.predict(X), tree.predict_binned(booster.data.bins, booster.data.mapper.missing_bin))


# -- ensemble ----------------------------------------------------------------------

def test_empty_ensemble_predicts_half(small_binary):
    model = train(small_binary, TrainingConfig(n_rounds=0))
    assert np.all(model.predict_proba(small_binary) == 0.5)
    assert all(c == 0 for _, c in feature_importance(model))


def test_additive_form():
    X = np.array([[0.0], [5.0]])
    m = BoostedEnsemble(["x"], 0.3, 0.0, [leaf(2.0)])
    assert m.predict_raw(X) == pytest.approx([0.6, 0.6])
    m.trees.append(stump(0, 1.0, -1.0, 4.0))
    assert m.predict_raw(X) == pytest.approx([0.3 * (2 - 1), 0.3 * (2 + 4)])


def test_importance_ordering():
    trees = [stump(3, 0.0, 0, 0)] * 5 + [stump(1, 0.0, 0, 0)] * 2
    ranked = feature_importance(BoostedEnsemble([f"f{i}" for i in range(5)], trees=trees))
    assert ranked[:2] == [("f3", 5), ("f1", 2)]
    assert [n for n, _ in ranked[2:]] == ["f0", "f2", "f4"]
    one = feature_importance(BoostedEnsemble(["a", "b"], trees=[stump(0, 0.0, 0, 0)]))
    assert one == [("a", 1), ("b", 0)]


def test_degenerate_goss_equals_plain_boosting():
    rng = np.random.default_rng(11)
    X = rng.normal(size=(200, 10))
    y = (X[:, 0] - X[:, 1] + rng.normal(scale=0.7, size=200) > 0).astype(np.int64)
    cfg = TrainingConfig(n_rounds=20, **PLAIN)
    model = train(make_dataset(X, y), cfg)
    # explicit full-data boosting, passing the (a=1, b=0) selection through grow_tree
    data = BinnedData(X, cfg.max_bins, cfg.enable_efb, cfg.efb_conflict_threshold)
    raw = np.zeros(200)
    for t, tree in enumerate(model.trees):
        grads = compute_gradients(y, raw)
        rows, w = goss_sample(grads, 1.0, 0.0, seed=[cfg.seed, t])
        sampled = grow_tree(data, grads, cfg, rows, w)
        plain = grow_tree(data, grads, cfg)
        assert same_tree(sampled, tree) and same_tree(plain, tree)
        raw += cfg.learning_rate * tree.predict(X)


def test_training_loss_is_monotone(small_binary):
    model = train(small_binary, TrainingConfig(n_rounds=60, **PLAIN))
    losses = [log_loss(small_binary.labels, r) for r in model.staged_raw(small_binary)]
    assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))


def test_separable_set_is_fit_within_50_rounds():
    rng = np.random.default_rng(4)
    X = rng.uniform(-1, 1, size=(100, 2))
    y = (X[:, 0] + 2 * X[:, 1] > 0.1).astype(np.int64)
    model = train(make_dataset(X, y), TrainingConfig(n_rounds=50, min_samples_leaf=1))
    assert np.mean(model.predict(X) == y) == 1.0


def test_training_is_deterministic(small_binary):
    cfg = TrainingConfig(n_rounds=25, seed=9)
    assert train(small_binary, cfg).dumps() == train(small_binary, cfg).dumps()
    assert train(small_binary, cfg).dumps() != train(small_binary, dataclasses.replace(cfg, seed=10)).dumps()


def test_model_file_round_trip(tmp_path, small_binary):
    X = small_binary.features.copy()
    X[::7, 2] = np.nan
    model = train(make_dataset(X, small_binary.labels), TrainingConfig(n_rounds=15))
    model.save(tmp_path / "m.txt")
    back = BoostedEnsemble.load(tmp_path / "m.txt")
    assert back.dumps() == model.dumps()
    assert np.array_equal(back.predict_raw(X), model.predict_raw(X))
    assert back.config == model.config


def test_schema_mismatch_is_rejected(small_binary):
    model = train(small_binary, TrainingConfig(n_rounds=2))
    renamed = dataclasses.replace(small_binary, feature_names=[n + "_" for n in small_binary.feature_names])
    with pytest.raises(SchemaMismatchError):
        model.predict(renamed)
    with pytest.raises(SchemaMismatchError):
        model.predict(np.zeros((2, 3)))


def test_unlabeled_rows_are_ignored_and_empty_raises(small_binary):
    labels = small_binary.labels.copy()
    labels[:50] = -1
    ds = dataclasses.replace(small_binary, labels=labels)
    cfg = TrainingConfig(n_rounds=5)
    assert train(ds, cfg).dumps() == train(ds.subset(range(50, 200)), cfg).dumps()
    with pytest.raises(ValueError):
        train(ds.subset(range(50)), cfg)


def test_single_class_warns(small_binary):
    ds = dataclasses.replace(small_binary, labels=np.zeros(len(small_binary), dtype=np.int64))
    with pytest.warns(UserWarning):
        model = train(ds, TrainingConfig(n_rounds=3))
    assert np.all(model.predict_proba(ds) < 0.5)


def test_config_parsing():
    cfg = TrainingConfig.from_dict({"n_rounds": "7", "enable_efb": "false", "l2_reg": "0.5"})
    assert (cfg.n_rounds, cfg.enable_efb, cfg.l2_reg) == (7, False, 0.5)
    assert TrainingConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(KeyError):
        TrainingConfig.from_dict({"depth": "3"})
    with pytest.raises(ValueError):
        TrainingConfig(goss_top_rate=0.8, goss_other_rate=0.5)
