import pytest
from hypothesis import given, strategies as st

from gambledetect.metrics import MetricsReport, evaluate
from gambledetect.splits import SplitSpec, read_split, split_ids, write_split


def test_counts_and_scores():
    pred = [1] * 3 + [1] + [0] * 2 + [0] * 4
    true = [1] * 3 + [0] + [1] * 2 + [0] * 4
    m = evaluate(pred, true)
    assert (m.tp, m.fp, m.fn, m.tn) == (3, 1, 2, 4)
    assert m.precision == 0.75 and m.recall == 0.6
    assert m.f1 == pytest.approx(2 * 0.75 * 0.6 / 1.35) == pytest.approx(0.6667, abs=1e-4)
    assert m.accuracy == 0.7


def test_f1_from_reported_precision_and_recall():
    p, r = 0.67, 0.77
    assert 2 * p * r / (p + r) == pytest.approx(0.7165, abs=1e-4)


def test_perfect_and_degenerate():
    m = evaluate([1, 0, 1], [1, 0, 1])
    assert (m.accuracy, m.precision, m.recall, m.f1) == (1.0, 1.0, 1.0, 1.0)
    m = evaluate([0, 0], [0, 0])
    assert m.precision == 0.0 and m.f1 == 0.0 and m.accuracy == 1.0


def test_bad_inputs():
    with pytest.raises(ValueError):
        evaluate([1, 0], [1])
    with pytest.raises(ValueError):
        evaluate([1, 0], [1, -1])


@given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50), st.integers(0, 50))
def test_f1_is_harmonic_mean(tp, fp, tn, fn):
    m = MetricsReport(tp, fp, tn, fn)
    if m.precision + m.recall:
        assert abs(m.f1 - 2 * m.precision * m.recall / (m.precision + m.recall)) < 1e-12
    assert 0 <= m.f1 <= 1


def test_stratified_split(tmp_path):
    labels = [1] * 20 + [0] * 80 + [-1] * 5
    ids = [f"e{i}" for i in range(len(labels))]
    split = split_ids(ids, labels, SplitSpec(0.8, True, 3))
    train = [lab for e, lab in zip(ids, labels) if split[e] == "train"]
    assert train.count(1) == 16 and train.count(0) == 64
    assert [split[e] for e in ids[-5:]] == ["unlabeled"] * 5
    assert split == split_ids(ids, labels, SplitSpec(0.8, True, 3))
    assert split != split_ids(ids, labels, SplitSpec(0.8, True, 4))
    write_split(split, tmp_path / "s.csv")
    assert read_split(tmp_path / "s.csv") == split
