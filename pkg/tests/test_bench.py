import numpy as np
import pytest

from lpvmor import ExperimentSpec, bfr, is_observable, is_reachable, random_signals, run_compare
from lpvmor.bench import exact_prefix
from lpvmor.model import random_model


def test_bfr_identical():
    y = np.sin(np.arange(20.0))
    assert bfr(y, y) == 100.0


def test_bfr_mean_signal_is_zero():
    y = np.sin(np.arange(20.0))
    assert bfr(y, np.full_like(y, y.mean())) == pytest.approx(0.0, abs=1e-12)


def test_bfr_clamped():
    y = np.sin(np.arange(20.0))
    ybar = y - 2 * (y - y.mean())
    assert bfr(y, ybar) == 0.0


def test_bfr_formula_by_hand():
    y = np.array([[1.0], [3.0], [2.0], [6.0]])
    ybar = np.array([[1.0], [2.0], [2.0], [5.0]])
    # residual sqrt(2), deviation from mean 3: sqrt(4+0+1+9)
    assert bfr(y, ybar) == pytest.approx(100 * (1 - np.sqrt(2) / np.sqrt(14)), rel=1e-14)


def test_bfr_multichannel_uses_joint_norm():
    y = np.array([[0.0, 1.0], [2.0, 1.0], [4.0, 4.0]])
    ybar = y + np.array([[0.5, 0.0], [0.0, 0.0], [0.0, -0.5]])
    den = np.sqrt(np.sum((y - y.mean(axis=0)) ** 2))
    assert bfr(y, ybar) == pytest.approx(100 * (1 - np.sqrt(0.5) / den))


def test_bfr_degenerate_constant():
    y = np.ones(5)
    assert bfr(y, y) == 100.0
    assert bfr(y, y + 1) == 0.0


def test_bfr_length_mismatch():
    with pytest.raises(ValueError):
        bfr(np.zeros(3), np.zeros(4))


def test_exact_prefix():
    y = np.arange(6.0)
    z = y.copy()
    z[3] += 1
    assert exact_prefix(y, z) == 3
    assert exact_prefix(y, y) == 6


def test_signals_deterministic():
    spec = ExperimentSpec(N=2, seed=42)
    a = random_signals(spec, 3, 1, 5)
    b = random_signals(spec, 3, 1, 5)
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])
    c = random_signals(spec, 4, 1, 5)
    assert not np.array_equal(a[0], c[0])


def test_signal_statistics():
    spec = ExperimentSpec(N=0, horizon=9999, seed=1)
    u, p = random_signals(spec, 0, 1, 3)
    assert len(u) == 10_000
    assert abs(u.mean()) < 0.05
    assert abs(u.var() - 1) < 0.1


def test_schedule_range():
    spec = ExperimentSpec(N=2, seed=9, sched_range=(-0.3, 2.0))
    _, p = random_signals(spec, 0, 1, 4)
    assert p.min() >= -0.3 and p.max() <= 2.0
    assert p.shape == (53, 4)


def test_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec(N=1, trials=0)
    with pytest.raises(ValueError):
        ExperimentSpec(N=1, horizon=0)
    with pytest.raises(ValueError):
        ExperimentSpec(N=1, sched_range=(1.0, -1.0))


def test_example_fixture(example):
    assert (example.n_x, example.n_p, example.n_u, example.n_y) == (7, 5, 1, 1)
    assert example.A[0][0][1] == 0.5471
    assert is_reachable(example) and is_observable(example)
    expected_rows = {0: (-0.5, 0.5471), 1: (0.3, 0.2285), 2: (-0.4, 0.4741),
                     3: (-0.7, 0.9362), 4: (0.5, 0.4367), 5: (0.1, 0.0573)}
    for i, (a, b) in expected_rows.items():
        nz = np.argwhere(example.A[i])
        assert [tuple(x) for x in nz] == [(i, i), (i, i + 1)]
        assert (example.A[i][i][i], example.A[i][i][i + 1]) == (a, b)
    for i, e in enumerate([7, 6, 5, 1, 2, 3]):
        np.testing.assert_array_equal(example.B[i][:, 0], np.eye(7)[e - 1])
        np.testing.assert_array_equal(example.C[i][0], np.eye(7)[0])


def test_compare_identical_models(example):
    stats = run_compare(example, ExperimentSpec(N=7, mode="R", trials=20, seed=3))
    assert stats.order == 7
    assert np.all(stats.bfr > 100 - 1e-9)
    assert stats.min_exact_prefix == stats.spec.steps


def test_compare_stats_ordering(example):
    stats = run_compare(example, ExperimentSpec(N=2, mode="O", trials=40, seed=5))
    assert stats.best >= stats.mean >= stats.worst
    assert np.all((0 <= stats.bfr) & (stats.bfr <= 100))
    assert stats.min_exact_prefix >= 3
    assert stats.order == 3


def test_compare_improves_with_depth(example):
    m2 = run_compare(example, ExperimentSpec(N=2, mode="O", trials=100, seed=8)).mean
    m4 = run_compare(example, ExperimentSpec(N=4, mode="O", trials=100, seed=8)).mean
    assert m4 > m2


def test_compare_reports_trial_on_failure():
    m = random_model(np.random.default_rng(0), 3, n_p=1)
    spec = ExperimentSpec(N=1, trials=2)
    stats = run_compare(m, spec)
    assert len(stats.bfr) == 2
