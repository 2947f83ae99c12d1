import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from istnsim.agents.training import TrainMetrics
from istnsim.report import (RunReport, ci_bands, confidence_interval, moving_average,
                            read_metrics, write_metrics)


def fake_metrics(rng, n):
    return TrainMetrics(reward=rng.normal(100, 10, n), loss=np.where(np.arange(n) < 3, np.nan, rng.random(n)),
                        epsilon=np.linspace(1, 0.01, n), good=rng.integers(0, 50, n),
                        fair=rng.integers(0, 50, n), poor=rng.integers(0, 50, n),
                        nosignal=rng.integers(0, 50, n), served=rng.integers(0, 200, n),
                        leo_served=rng.integers(0, 20, n))


def test_ci_known_values():
    lo, m, hi = confidence_interval([1.0, 2.0, 3.0], 0.90)
    # t_{0.95, 2} = 2.919986; s = 1; n = 3
    assert m == 2.0
    assert hi - m == pytest.approx(2.919986 / np.sqrt(3), rel=1e-6)
    assert confidence_interval([5.0, 5.0, 5.0]) == (5.0, 5.0, 5.0)
    with pytest.raises(ValueError):
        confidence_interval([1.0])
    with pytest.raises(ValueError):
        confidence_interval([1.0, 2.0], level=1.0)


@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=40))
def test_ci_ordered(xs):
    lo, m, hi = confidence_interval(xs)
    assert lo <= m + 1e-6 and m <= hi + 1e-6


def test_ci_matches_bootstrap():
    rng = np.random.default_rng(0)
    for _ in range(10):
        n = int(rng.integers(100, 300))
        x = rng.gamma(rng.uniform(1, 5), rng.uniform(0.5, 10), n)
        lo, _, hi = confidence_interval(x, 0.90)
        means = x[rng.integers(0, n, (10_000, n))].mean(axis=1)
        b_lo, b_hi = np.quantile(means, [0.05, 0.95])
        assert (hi - lo) == pytest.approx(b_hi - b_lo, rel=0.05)


def test_bands_pointwise():
    rng = np.random.default_rng(1)
    m = rng.normal(size=(5, 40))
    lo, mean, hi = ci_bands(m)
    assert np.all(lo <= mean) and np.all(mean <= hi)
    for j in (0, 17, 39):
        assert (lo[j], mean[j], hi[j]) == pytest.approx(confidence_interval(m[:, j]))
    with pytest.raises(ValueError):
        ci_bands(m[:1])


@given(st.lists(st.floats(-1e3, 1e3), max_size=60), st.integers(1, 12))
def test_moving_average_oracle(xs, w):
    got = moving_average(xs, w)
    naive = [np.mean(xs[max(0, i - w + 1):i + 1]) for i in range(len(xs))]
    assert np.allclose(got, naive, atol=1e-6)


def test_metrics_roundtrip_exact(tmp_path):
    rng = np.random.default_rng(2)
    runs = {3: fake_metrics(rng, 17), 0: fake_metrics(rng, 17)}
    write_metrics(tmp_path / "m.csv", runs)
    lines = (tmp_path / "m.csv").read_text().splitlines()
    assert lines[0] == "iteration,seed,reward,loss,epsilon,good,fair,poor,nosignal,served,leo_served"
    assert lines[1].startswith("0,0,") and lines[18].startswith("0,3,")
    back = read_metrics(tmp_path / "m.csv")
    assert sorted(back) == [0, 3]
    for s in runs:
        for name in ("reward", "loss", "epsilon", "good", "served"):
            assert np.array_equal(getattr(back[s], name), getattr(runs[s], name), equal_nan=True)
    with pytest.raises(ValueError):
        (tmp_path / "x.csv").write_text("a,b\n")
        read_metrics(tmp_path / "x.csv")


def test_report_summary_and_files(tmp_path):
    rng = np.random.default_rng(3)
    rep = RunReport("dqn", {0: fake_metrics(rng, 100), 1: fake_metrics(rng, 100)}, n_users=200,
                    smooth=10)
    s = rep.summary()
    assert s["iterations"] == 100 and s["seeds"] == [0, 1]
    fm = rep.final_means()
    assert fm[0] == pytest.approx(rep.runs[0].reward[90:].mean())
    lo, m, hi = s["final_reward_ci"]
    assert lo <= m <= hi
    names = {p.name for p in rep.write(tmp_path)}
    assert names == {"metrics.csv", "summary.json", "bands.csv"}
    header = (tmp_path / "bands.csv").read_text().splitlines()[0].split(",")
    assert header[:4] == ["iteration", "reward_mean", "reward_lower", "reward_upper"]
    single = RunReport("ql", {0: fake_metrics(rng, 10)}, n_users=5)
    assert {p.name for p in single.write(tmp_path / ".")} >= {"metrics.csv", "summary.json"}
    assert "final_reward_ci" not in single.summary()
