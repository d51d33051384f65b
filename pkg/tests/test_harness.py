import numpy as np
import pytest

from polar16.codec import CodeSpec
from polar16.harness import (
    CSV_HEADER,
    SimConfig,
    awgn_llr,
    choose_frozen,
    format_csv,
    gnuplot_script,
    monte_carlo_construct,
    noise_variance,
    simulate_fer,
    wilson_interval,
    write_csv,
)
from polar16.kernelspec import arikan, k1, k2


class ZeroNoise:
    def normal(self, loc, scale, size):
        return np.zeros(size)


def test_llr_formula():
    assert noise_variance(0.0, 1.0) == pytest.approx(0.5)
    # sigma^2 = 0.5 and received y = 1.0 give LLR 4
    assert awgn_llr(np.array([0]), 0.0, 1.0, ZeroNoise())[0] == pytest.approx(4.0)
    assert awgn_llr(np.array([1]), 0.0, 1.0, ZeroNoise())[0] == pytest.approx(-4.0)


def test_rate_validated():
    with pytest.raises(ValueError):
        noise_variance(1.0, 0.0)


def test_high_snr_sign():
    rng = np.random.default_rng(0)
    c = rng.integers(0, 2, 1000).astype(np.uint8)
    llr = awgn_llr(c, 60.0, 0.5, rng)
    assert np.array_equal(llr < 0, c == 1)
    assert np.abs(llr).max() <= 1e6


def test_llr_mean():
    rng = np.random.default_rng(1)
    var = noise_variance(1.0, 0.5)
    llr = awgn_llr(np.zeros(10**6, dtype=np.uint8), 1.0, 0.5, rng)
    se = (2 / np.sqrt(var)) / np.sqrt(llr.size)
    assert abs(llr.mean() - 2 / var) < 3 * se


def test_wilson_interval():
    lo, hi = wilson_interval(10, 100)
    assert lo < 0.1 < hi
    assert wilson_interval(0, 50)[0] == 0.0
    assert wilson_interval(50, 50)[1] == 1.0


def test_choose_frozen_ties_to_larger_index():
    assert choose_frozen(np.zeros(8), 3) == (5, 6, 7)
    assert choose_frozen(np.array([5, 0, 5, 1]), 2) == (0, 2)


def test_construct_zero_noise():
    res = monte_carlo_construct(k2(), 1, 8, 80.0, 200, np.random.default_rng(0))
    assert not res.error_counts.any()
    assert res.frozen == tuple(range(8, 16))


def test_construct_polarization_order():
    res = monte_carlo_construct(arikan(), 1, 8, 1.0, 100000, np.random.default_rng(2))
    c0, c15 = res.error_counts[0], res.error_counts[15]
    # 5-sigma separation of the two binomial counts
    sd = np.sqrt(c0 * (1 - c0 / 1e5) + c15 * (1 - c15 / 1e5))
    assert c0 - c15 > 5 * sd


def test_constructed_code_beats_random_frozen_set():
    rng = np.random.default_rng(3)
    snr = 2.5
    built = monte_carlo_construct(k2(), 2, 128, snr, 5000, rng)
    spec = CodeSpec(k2(), 2, 128, built.frozen)
    rand = CodeSpec(k2(), 2, 128, tuple(np.random.default_rng(4).choice(256, 128, replace=False)))
    good = simulate_fer(SimConfig(spec, [snr], [1], max_frames=4000, max_errors=None, seed=5))[0]
    bad = simulate_fer(SimConfig(rand, [snr], [1], max_frames=400, max_errors=None, seed=5))[0]
    assert bad.fer >= 10 * good.fer
    assert good.errors > 0


def test_zero_noise_simulation():
    spec = CodeSpec.build(k1(), 1, 8)
    pts = simulate_fer(SimConfig(spec, [80.0], [1, 2], max_frames=300, seed=1))
    assert all(p.errors == 0 and p.frames == 300 for p in pts)


def test_same_seed_same_csv(tmp_path):
    spec = CodeSpec.build(k2(), 1, 8)
    texts = []
    for workers in (1, 3):
        cfg = SimConfig(spec, [0.0, 1.0], [1, 2], max_frames=500, max_errors=40, seed=9, workers=workers)
        texts.append(write_csv(tmp_path / f"r{workers}.csv", simulate_fer(cfg), cfg))
    assert texts[0] == texts[1]
    assert (tmp_path / "r1.csv").read_bytes() == (tmp_path / "r3.csv").read_bytes()


def test_csv_format_and_stopping_rule():
    spec = CodeSpec.build(k2(), 1, 12)
    cfg = SimConfig(spec, [-2.0], [1], max_frames=5000, max_errors=30, seed=2)
    pts = simulate_fer(cfg)
    p = pts[0]
    assert p.errors >= 30 and p.frames < 5000
    assert p.frames >= p.errors
    lo, hi = p.ci
    assert lo <= p.fer <= hi
    lines = [ln for ln in format_csv(pts, cfg).splitlines() if not ln.startswith("#")]
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 2


def test_ops_share_at_n4096():
    spec = CodeSpec.build(k2(), 3, 2048)
    pts = simulate_fer(SimConfig(spec, [4.0], [1], max_frames=2, max_errors=None, seed=0))
    from polar16.codec import encode, scl_decode

    res = scl_decode(spec, np.where(encode(spec, np.zeros(2048, dtype=np.uint8)) == 0, 5.0, -5.0), 1)
    assert res.kernel_ops == 3 * (4096 // 16) * 181
    assert pts[0].kernel_ops == 3 * (4096 // 16) * 181
    assert pts[0].ops_mean == res.kernel_ops + res.list_ops


def test_config_validation():
    spec = CodeSpec.build(k1(), 1, 8)
    with pytest.raises(ValueError):
        SimConfig(spec, [], [1])
    with pytest.raises(ValueError):
        SimConfig(spec, [1.0], [1], max_frames=0)


def test_gnuplot_script():
    text = gnuplot_script("out.csv", [1, 8])
    assert "logscale y" in text and "L=8" in text
