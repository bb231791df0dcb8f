import math

import numpy as np
import pytest

from primespec import cramer as cr
from primespec.rigidity import doubling_grid
from primespec.specfun import li, riemann_r


def test_default_k0_is_first_candidate_past_x():
    c = cr.CramerConfig(x=1e6, samples=1)
    assert riemann_r(c.k0) > 1e6 >= riemann_r(c.k0 - 1)


def test_k0_for_1e10():
    k0 = cr.first_candidate(1e10)
    assert k0 == 252097715777
    assert riemann_r(k0) == pytest.approx(1e10 + 0.00241, abs=5e-4)


def test_config_validation():
    with pytest.raises(ValueError):
        cr.CramerConfig(samples=0)
    with pytest.raises(ValueError):
        cr.CramerConfig(k0=2)
    with pytest.raises(ValueError):
        cr.CramerConfig(unfold="x")
    with pytest.raises(ValueError):
        cr.CramerConfig(L_max=0)


def _range_config(a, b, **kw):
    # a configuration whose candidates run from a up to about b
    x = riemann_r(a)
    return cr.CramerConfig(x=x, L_max=riemann_r(b) - x, k0=a, **kw)


def test_acceptance_rate():
    c = _range_config(10**6, 2 * 10**6, samples=1, seed=5)
    k = cr.generate_sample(c, c.rng(0))
    k = k[k <= 2 * 10**6]
    n = np.arange(10**6, 2 * 10**6 + 1, dtype=np.float64)
    p = 1 / np.log(n)
    mean, sd = p.sum(), math.sqrt(np.sum(p * (1 - p)))
    assert abs(k.size - mean) < 3 * sd
    assert abs(k.size / n.size - 1 / math.log(1.5e6)) < 3 * sd / n.size + 1e-3


def test_expected_density_against_li():
    c = _range_config(10**7, 10**7 + 10**6, samples=1, seed=9)
    k = cr.generate_sample(c, c.rng(3))
    K = 10**7 + 10**6
    count = int(np.sum(k < K))
    expected = li(K) - li(10**7)
    assert abs(count - expected) < 3 * math.sqrt(expected)


def test_odd_only_variant():
    c = _range_config(10**6, 2 * 10**6, samples=1, seed=1, include_even=False)
    k = cr.generate_sample(c, c.rng(0))
    assert np.all(k % 2 == 1)
    n = np.arange(10**6 + 1, 2 * 10**6 + 1, 2, dtype=np.float64)
    p = 2 / np.log(n)
    k = k[k <= 2 * 10**6]
    assert abs(k.size - p.sum()) < 3 * math.sqrt(np.sum(p * (1 - p)))


def test_reproducible_per_sample():
    c = cr.CramerConfig(x=1e5, L_max=512, seed=42, samples=3)
    a = cr.generate_sample(c, c.rng(1))
    b = cr.generate_sample(c, c.rng(1))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, cr.generate_sample(c, c.rng(2)))
    assert np.all(np.diff(a) > 0) and a[0] >= c.k0 and a[-1] <= c.k_end


def test_ensemble_mean_and_workers():
    grid = doubling_grid(32, 512)
    c = cr.CramerConfig(x=1e5, L_max=512, seed=3, samples=6)
    e1 = cr.ensemble_delta3(c, grid, workers=1)
    e2 = cr.ensemble_delta3(c, grid, workers=2)
    assert np.array_equal(e1.mean_curve.values, e2.mean_curve.values)
    V = np.vstack([p.values for p in e1.per_sample])
    assert np.allclose(e1.mean_curve.values, V.mean(axis=0), rtol=1e-12)
    assert e1.mean_curve.ensemble_size == 6
    assert np.allclose(e1.stderr, V.std(axis=0, ddof=1) / math.sqrt(6), rtol=1e-10)


def test_grid_must_increase():
    with pytest.raises(ValueError):
        cr.ensemble_delta3(cr.CramerConfig(samples=1), [256, 128])


def test_stderr_scales_as_inverse_sqrt():
    grid = [256.0]
    se = [cr.ensemble_delta3(cr.CramerConfig(x=1e6, L_max=256, seed=77, samples=n), grid).stderr[0]
          for n in (10, 40, 160)]
    for a, b in zip(se, se[1:]):
        assert 1.3 < a / b < 3.0


def test_bernoulli_rate_lowers_rigidity():
    # a Bernoulli(p) lattice has number variance (1 - p) L, so Delta_3 -> (1 - p) L / 15
    c = cr.CramerConfig(x=1e6, L_max=1024, seed=123, samples=400)
    grid = doubling_grid(128, 1024)
    e = cr.ensemble_delta3(c, grid)
    ratio = float(np.mean(e.mean_curve.values / (grid / 15)))
    assert abs(ratio - (1 - 1 / math.log(c.k0))) < 0.03


def test_single_sample_fluctuates_around_poisson_line():
    grid = doubling_grid(128, 2**14)
    e = cr.ensemble_delta3(cr.CramerConfig(x=1e6, seed=8, samples=1), grid)
    r = e.mean_curve.values / (grid / 15)
    assert 0.3 < np.median(r) < 3 and np.ptp(r) > 0.2
    assert np.all(np.isnan(e.stderr))


def test_csv_roundtrip(tmp_path):
    grid = doubling_grid(32, 256)
    e = cr.ensemble_delta3(cr.CramerConfig(x=1e5, L_max=256, seed=3, samples=4), grid)
    p = tmp_path / "e.csv"
    e.to_csv(p)
    assert p.read_text().splitlines()[0] == "L,mean_delta3,stderr,n_samples"
    L, m, s, n = cr.read_ensemble_csv(p)
    assert np.array_equal(L, grid) and np.array_equal(m, e.mean_curve.values)
    assert np.array_equal(s, e.stderr) and n == 4
    q = tmp_path / "s.csv"
    e.samples_to_csv(q)
    assert len(q.read_text().splitlines()) == 1 + 4 * len(grid)


def test_li_unfolding_option():
    c = cr.CramerConfig(x=1e6, L_max=256, seed=1, samples=1, unfold="li")
    assert li(c.k0) > 1e6 >= li(c.k0 - 1)
    e = cr.ensemble_delta3(c, [128.0, 256.0])
    assert np.all(e.mean_curve.values > 0)
