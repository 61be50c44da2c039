import itertools
import math

import numpy as np
import pytest
from scipy import stats

from sgmc.bounds.rcu import conventional_rcu, partial_rcu, pep_bracket, pep_exact
from sgmc.channel import ChannelSpec, sigma_from_ebn0
from sgmc.construction import Profile, nu_profile, rm_profile
from sgmc.spectrum import sgmc_spectrum, union_bound


def pep_oracle(lam, s):
    return np.mean([sum(b * l for b, l in zip(bits, lam)) + s <= 0 for bits in itertools.product((0, 1), repeat=len(lam))])


def test_pep_examples():
    assert pep_exact([], 0.3) == 0.0
    assert pep_exact([], -0.1) == 1.0
    assert pep_exact([], 0.0) == 1.0
    assert pep_exact([1.0, 2.0], -0.5) == 0.25


def test_pep_enumeration_against_oracle(rng):
    for m in range(1, 11):
        lam = rng.normal(1.0, 1.5, size=m)
        s = float(rng.normal(0, 2))
        assert pep_exact(lam, s) == pytest.approx(pep_oracle(lam, s), abs=1e-15)


def test_pep_dp_brackets_enumeration(rng):
    for _ in range(20):
        m = int(rng.integers(5, 20))
        lam = rng.normal(2.0, 2.0, size=m)
        s = float(rng.normal(-2, 3))
        exact = pep_exact(lam, s)
        lo, est, hi = pep_bracket(lam, s, 0.05)
        assert lo - 1e-12 <= exact <= hi + 1e-12
        assert lo <= est <= hi
    lam = rng.normal(2.0, 2.0, size=40)
    # beyond the enumeration limit the DP estimate is returned
    assert 0.0 <= pep_exact(lam, -5.0) <= 1.0


def rcu_oracle(profile, sigma, n_samples, seed):
    """Plain Monte-Carlo of the partial RCU with enumerated PEPs (independent of the tilted estimator)."""
    rng = np.random.default_rng(seed)
    n = profile.n
    mu = 2 / sigma**2
    tot = stats.norm.sf(math.sqrt(profile.widths[0]) / sigma)
    vals = np.zeros(n_samples)
    for t in range(n_samples):
        lam = mu * (1 + sigma * rng.standard_normal(n))
        acc = 0.0
        for l in range(1, profile.k):
            a = lam[: profile.ends[l - 1]]
            b = lam[profile.starts[l] : profile.ends[l]]
            acc += min(1.0, (2**l - 1) * pep_oracle(a, b.sum()))
        vals[t] = acc
    return tot + vals.mean(), vals.std() / math.sqrt(n_samples)


def test_partial_rcu_against_plain_monte_carlo():
    p = Profile((3, 2, 1))
    ref, se = rcu_oracle(p, 0.8, 6000, 1)
    est = partial_rcu(p, sigma=0.8, n_outer=4000, seed=2)
    assert abs(est.value - ref) < 3 * math.hypot(se, est.stderr)


def test_single_staircase_is_exact_repetition():
    for sigma in (0.5, 1.0):
        e = partial_rcu(Profile((9,)), sigma=sigma)
        assert e.value == pytest.approx(stats.norm.sf(3 / sigma), rel=1e-12)
        assert e.stderr == 0.0


def test_terms_and_clipping():
    e = partial_rcu(nu_profile(32, 16, 8), sigma=1.2, n_outer=200)
    assert np.all((e.terms >= 0) & (e.terms <= 1))
    assert 0 <= e.value <= 1
    lo, hi = e.ci
    assert lo <= e.value <= hi


def test_conventional_rcu_edges():
    assert conventional_rcu(10, 0, sigma=1.0).value == 0.0
    assert conventional_rcu(16, 8, sigma=3.0, n_outer=100).value <= 1.0
    with pytest.raises(ValueError):
        conventional_rcu(16, 8, ChannelSpec.bsc(0.1))
    with pytest.raises(ValueError):
        partial_rcu(Profile((3, 2)), sigma=None)


def test_bound_ordering_for_rm_128():
    p = rm_profile(3, 7)
    spec = sgmc_spectrum(p)
    for snr in (3.5, 4.0, 4.5):
        sigma = sigma_from_ebn0(snr, 0.5)
        conv = conventional_rcu(128, 64, sigma=sigma, n_outer=300)
        part = partial_rcu(p, sigma=sigma, n_outer=300)
        assert conv.value <= part.value + 3 * math.hypot(conv.stderr, part.stderr)
    # the union bound is looser than the partial RCU where it crosses 1e-4
    sig = [sigma_from_ebn0(s, 0.5) for s in np.arange(2.0, 8.0, 0.05)]
    s_ub = next(s for s in sig if union_bound(spec, s) <= 1e-4)
    assert union_bound(spec, s_ub) > partial_rcu(p, sigma=s_ub, n_outer=300).value
