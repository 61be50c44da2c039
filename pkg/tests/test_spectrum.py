import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from sgmc.construction import Profile, batch_staircase_bits, rm_profile
from sgmc.gf2 import BitMatrix, popcount_words, subcode_words
from sgmc.spectrum import (
    dmin2_ccdf,
    dmin2_pmf,
    low_weight_fraction,
    random_code_spectrum,
    sgmc_spectrum,
    union_bound,
)


def test_hand_expansion():
    s = sgmc_spectrum(Profile((2, 1, 1)))
    assert [float(a) for a in s.coefficients] == [1, 1, 3.5, 2, 0.5]
    assert s.total == 8


def test_repetition_and_totals():
    assert sgmc_spectrum(Profile((7,))).coefficients == (1, 0, 0, 0, 0, 0, 0, 1)
    p = rm_profile(2, 5)
    s = sgmc_spectrum(p)
    assert s.total == 2**p.k and s[0] == 1
    r = random_code_spectrum(1, 1)
    assert r.coefficients == (Fraction(3, 2), Fraction(1, 2))
    r = random_code_spectrum(10, 4)
    assert r.total == 16 and r[0] == 1 + Fraction(15, 1024)


def test_spectrum_matches_sampling():
    p = Profile((4, 2, 1, 1))
    bits = batch_staircase_bits(p, np.arange(4000))
    counts = np.zeros(p.n + 1)
    for g in bits:
        w = popcount_words(subcode_words(BitMatrix.from_bits(g), p.k))
        counts += np.bincount(w, minlength=p.n + 1)
    mean = counts / len(bits)
    expect = sgmc_spectrum(p).values()
    # loose check here; the 3-sigma version lives in the acceptance suite
    np.testing.assert_allclose(mean, expect, atol=0.15)


def test_random_vs_staircase_in_the_middle():
    a = sgmc_spectrum(rm_profile(3, 7)).values()
    b = random_code_spectrum(128, 64).values()
    d = np.arange(48, 81)
    assert np.max(np.abs(a[d] / b[d] - 1)) < 0.01
    # the staircase ensemble has far more light codewords
    assert low_weight_fraction(sgmc_spectrum(rm_profile(3, 7)), 16) > low_weight_fraction(random_code_spectrum(128, 64), 16)


def test_dmin2_examples():
    assert dmin2_pmf(2, 1) == {1: Fraction(1, 2), 2: Fraction(1, 2)}
    ccdf = dmin2_ccdf(16, 8)
    assert ccdf[13] > 0.9
    with pytest.raises(ValueError):
        dmin2_pmf(3, 4)


def test_dmin2_support_and_normalisation(rng):
    for _ in range(1000):
        w1 = int(rng.integers(1, 40))
        w0 = int(rng.integers(w1, 60))
        pmf = dmin2_pmf(w0, w1)
        assert sum(pmf.values()) == 1
        assert min(pmf) == w1 and max(pmf) == w1 + min(w0 // 2, w0 - w1)


def test_dmin2_against_direct_enumeration():
    # exact oracle: enumerate every split pattern h of the first block
    for w0, w1 in [(5, 2), (6, 3), (8, 8), (7, 1)]:
        pmf = dmin2_pmf(w0, w1)
        ref = {}
        for h in range(1 << w0):
            hw = bin(h).count("1")
            d = min(w0, w1 + hw, w1 + w0 - hw)
            ref[d] = ref.get(d, 0) + Fraction(1, 1 << w0)
        assert pmf == ref


def test_union_bound():
    sigma = 0.9
    assert union_bound(sgmc_spectrum(Profile((6,))), sigma) == pytest.approx(stats.norm.sf(math.sqrt(6) / sigma), rel=1e-12)
    s = sgmc_spectrum(rm_profile(2, 5))
    vals = [union_bound(s, sg, clip=False) for sg in (1.2, 1.0, 0.8, 0.6)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert union_bound(s, 5.0) == 1.0
    with pytest.raises(ValueError):
        union_bound(s, 0.0)


def test_code_spectrum_matches_bruteforce(code16):
    from sgmc.spectrum import code_spectrum

    G = np.asarray(code16.bits).astype(np.int64)
    msgs = (np.arange(1 << G.shape[0])[:, None] >> np.arange(G.shape[0])) & 1
    ref = np.bincount((msgs @ G % 2).sum(1), minlength=G.shape[1] + 1)
    s = code_spectrum(code16.generator)
    assert [int(a) for a in s.coefficients] == ref.tolist()
    assert s.total == 1 << G.shape[0]


def test_code_spectrum_rejects_large_k():
    from sgmc.construction import nu_profile, sample_generator
    from sgmc.spectrum import code_spectrum

    with pytest.raises(ValueError):
        code_spectrum(sample_generator(nu_profile(64, 32, 14), 1).generator)
