import math

import numpy as np
import pytest
from scipy import integrate

from sgmc.bounds.exponent import (
    ExponentSpec,
    exponent_slope_at_zero,
    gallager_e0,
    partial_mutual_info,
    staircase_exponent,
)
from sgmc.channel import ChannelSpec
from sgmc.construction import Profile, nu_profile


def h2(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def test_bsc_closed_forms():
    b = ChannelSpec.bsc(0.11)
    i0, i1, i = partial_mutual_info(b, 0.5)
    assert i == pytest.approx(1 - h2(0.11), abs=1e-12)
    # 1 - H2(0.11) = 0.50008, quoted to four places as 0.5002
    assert i == pytest.approx(0.5002, abs=2e-4)
    assert i0 == pytest.approx(i1, abs=1e-12)
    assert gallager_e0(b, 0.5, 1.0) == pytest.approx(1 - math.log2(1 + 2 * math.sqrt(0.11 * 0.89)), abs=1e-12)
    assert gallager_e0(b, 0.5, 1.0) == pytest.approx(0.29877, abs=1e-4)
    assert gallager_e0(b, 1.0, 1.0) == pytest.approx(-math.log2(2 * math.sqrt(0.11 * 0.89)), abs=1e-12)


def test_partial_mutual_info_endpoints_and_symmetry():
    for ch in (ChannelSpec.bsc(0.07), ChannelSpec.awgn(0.9)):
        assert partial_mutual_info(ch, 0.0)[0] == 0.0
        i0, i1, i = partial_mutual_info(ch, 0.5)
        assert i0 == pytest.approx(i1, abs=1e-9) and i == pytest.approx(i0, abs=1e-9)
        a = partial_mutual_info(ch, 0.3)
        b = partial_mutual_info(ch, 0.7)
        assert a[1] == pytest.approx(b[0], abs=1e-12)
        grid = [partial_mutual_info(ch, p)[0] for p in np.linspace(0, 1, 11)]
        assert all(x < y for x, y in zip(grid, grid[1:]))
    with pytest.raises(ValueError):
        partial_mutual_info(ChannelSpec.bsc(0.1), 1.5)


def test_awgn_capacity_against_direct_integral():
    sigma = 0.8

    def dens(y, x):
        return math.exp(-((y - x) ** 2) / (2 * sigma**2)) / math.sqrt(2 * math.pi * sigma**2)

    def integrand(y):
        p0, p1 = dens(y, 1), dens(y, -1)
        py = 0.5 * (p0 + p1)
        return 0.5 * (p0 * math.log2(p0 / py) + (p1 * math.log2(p1 / py) if p1 > 0 else 0))

    ref, _ = integrate.quad(integrand, -12, 12, epsabs=1e-13, limit=200)
    assert partial_mutual_info(ChannelSpec.awgn(sigma), 0.5)[2] == pytest.approx(ref, abs=1e-8)


def test_e0_properties():
    for ch in (ChannelSpec.bsc(0.05), ChannelSpec.awgn(1.0)):
        for p in (0.0, 0.3, 0.5, 1.0):
            assert gallager_e0(ch, p, 0.0) == 0.0
            vals = [gallager_e0(ch, p, g) for g in np.linspace(0, 1, 11)]
            assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
    ch = ChannelSpec.awgn(1.0)
    # derivative at gamma = 0 equals the partial mutual information
    g = 1e-5
    assert gallager_e0(ch, 0.5, g) / g == pytest.approx(partial_mutual_info(ch, 0.5)[0], rel=1e-3)
    with pytest.raises(ValueError):
        gallager_e0(ch, 0.5, 1.5)


def test_exponent_positivity_matches_slope_test():
    p = nu_profile(32, 16, 8)
    for eps in (0.03, 0.05, 0.12, 0.2):
        ch = ChannelSpec.bsc(eps)
        r = staircase_exponent(p, ch)
        slopes = exponent_slope_at_zero(p, ch)
        for e, s in zip(r.exponents, slopes):
            assert (e > 1e-12) == (s > 0)
        assert all(0.0 <= g <= 1.0 for g in r.gammas)


def test_zero_exponent_above_capacity():
    # rates at or above capacity give E = 0 at gamma = 0
    r = staircase_exponent(Profile((2, 1, 1, 1)), ChannelSpec.bsc(0.3))
    assert r.exponents[-1] == 0.0 and r.gammas[-1] == 0.0
    assert r.bound == 1.0


def test_bound_decreases_with_noise():
    p = nu_profile(32, 16, 8)
    bounds = [staircase_exponent(p, ExponentSpec(ChannelSpec.bsc(e))).bound for e in (0.05, 0.04, 0.03, 0.02, 0.01)]
    assert all(b < a for a, b in zip(bounds, bounds[1:]))
    r = staircase_exponent(p, ChannelSpec.awgn(0.6))
    assert r.bound == pytest.approx(min(1.0, sum(2 ** (-nl * e) for nl, e in zip(p.ends, r.exponents))))
