"""Partial mutual information, Gallager's E0 with a biased input, and the staircase exponent.

Everything is in bits.  The input distribution puts mass p on symbol 1; the
all-ones staircase block corresponds to p = 1 and the random part to p = 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from ..channel import AWGN, BSC, ChannelSpec
from ..construction import Profile

LN2 = math.log(2.0)
QUAD_EPSREL = 1e-10


@dataclass(frozen=True)
class ExponentSpec:
    """Channel plus the tolerance of the maximisation over gamma."""

    channel: ChannelSpec
    gamma_tol: float = 1e-6


@dataclass(frozen=True)
class StaircaseExponent:
    exponents: tuple[float, ...]
    gammas: tuple[float, ...]
    bound: float
    terms: tuple[float, ...] = field(repr=False, default=())


def _check_p(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")


def _awgn_expect(sigma: float, fn) -> float:
    """E over y ~ N(1, sigma^2) of fn(llr), by adaptive quadrature."""
    mu = 2.0 / sigma**2
    norm = 1.0 / math.sqrt(2.0 * math.pi * sigma**2)

    def integrand(y):
        return norm * math.exp(-((y - 1.0) ** 2) / (2.0 * sigma**2)) * fn(mu * y)

    val, _ = quad(integrand, -1.0 - 10.0 * sigma, 1.0 + 10.0 * sigma, epsrel=QUAD_EPSREL, epsabs=0.0, limit=400)
    return val


def _log1p_mix(p: float, x: float) -> float:
    """log((1 - p) + p exp(x)) without overflow."""
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return x
    return float(np.logaddexp(math.log1p(-p), math.log(p) + x))


def partial_mutual_info(channel: ChannelSpec, p: float) -> tuple[float, float, float]:
    """``(I0, I1, I)`` with ``I = (1-p) I0 + p I1`` for input bias p.

    ``I0 = E_{y|0} log P(y|0)/P(y)`` and ``I1 = E_{y|1} log P(y|1)/P(y)``
    with ``P(y) = (1-p) P(y|0) + p P(y|1)``.  By channel symmetry
    ``I1(p) = I0(1-p)``.
    """
    _check_p(p)

    def i0(pp):
        if pp == 0.0:
            return 0.0
        if channel.kind == BSC:
            e = channel.epsilon
            out = 0.0
            for p0, p1 in ((1 - e, e), (e, 1 - e)):
                out -= p0 * _log1p_mix(pp, math.log(p1 / p0))
            return out / LN2
        # log P(y|1)/P(y|0) = -llr
        return -_awgn_expect(channel.sigma, lambda l: _log1p_mix(pp, -l)) / LN2

    a, b = i0(p), i0(1.0 - p)
    return a, b, (1.0 - p) * a + p * b


def gallager_e0(channel: ChannelSpec, p: float, gamma: float) -> float:
    """``-log2 sum_y P(y|0)^s [(1-p) P(y|0)^s + p P(y|1)^s]^gamma`` with s = 1/(1+gamma)."""
    _check_p(p)
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    if gamma == 0.0:
        return 0.0
    return _e0(channel, float(p), float(gamma))


@lru_cache(maxsize=4096)
def _e0(channel: ChannelSpec, p: float, gamma: float) -> float:
    s = 1.0 / (1.0 + gamma)
    if channel.kind == BSC:
        e = channel.epsilon
        tot = 0.0
        for p0, p1 in ((1 - e, e), (e, 1 - e)):
            tot += p0 * math.exp(gamma * _log1p_mix(p, s * math.log(p1 / p0)))
        return -math.log2(tot)
    # factor P(y|0) out: E_{y|0}[((1-p) + p exp(-s llr))^gamma]
    val = _awgn_expect(channel.sigma, lambda l: math.exp(gamma * _log1p_mix(p, -s * l)))
    return -math.log2(val)


def _ternary_max(f, lo: float, hi: float, tol: float) -> tuple[float, float]:
    while hi - lo > tol:
        a = lo + (hi - lo) / 3.0
        b = hi - (hi - lo) / 3.0
        if f(a) < f(b):
            lo = a
        else:
            hi = b
    g = 0.5 * (lo + hi)
    # the concave objective is 0 at gamma = 0; never report a negative maximum
    best = max((f(g), g), (f(0.0), 0.0))
    return best


def staircase_exponent(profile: Profile, channel: ChannelSpec | ExponentSpec, gamma_tol: float = 1e-6) -> StaircaseExponent:
    """Per-staircase exponents and the ensemble FER bound ``sum_l 2**(-n_l E_l)`` (clipped at 1).

    ``E_l = max_gamma [(n_l - w_l)/n_l E0(1/2, g) + w_l/n_l E0(1, g) - g R_l]``.
    """
    if isinstance(channel, ExponentSpec):
        gamma_tol = channel.gamma_tol
        channel = channel.channel
    exps, gams, terms = [], [], []
    for w, nl, rl in zip(profile.widths, profile.ends, profile.rates):
        a = (nl - w) / nl
        b = w / nl

        def obj(g, a=a, b=b, rl=rl):
            return a * gallager_e0(channel, 0.5, g) + b * gallager_e0(channel, 1.0, g) - g * rl

        e, g = _ternary_max(obj, 0.0, 1.0, gamma_tol)
        exps.append(e)
        gams.append(g)
        terms.append(2.0 ** (-nl * e))
    return StaircaseExponent(tuple(exps), tuple(gams), min(1.0, float(sum(terms))), tuple(terms))


def exponent_slope_at_zero(profile: Profile, channel: ChannelSpec) -> tuple[float, ...]:
    """Derivative of each objective at gamma = 0: ``(n_l-w_l)/n_l I0(1/2) + w_l/n_l I0(1) - R_l``."""
    i_half = partial_mutual_info(channel, 0.5)[0]
    i_one = partial_mutual_info(channel, 1.0)[0]
    return tuple(
        (nl - w) / nl * i_half + w / nl * i_one - rl for w, nl, rl in zip(profile.widths, profile.ends, profile.rates)
    )


__all__ = [
    "ExponentSpec",
    "StaircaseExponent",
    "partial_mutual_info",
    "gallager_e0",
    "staircase_exponent",
    "exponent_slope_at_zero",
    "AWGN",
]
