"""Ensemble weight spectra, the d_min,2 distribution and the union bound.

Spectra are kept as exact :class:`fractions.Fraction` coefficients; floats
appear only when a bound is evaluated or a table is written.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from math import comb, floor, log, sqrt
from pathlib import Path

import numpy as np
from scipy.special import log_ndtr, logsumexp

from .construction import Profile
from .gf2 import BitMatrix, popcount_words, subcode_words

MAX_ENUM_ROWS = 24


@dataclass(frozen=True)
class WeightSpectrum:
    """Average number ``A_d`` of codewords of weight d, for d = 0..n."""

    coefficients: tuple[Fraction, ...]

    @property
    def n(self) -> int:
        return len(self.coefficients) - 1

    @property
    def total(self) -> Fraction:
        return sum(self.coefficients, Fraction(0))

    def values(self) -> np.ndarray:
        return np.array([float(a) for a in self.coefficients])

    def __getitem__(self, d: int) -> Fraction:
        return self.coefficients[d]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["d", "A_d"])
            for d, a in enumerate(self.coefficients):
                w.writerow([d, repr(float(a))])


def _binomial_row(m: int) -> list[Fraction]:
    scale = Fraction(1, 1 << m)
    return [comb(m, d) * scale for d in range(m + 1)]


def sgmc_spectrum(profile: Profile) -> WeightSpectrum:
    """``1 + sum_l 2**l X**w_l (1/2 + X/2)**(n_l - w_l)``, expanded exactly.

    Codewords whose leading message bit is l are the all-ones staircase block
    (weight w_l) plus ``n_l - w_l`` uniform bits, and there are 2**l of them.
    """
    n = profile.n
    coef = [Fraction(0)] * (n + 1)
    coef[0] = Fraction(1)
    for l, (w, nl) in enumerate(zip(profile.widths, profile.ends)):
        row = _binomial_row(nl - w)
        mult = 1 << l
        for d, c in enumerate(row):
            coef[w + d] += mult * c
    return WeightSpectrum(tuple(coef))


def random_code_spectrum(n: int, k: int) -> WeightSpectrum:
    """Totally random generator: ``1 + (2**k - 1)(1/2 + X/2)**n``."""
    if n < 1 or k < 0:
        raise ValueError("need n >= 1 and k >= 0")
    mult = (1 << k) - 1
    coef = [mult * c for c in _binomial_row(n)]
    coef[0] += 1
    return WeightSpectrum(tuple(coef))


def code_spectrum(G: BitMatrix) -> WeightSpectrum:
    """Exact weight distribution of one code, by enumerating its 2**k codewords."""
    if G.rows > MAX_ENUM_ROWS:
        raise ValueError(f"enumeration limited to k <= {MAX_ENUM_ROWS}, got {G.rows}")
    counts = np.bincount(popcount_words(subcode_words(G, G.rows)), minlength=G.cols + 1)
    return WeightSpectrum(tuple(Fraction(int(c)) for c in counts))


def dmin2_pmf(w0: int, w1: int) -> dict[int, Fraction]:
    """Distribution of the minimum distance of the subcode spanned by the first two rows.

    With h the random part of row 1 over the first block, the three nonzero
    weights are w0, w1 + |h| and w1 + w0 - |h|, so d = w1 + min(|h|, w0 - |h|)
    capped at w0.  ``Pr{d = w1 + i} = C(w0, i) 2**(1 - w0)`` below the cap and
    the remaining mass sits at the cap.
    """
    if w1 < 1 or w0 < w1:
        raise ValueError(f"need w0 >= w1 >= 1, got w0={w0}, w1={w1}")
    cap = min(w0 // 2, w0 - w1)
    pmf: dict[int, Fraction] = {}
    acc = Fraction(0)
    for i in range(cap):
        p = Fraction(comb(w0, i), 1 << (w0 - 1))
        pmf[w1 + i] = p
        acc += p
    pmf[w1 + cap] = 1 - acc
    return pmf


def dmin2_ccdf(w0: int, w1: int) -> dict[int, Fraction]:
    """``Pr{d >= x}`` at every support point x."""
    pmf = dmin2_pmf(w0, w1)
    out, tail = {}, Fraction(0)
    for d in sorted(pmf, reverse=True):
        tail += pmf[d]
        out[d] = tail
    return dict(sorted(out.items()))


def log_union_bound(spectrum: WeightSpectrum, sigma: float) -> float:
    """Natural log of ``sum_{d>=1} A_d Q(sqrt(d)/sigma)``."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    terms = [
        log(a.numerator) - log(a.denominator) + float(log_ndtr(-sqrt(d) / sigma))
        for d, a in enumerate(spectrum.coefficients)
        if d >= 1 and a > 0
    ]
    return float(logsumexp(terms)) if terms else float("-inf")


def union_bound(spectrum: WeightSpectrum, sigma: float, clip: bool = True) -> float:
    """Union bound on the FER with pairwise error probability Q(sqrt(d)/sigma)."""
    v = float(np.exp(log_union_bound(spectrum, sigma)))
    return min(1.0, v) if clip else v


def low_weight_fraction(spectrum: WeightSpectrum, d: int) -> float:
    """Average number of codewords of weight in [1, d]."""
    return float(sum(spectrum.coefficients[1 : floor(d) + 1], Fraction(0)))


__all__ = [
    "WeightSpectrum",
    "sgmc_spectrum",
    "random_code_spectrum",
    "code_spectrum",
    "dmin2_pmf",
    "dmin2_ccdf",
    "union_bound",
    "log_union_bound",
    "low_weight_fraction",
]
