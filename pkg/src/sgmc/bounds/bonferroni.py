"""Second-order Bonferroni lower bound on the ML frame error rate.

With the all-zero codeword sent, ``E_i`` is the event that codeword ``c_i`` is
at least as likely.  Under BPSK/AWGN, ``E_i`` is a half-space event of a unit
normal, pairs of events are jointly normal with correlation ``rho_ij``, and
both probabilities have finite-range (Craig-type) integral forms.
"""

from __future__ import annotations

import math
from collections import Counter
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from ..construction import SgmcCode
from ..gf2 import popcount_words, subcode_words

UNIT = "unit"
LITERAL = "literal"
EPSREL = 1e-10
MAX_CODEWORDS = 4096


def craig_x(weight: float, sigma: float, mode: str = UNIT) -> float:
    """Argument of Q for a weight-W codeword.

    ``unit``: Q(sqrt(W)/sigma), the exact pairwise error probability.
    ``literal``: the integrand exp(-W/(sigma^2 sin^2)), i.e. Q(sqrt(2W)/sigma).
    """
    if mode == UNIT:
        return math.sqrt(weight) / sigma
    if mode == LITERAL:
        return math.sqrt(2.0 * weight) / sigma
    raise ValueError(f"unknown mode {mode!r}")


def craig_q(x: float) -> float:
    """``Q(x) = (1/pi) int_0^{pi/2} exp(-x^2 / (2 sin^2 t)) dt`` for x >= 0."""
    if x < 0:
        raise ValueError("Craig's form needs x >= 0")
    if x == 0:
        return 0.5
    val, _ = quad(lambda t: math.exp(-x * x / (2.0 * math.sin(t) ** 2)), 0.0, math.pi / 2, epsabs=0.0, epsrel=EPSREL, limit=200)
    return val / math.pi


def correlation(w_i: int, w_j: int, w_ij: int) -> float:
    """``rho_ij = (W_i + W_j - W(c_i ^ c_j)) / (2 sqrt(W_i W_j))`` (overlap over geometric mean)."""
    if w_i <= 0 or w_j <= 0:
        raise ValueError("codeword weights must be positive")
    return (w_i + w_j - w_ij) / (2.0 * math.sqrt(w_i * w_j))


def _psi_part(x: float, rho: float, upper: float) -> float:
    if upper <= 0.0:
        return 0.0
    c = 1.0 - rho * rho
    r = math.sqrt(c)

    def f(t):
        st = math.sin(t)
        if st == 0.0:
            return 0.0
        d = 1.0 - rho * math.sin(2.0 * t)
        return r / d * math.exp(-x * x * d / (2.0 * c * st * st))

    val, _ = quad(f, 0.0, upper, epsabs=0.0, epsrel=EPSREL, limit=200)
    return val / (2.0 * math.pi)


def psi(x: float, y: float, rho: float) -> float:
    """Bivariate tail ``Pr{X >= x, Y >= y}`` for unit normals with correlation rho (x, y >= 0).

    Finite-range integral form with the ``sqrt(1 - rho^2)`` prefactor.
    """
    if x < 0 or y < 0:
        raise ValueError("psi needs x, y >= 0")
    if not -1.0 < rho < 1.0:
        raise ValueError("degenerate correlation (identical codewords)")
    if x == 0.0 and y == 0.0:
        return 0.25 + math.asin(rho) / (2.0 * math.pi)
    th = math.atan2(y, x)
    return _psi_part(x, rho, math.pi / 2 - th) + _psi_part(y, rho, th)


@lru_cache(maxsize=1 << 16)
def _pair_prob(w_i: int, w_j: int, w_ij: int, sigma: float, mode: str) -> float:
    rho = correlation(w_i, w_j, w_ij)
    return psi(craig_x(w_i, sigma, mode), craig_x(w_j, sigma, mode), rho)


@lru_cache(maxsize=1 << 12)
def _single_prob(w: int, sigma: float, mode: str) -> float:
    return craig_q(craig_x(w, sigma, mode))


def select_codewords(code: SgmcCode, count: int = 1023, order: str = "subcode") -> np.ndarray:
    """Packed nonzero codewords used by the bound.

    ``subcode``: all nonzero words of the subcode spanned by the first j rows,
    j = floor(log2(count + 1)).  ``lowest``: the ``count`` lowest-weight
    nonzero codewords (ties by message index), needs k <= 24.
    """
    if count < 1:
        raise ValueError("need at least one codeword")
    if count > MAX_CODEWORDS:
        raise ValueError(f"at most {MAX_CODEWORDS} codewords (pairwise cost is quadratic)")
    G = code.generator
    if order == "subcode":
        j = min(int(math.floor(math.log2(count + 1))), G.rows)
        return subcode_words(G, j)[1:]
    if order == "lowest":
        if G.rows > 24:
            raise ValueError("lowest-weight selection enumerates the code; k <= 24 required")
        words = subcode_words(G, G.rows)[1:]
        w = popcount_words(words)
        idx = np.argsort(w, kind="stable")[:count]
        return words[np.sort(idx)]
    raise ValueError(f"unknown order {order!r}")


def pair_statistics(words: np.ndarray) -> tuple[Counter, Counter]:
    """Counts of single weights and of unordered (W_i, W_j, W_ij) pair triples."""
    w = popcount_words(words)
    if len(set(map(bytes, words))) != len(words):
        raise ValueError("selected codewords must be distinct")
    singles = Counter(w.tolist())
    pairs: Counter = Counter()
    for i in range(len(words) - 1):
        wij = popcount_words(words[i + 1 :] ^ words[i])
        wj = w[i + 1 :]
        lo = np.minimum(wj, w[i])
        hi = np.maximum(wj, w[i])
        keys = lo.astype(np.int64) * 1_000_000 + hi.astype(np.int64) * 1000 + wij
        uniq, cnt = np.unique(keys, return_counts=True)
        for key, c in zip(uniq.tolist(), cnt.tolist()):
            pairs[(key // 1_000_000, (key // 1000) % 1000, key % 1000)] += c
    return singles, pairs


def bonferroni_lb(code: SgmcCode, sigma: float, subset_spec=1023, mode: str = UNIT) -> float:
    """``sum_i Pr{E_i} - sum_{i<j} Pr{E_i and E_j}`` over the selected codewords (floored at 0).

    ``subset_spec`` is a codeword count (subcode selection), a
    ``(count, order)`` pair, or an explicit packed array of codewords.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if isinstance(subset_spec, np.ndarray):
        words = subset_spec
    elif isinstance(subset_spec, tuple):
        words = select_codewords(code, *subset_spec)
    else:
        words = select_codewords(code, int(subset_spec))
    singles, pairs = pair_statistics(words)
    first = sum(c * _single_prob(w, float(sigma), mode) for w, c in singles.items())
    second = sum(c * _pair_prob(a, b, d, float(sigma), mode) for (a, b, d), c in pairs.items())
    return max(0.0, first - second)


__all__ = [
    "UNIT",
    "LITERAL",
    "craig_q",
    "craig_x",
    "correlation",
    "psi",
    "select_codewords",
    "pair_statistics",
    "bonferroni_lb",
]
