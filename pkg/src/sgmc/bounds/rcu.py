"""Random-coding union bounds: the per-staircase (partial) RCU and the conventional RCU.

With the all-zero codeword sent over BPSK/AWGN, a codeword c beats it when
``sum_{t in supp c} llr_t <= 0``.  A codeword whose leading message bit is l
consists of the all-ones block l (w_l positions, LLR sum B) plus uniform bits
on the first m = n_{l-1} positions, so its pairwise error probability given Y
is ``F_m(-B)`` with F_m the CDF of the random subset sum ``sum_t b_t llr_t``.

Estimation strategy (per outer sample of the first m positions):

* F_m is built for every nested prefix in one pass of a mass-splitting
  (linear binning) convolution on a fixed absolute grid.
* B ~ N(w mu, 2 w mu) with mu = 2/sigma**2 is integrated in closed form.
* Importance sampling uses the letter-wise random-coding tilt; samples of
  several tilt strengths are pooled with balance-heuristic weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln, log_ndtr, logsumexp, ndtr

from .._jit import njit
from ..channel import AWGN, ChannelSpec, q_function
from ..construction import Profile
from ..rng import gaussian, key_of

ENUM_MAX = 22
DROP_LOG = math.log(1e-40)
DEFAULT_TILTS = (0.0, 0.25, 0.5, 0.75, 1.0)


# --------------------------------------------------------------------------- PEP


def _half_sums(lam: np.ndarray) -> np.ndarray:
    s = np.zeros(1)
    for v in lam:
        s = np.concatenate([s, s + v])
    return s


def _pep_enum(lam: np.ndarray, block_sum: float) -> float:
    h = len(lam) // 2
    a = _half_sums(lam[:h])
    b = np.sort(_half_sums(lam[h:]))
    # count pairs with a + b + block_sum <= 0
    cnt = np.searchsorted(b, -block_sum - a, side="right").sum()
    return float(cnt) / float(1 << len(lam))


@njit(nogil=True)
def _dp_round(lam_idx, nb, off):
    """Exact distribution of sum b_t * lam_idx[t] (integer shifts) on a grid."""
    cur = np.zeros(nb)
    nxt = np.zeros(nb)
    cur[off] = 1.0
    for t in range(lam_idx.shape[0]):
        s = lam_idx[t]
        for j in range(nb):
            nxt[j] = 0.5 * cur[j]
        for j in range(nb):
            v = cur[j]
            if v != 0.0:
                nxt[j + s] += 0.5 * v
        cur, nxt = nxt, cur
    return cur


@njit(nogil=True)
def _dp_split(lam, q, nb, off):
    """Mean preserving (linear binning) approximation of the subset-sum law."""
    cur = np.zeros(nb)
    nxt = np.zeros(nb)
    cur[off] = 1.0
    for t in range(lam.shape[0]):
        sh = lam[t] / q
        i0 = int(math.floor(sh))
        f = sh - i0
        for j in range(nb):
            nxt[j] = 0.5 * cur[j]
        for j in range(nb):
            v = cur[j]
            if v != 0.0:
                nxt[j + i0] += 0.5 * v * (1.0 - f)
                nxt[j + i0 + 1] += 0.5 * v * f
        cur, nxt = nxt, cur
    return cur


def pep_bracket(lambda_random, block_sum: float, q: float) -> tuple[float, float, float]:
    """Quantized DP: (lower, estimate, upper) for Pr{sum b_t lam_t + block_sum <= 0}.

    Rounding every LLR up (down) to the grid can only decrease (increase) the
    error event, which gives the brackets; linear binning gives the estimate.
    """
    lam = np.asarray(lambda_random, dtype=np.float64)
    if lam.size == 0:
        v = 1.0 if block_sum <= 0 else 0.0
        return v, v, v
    neg = np.minimum(lam, 0).sum()
    pos = np.maximum(lam, 0).sum()
    # each rounded step can overshoot by one bin
    off = int(math.floor(-neg / q)) + lam.size + 2
    nb = off + int(math.ceil(pos / q)) + lam.size + 3
    vals = (np.arange(nb) - off) * q

    def cdf(dist):
        return float(dist[vals + block_sum <= 1e-12 * q].sum())

    lo = cdf(_dp_round(np.ceil(lam / q).astype(np.int64), nb, off))
    hi = cdf(_dp_round(np.floor(lam / q).astype(np.int64), nb, off))
    est = cdf(_dp_split(lam, q, nb, off))
    return min(lo, 1.0), min(max(est, lo), hi), min(hi, 1.0)


def pep_exact(lambda_random, block_sum: float, q: float | None = None) -> float:
    """Pr over uniform b in F_2^m that ``sum b_t lam_t + block_sum <= 0``.

    Exact (meet in the middle) for m <= 22; otherwise the linear-binning DP
    estimate, whose floor/ceil brackets are available from :func:`pep_bracket`.
    """
    lam = np.asarray(lambda_random, dtype=np.float64).reshape(-1)
    if lam.size <= ENUM_MAX:
        if lam.size == 0:
            return 1.0 if block_sum <= 0 else 0.0
        return _pep_enum(lam, float(block_sum))
    if q is None:
        q = max(np.abs(lam).mean(), 1e-12) / 200.0
    return pep_bracket(lam, block_sum, q)[1]


# --------------------------------------------------------------------------- kernel


@njit(nogil=True)
def _rcu_kernel(lam, q, off, nb, drop_tail, term_m, term_M, term_tab, tables, out_G, out_H):
    """Per-sample clipped (G) and unclipped (H) union terms.

    lam:       (S, m_max) LLRs of the random positions.
    drop_tail: (S, m_max + 1) grid index above which mass is discarded after
               t positions (it can no longer reach any needed value).
    term_m:    increasing prefix lengths; term_M multiplicities; term_tab the
               row of ``tables`` holding Pr{B <= -t_j} on the grid.
    """
    S = lam.shape[0]
    T = term_m.shape[0]
    cur = np.zeros(nb)
    nxt = np.zeros(nb)
    for s in range(S):
        for j in range(nb):
            cur[j] = 0.0
            nxt[j] = 0.0
        cur[off] = 1.0
        jmin = off
        jmax = off
        ti = 0
        t = 0
        while ti < T:
            while ti < T and term_m[ti] == t:
                tab = tables[term_tab[ti]]
                M = term_M[ti]
                cum = 0.0
                jstar = -1
                for j in range(jmin, jmax + 1):
                    cum += cur[j]
                    if M * cum >= 1.0:
                        jstar = j
                        break
                h = 0.0
                for j in range(jmin, jmax + 1):
                    h += cur[j] * tab[j]
                h *= M
                if jstar < 0:
                    g = h
                else:
                    pst = tab[jstar]
                    g = 0.0
                    for j in range(jmin, jstar):
                        g += cur[j] * (tab[j] - pst)
                    g = pst + M * g
                out_G[s, ti] = min(g, 1.0)
                out_H[s, ti] = h
                ti += 1
            if ti >= T:
                break
            sh = lam[s, t] / q
            i0 = int(math.floor(sh))
            f = sh - i0
            lo = jmin + min(i0, 0)
            hi = jmax + max(i0 + 1, 0)
            for j in range(lo, hi + 1):
                nxt[j] = 0.0
            for j in range(jmin, jmax + 1):
                v = 0.5 * cur[j]
                nxt[j] += v
                nxt[j + i0] += v * (1.0 - f)
                nxt[j + i0 + 1] += v * f
            for j in range(jmin, jmax + 1):
                cur[j] = 0.0
            cur, nxt = nxt, cur
            t += 1
            cap = drop_tail[s, t]
            if hi > cap:
                for j in range(cap + 1, hi + 1):
                    cur[j] = 0.0
                hi = cap
            while lo < hi and cur[lo] == 0.0:
                lo += 1
            while hi > lo and cur[hi] == 0.0:
                hi -= 1
            jmin = lo
            jmax = hi


# --------------------------------------------------------------------------- estimates


@dataclass(frozen=True)
class RcuEstimate:
    """Monte-Carlo estimate of a union-type bound with a 95% interval."""

    value: float
    stderr: float
    terms: np.ndarray = field(repr=False)
    term_stderr: np.ndarray = field(repr=False)
    n_outer: int = 0

    @property
    def ci(self) -> tuple[float, float]:
        return max(0.0, self.value - 1.96 * self.stderr), min(1.0, self.value + 1.96 * self.stderr)


def _log_binom(m: int) -> np.ndarray:
    d = np.arange(m + 1)
    return gammaln(m + 1) - gammaln(d + 1) - gammaln(m - d + 1) - m * math.log(2.0)


def log_union_term(m: int, w: int, M: float, sigma: float) -> float:
    """log of ``M sum_d C(m,d) 2**-m Q(sqrt(w+d)/sigma)`` (``Q(0)`` counted as 1 at w+d=0)."""
    d = np.arange(m + 1)
    wd = w + d
    lq = np.where(wd > 0, log_ndtr(-np.sqrt(wd) / sigma), 0.0)
    return math.log(M) + float(logsumexp(_log_binom(m) + lq))


def _phi_table(w: int, mu: float, vals: np.ndarray) -> np.ndarray:
    """Pr{B <= -t} on the grid; B ~ N(w mu, 2 w mu), or B = 0 when w = 0."""
    if w == 0:
        return (vals <= 1e-9).astype(np.float64)
    return ndtr((-vals - w * mu) / math.sqrt(2.0 * w * mu))


def _drop_level(w: int, mu: float, M: float) -> float:
    """Largest t worth keeping: beyond it M Pr{B <= -t} < 1e-40."""
    if w == 0:
        return 0.0
    sd = math.sqrt(2.0 * w * mu)
    target = DROP_LOG - math.log(M)
    f = lambda t: float(log_ndtr((-t - w * mu) / sd)) - target  # noqa: E731
    hi = w * mu + sd
    while f(hi) > 0:
        hi *= 2.0
    return brentq(f, -w * mu - 50 * sd, hi, xtol=1e-6)


@lru_cache(maxsize=8)
def _normals(seed: int, n_outer: int, m: int) -> np.ndarray:
    z = gaussian(key_of(seed, 0x52435500), n_outer * m).reshape(n_outer, m)
    z.setflags(write=False)
    return z


def _log_tilt(y: np.ndarray, sigma: float, rho: float) -> np.ndarray:
    s = 1.0 / (1.0 + rho)
    return rho * (np.logaddexp(0.0, -s * (2.0 / sigma**2) * y) - math.log(2.0))


@lru_cache(maxsize=64)
def _tilt_table(sigma: float, rho: float, npts: int = 20001):
    """Grid, normalised CDF and log normaliser of the tilted letter density."""
    s = 1.0 / (1.0 + rho)
    lo = min(1.0, 1.0 - 2.0 * s * rho) - 14.0 * sigma
    grid = np.linspace(lo, 1.0 + 14.0 * sigma, npts)
    logd = -((grid - 1.0) ** 2) / (2.0 * sigma**2) + _log_tilt(grid, sigma, rho)
    top = logd.max()
    dens = np.exp(logd - top)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))])
    mass = cdf[-1]
    log_z = math.log(mass) + top - 0.5 * math.log(2.0 * math.pi * sigma**2)
    return grid, cdf / mass, log_z


def tilted_outputs(z: np.ndarray, u: np.ndarray, sigma: float, rho: float) -> np.ndarray:
    """Channel outputs drawn from the letter-wise tilt at strength ``rho``.

    The tilt is ``Q(y) ~ P(y|0) ((1 + exp(-s llr(y)))/2)**rho`` with
    ``s = 1/(1+rho)``, the change of measure under which the random-coding
    error event becomes typical; ``rho = 0`` is the channel itself.  Samples
    come from the tabulated inverse CDF at the uniforms ``u`` so that the
    same random numbers are reused across rho and sigma.
    """
    if rho == 0.0:
        return 1.0 + sigma * z
    grid, cdf, _ = _tilt_table(float(sigma), float(rho))
    return np.interp(u, cdf, grid)


def tilt_log_ratio(y: np.ndarray, sigma: float, rho: float) -> np.ndarray:
    """Per-letter ``log Q_rho(y) - log P(y|0)``."""
    if rho == 0.0:
        return np.zeros_like(y)
    return _log_tilt(y, sigma, rho) - _tilt_table(float(sigma), float(rho))[2]


def _estimate(terms_spec, m_max, sigma, n_outer, seed, tilts, q_rel) -> RcuEstimate:
    """Shared driver; ``terms_spec`` is a list of (m, w, M).

    Samples from every tilt are pooled and weighted with the balance
    heuristic ``P / mean_a Q_a`` (multiple importance sampling), which is
    unbiased whatever the tilts and needs no variance estimates.
    """
    mu = 2.0 / sigma**2
    q = q_rel * mu
    z = _normals(seed, n_outer, max(m_max, 1))[:, :m_max]
    u = ndtr(z)
    A = len(tilts)
    T = len(terms_spec)
    term_m = np.array([t[0] for t in terms_spec], np.int64)
    term_M = np.array([t[2] for t in terms_spec], np.float64)
    widths = sorted({t[1] for t in terms_spec})
    term_tab = np.array([widths.index(t[1]) for t in terms_spec], np.int64)
    keep = max(_drop_level(w, mu, M) for _, w, M in terms_spec)

    y = np.concatenate([tilted_outputs(z, u, sigma, rho) for rho in tilts], axis=0)
    S = y.shape[0]
    # log Q_a / P on every prefix, for every tilt a
    logr = np.empty((A, S, T))
    for a, rho in enumerate(tilts):
        c = np.concatenate([np.zeros((S, 1)), np.cumsum(tilt_log_ratio(y, sigma, rho), axis=1)], axis=1)
        logr[a] = c[:, term_m]
    wts = np.exp(-(logsumexp(logr, axis=0) - math.log(A)))

    lam = mu * y
    negsum = np.minimum(lam, 0.0)
    tail = np.concatenate([np.cumsum(negsum[:, ::-1], axis=1)[:, ::-1], np.zeros((S, 1))], axis=1)
    lo = negsum.sum(axis=1).min()
    hi = np.maximum(lam, 0.0).sum(axis=1).max()
    off = int(math.floor(-lo / q)) + m_max + 2
    nb = off + int(math.ceil(hi / q)) + m_max + 4
    drop = np.minimum(off + np.floor((keep - tail) / q).astype(np.int64) + 1, nb - 2)
    vals = (np.arange(nb) - off) * q
    tables = np.stack([_phi_table(w, mu, vals) for w in widths])
    G = np.zeros((S, T))
    H = np.zeros((S, T))
    _rcu_kernel(np.ascontiguousarray(lam), q, off, nb, np.ascontiguousarray(drop), term_m, term_M, term_tab, tables, G, H)
    wG = (wts * G).reshape(A, n_outer, T).mean(axis=0)
    terms = np.clip(wG.mean(axis=0), 0.0, 1.0)
    if n_outer > 1:
        se = float(wG.sum(axis=1).std(ddof=1) / math.sqrt(n_outer))
        term_se = wG.std(axis=0, ddof=1) / math.sqrt(n_outer)
    else:
        se, term_se = float("inf"), np.full(T, np.inf)
    return RcuEstimate(float(terms.sum()), se, terms, term_se, n_outer)


def _sigma_of(channel, sigma) -> float:
    if isinstance(channel, ChannelSpec):
        if channel.kind != AWGN:
            raise ValueError("RCU bounds are implemented for BPSK over AWGN only")
        return float(channel.sigma if sigma is None else sigma)
    if channel not in (None, AWGN):
        raise ValueError("RCU bounds are implemented for BPSK over AWGN only")
    if sigma is None or not sigma > 0:
        raise ValueError("sigma must be positive")
    return float(sigma)


def partial_rcu(
    profile: Profile,
    channel=AWGN,
    sigma: float | None = None,
    n_outer: int = 2000,
    *,
    seed: int = 0,
    tilts=DEFAULT_TILTS,
    q_rel: float = 0.02,
) -> RcuEstimate:
    """Sum over staircases of ``E_Y[min{1, (2**l - 1) PEP_l(Y)}]``.

    The l = 0 term is replaced by the exact repetition-code FER
    ``Q(sqrt(w_0)/sigma)``.  ``q_rel`` is the DP grid step in units of the
    mean LLR; ``tilts`` are the rho values of the importance-sampling tilts
    (see :func:`tilted_outputs`); ``n_outer`` samples are drawn per tilt.
    """
    sigma = _sigma_of(channel, sigma)
    if n_outer < 1:
        raise ValueError("n_outer must be >= 1")
    rcu0 = q_function(math.sqrt(profile.widths[0]) / sigma)
    spec = [(profile.ends[l - 1], profile.widths[l], float(2.0**l - 1.0)) for l in range(1, profile.k)]
    if not spec:
        return RcuEstimate(rcu0, 0.0, np.array([rcu0]), np.zeros(1), n_outer)
    m_max = spec[-1][0]
    e = _estimate(spec, m_max, sigma, n_outer, seed, tuple(tilts), q_rel)
    terms = np.concatenate([[rcu0], e.terms])
    return RcuEstimate(min(1.0, float(terms.sum())), e.stderr, terms, np.concatenate([[0.0], e.term_stderr]), n_outer)


def conventional_rcu(
    n: int,
    k: int,
    channel=AWGN,
    sigma: float | None = None,
    n_outer: int = 2000,
    *,
    seed: int = 0,
    tilts=DEFAULT_TILTS,
    q_rel: float = 0.02,
) -> RcuEstimate:
    """``E_Y[min{1, (2**k - 1) PEP(Y)}]`` for the totally random [n, k] code."""
    sigma = _sigma_of(channel, sigma)
    if k == 0:
        return RcuEstimate(0.0, 0.0, np.zeros(1), np.zeros(1), n_outer)
    e = _estimate([(n, 0, float(2.0**k - 1.0))], n, sigma, n_outer, seed, tuple(tilts), q_rel)
    return RcuEstimate(min(1.0, e.value), e.stderr, e.terms, e.term_stderr, n_outer)


__all__ = [
    "RcuEstimate",
    "pep_exact",
    "pep_bracket",
    "partial_rcu",
    "conventional_rcu",
    "log_union_term",
]
