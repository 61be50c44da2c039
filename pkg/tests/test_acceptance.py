"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are also collected in ``RESULTS`` and repeated in the terminal
summary (see ``conftest.py``), so they show up even when output is captured.
"""

import itertools
import math

import numpy as np
import pytest
from scipy import stats
from scipy.optimize import brentq

from conftest import gf2_matmul
from sgmc import _decode_kernels as K
from sgmc.bounds.bonferroni import bonferroni_lb, craig_q, craig_x, psi
from sgmc.bounds.design import W0Designer
from sgmc.bounds.exponent import staircase_exponent
from sgmc.bounds.rcu import partial_rcu
from sgmc.channel import ChannelSpec, sigma_from_ebn0, transmit
from sgmc.construction import Profile, batch_staircase_bits, nu_profile, rm_profile, sample_generator
from sgmc.decoders import lc_rosd_decode, ml_bruteforce, slva_teps
from sgmc.gf2 import BitMatrix, BitVec, encode, popcount_words, reduce_staircase, serial_reduce, subcode_words
from sgmc.harness import SimConfig, run_simulation
from sgmc.spectrum import code_spectrum, dmin2_ccdf, sgmc_spectrum, union_bound

RESULTS: list[str] = []


def report(num: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {num:2d} {'PASS' if ok else 'FAIL'}: {title} | {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_c01_profile_fidelity():
    a = rm_profile(1, 3)
    b = rm_profile(3, 7)
    ok = a.widths == (4, 2, 1, 1) and b.widths[:8] == (16, 8, 4, 2, 1, 1, 8, 4) and (b.n, b.k) == (128, 64)
    report(1, "profile fidelity", ok, f"rm(1,3)={a}; rm(3,7) starts {b.widths[:8]}, n={b.n}, k={b.k}")


def test_c02_spectrum_oracle():
    p = Profile((4, 2, 1, 1))
    n_gen = 10_000
    bits = batch_staircase_bits(p, np.arange(n_gen) + 1_000_000)
    counts = np.zeros((n_gen, p.n + 1))
    for t, g in enumerate(bits):
        counts[t] = np.bincount(popcount_words(subcode_words(BitMatrix.from_bits(g), p.k)), minlength=p.n + 1)
    mean = counts.mean(axis=0)
    se = counts.std(axis=0, ddof=1) / math.sqrt(n_gen)
    expect = sgmc_spectrum(p).values()
    dev = np.abs(mean - expect)
    # coefficients with zero sampling variance must match exactly
    ok = bool(np.all(np.where(se > 0, dev <= 3 * se, dev == 0)))
    worst = float(np.max(np.where(se > 0, dev / np.where(se > 0, se, 1), 0)))
    report(2, "spectrum oracle", ok, f"max |mean-A_d|/SE = {worst:.2f} over d=0..{p.n} ({n_gen} generators)")


def test_c03_dmin2():
    ccdf = dmin2_ccdf(16, 8)
    n_gen = 100_000
    bits = batch_staircase_bits(Profile((16, 8)), np.arange(n_gen) + 2_000_000)
    r0, r1 = bits[:, 0].astype(np.int64), bits[:, 1].astype(np.int64)
    d = np.minimum(np.minimum(r0.sum(1), r1.sum(1)), (r0 ^ r1).sum(1))
    gap = max(abs(float(ccdf[x]) - float(np.mean(d >= x))) for x in ccdf)
    ok = float(ccdf[13]) > 0.90 and gap <= 0.01
    report(3, "d_min,2 distribution", ok, f"Pr{{d>=13}}={float(ccdf[13]):.4f}; max CCDF gap vs MC {gap:.4f}")


def test_c04_ml_optimality():
    code = sample_generator(nu_profile(16, 8, 4), 11)
    rng = np.random.default_rng(4)
    match = 0
    frames = 1000
    for f in range(frames):
        u = BitVec.from_bits(rng.integers(0, 2, size=8, dtype=np.uint8))
        obs = transmit(encode(u, code.generator), ChannelSpec.awgn(0.6), 40_000 + f)
        a = lc_rosd_decode(code, obs, 8, 1 << 16).soft_weight
        b = ml_bruteforce(code.generator, obs).soft_weight
        match += abs(a - b) <= 1e-12 * max(1.0, b)
    report(4, "LC-ROSD ML optimality", match == frames, f"{match}/{frames} frames match ML soft weight")


def _tie_groups(gammas, tol=1e-12):
    groups, start = [], 0
    for i in range(1, len(gammas) + 1):
        if i == len(gammas) or gammas[i] - gammas[start] > tol * max(1.0, gammas[start]):
            groups.append((start, i))
            start = i
    return groups


def test_c05_tep_order():
    rng = np.random.default_rng(5)
    k, delta, first = 8, 3, 50
    good = 0
    for _ in range(100):
        p1 = rng.integers(0, 2, size=(k, delta), dtype=np.uint8)
        s0 = rng.integers(0, 2, size=delta, dtype=np.uint8)
        rel = rng.exponential(size=k + delta)
        got = list(slva_teps(BitMatrix.from_bits(p1), BitVec.from_bits(s0), rel, limit=first))
        ref = []
        for e in itertools.product((0, 1), repeat=k):
            eL = np.array(e, dtype=np.uint8)
            eM = (gf2_matmul(eL, p1) ^ s0).astype(np.uint8)
            ref.append((float(rel[:k] @ eL + rel[k:] @ eM), eL.tobytes()))
        ref.sort(key=lambda t: t[0])
        g_ref = [t[0] for t in ref]
        g_got = [t.gamma_lm for t in got]
        ok = len(got) == first and np.allclose(g_got, g_ref[:first], rtol=1e-12, atol=0)
        if ok:
            # same sets within each tie group; a group cut by the list end must be a subset
            for a, b in _tie_groups(g_ref):
                if a >= first:
                    break
                want = {ref[i][1] for i in range(a, b)}
                have = {got[i].eL.to_bits().tobytes() for i in range(a, min(b, first))}
                ok &= have == want if b <= first else have <= want
        good += bool(ok)
    report(5, "TEP order oracle", good == 100, f"{good}/100 instances match the sorted brute-force list")


def test_c06_ge_equivalence():
    rng = np.random.default_rng(6)
    good = 0
    for _ in range(1000):
        k = int(rng.integers(1, 65))
        n = int(rng.integers(k, 129))
        bits = rng.integers(0, 2, size=(k, n), dtype=np.uint8)
        left = np.tril(bits[:, :k], -1)
        np.fill_diagonal(left, 1)
        bits[:, :k] = left
        G = BitMatrix.from_bits(bits)
        Gt, T = reduce_staircase(G)
        ok = np.array_equal(Gt.to_bits()[:, :k], np.eye(k, dtype=np.uint8))
        ok &= np.array_equal(gf2_matmul(T.to_bits(), bits), Gt.to_bits())
        ok &= serial_reduce(G) == Gt
        good += bool(ok)
    report(6, "parallel GE equivalence", good == 1000, f"{good}/1000 instances (k<=64, n<=128)")


SANDWICH_SNRS = (3.0, 4.0, 5.0)


@pytest.mark.slow
def test_c07_bound_sandwich():
    profile = nu_profile(32, 16, 8)
    spec = sgmc_spectrum(profile)
    sigmas = [sigma_from_ebn0(s, 0.5) for s in SANDWICH_SNRS]
    ubs = [union_bound(spec, sg) for sg in sigmas]
    prs = [partial_rcu(profile, sigma=sg, n_outer=2000, seed=7) for sg in sigmas]
    # The upper bounds hold for the ensemble average, not for every code. Use
    # the first seed whose exact union bound lies below the ensemble one
    # (decided before any simulation).
    seed = next(s for s in range(1, 100)
                if all(union_bound(code_spectrum(sample_generator(profile, s).generator), sg) <= ub
                       for sg, ub in zip(sigmas, ubs)))
    code = sample_generator(profile, seed)
    lbs = [bonferroni_lb(code, sg, 1023) for sg in sigmas]
    cfg = SimConfig(profile=list(profile.widths), code_seed=seed, snr=list(SANDWICH_SNRS), decoder="lc-rosd",
                    delta=8, lmax=1 << 16, min_errors=100, max_frames=2_000_000, seed=77)
    recs = run_simulation(cfg)
    ok, parts = True, [f"code seed {seed}"]
    for r, lb, ub, pr in zip(recs, lbs, ubs, prs):
        upper = min(ub, pr.ci[1])
        this = r.frame_errors >= 100 and r.optimal_rate >= 0.99 and lb <= r.ci_high and r.ci_low <= upper
        ok &= this
        parts.append(f"{r.snr_db:g}dB LB={lb:.2e} FER={r.fer:.2e} UB={ub:.2e} pRCU={pr.value:.2e} opt={r.optimal_rate:.3f}")
    report(7, "bound sandwich [32,16]", ok, "; ".join(parts))


@pytest.mark.slow
def test_c08_partial_rcu_match():
    profile = rm_profile(3, 7)

    def g(s):
        return math.log(partial_rcu(profile, sigma=sigma_from_ebn0(s, 0.5), n_outer=500, seed=0).value) - math.log(1e-3)

    snr = brentq(g, 2.0, 4.5, xtol=1e-3)
    bound = partial_rcu(profile, sigma=sigma_from_ebn0(snr, 0.5), n_outer=2000, seed=1).value
    cfg = SimConfig(profile="rm 3 7", code_seed=1, snr=[snr], decoder="lc-rosd", delta=12, lmax=10_000,
                    min_errors=100, max_frames=1_000_000, seed=8)
    r = run_simulation(cfg)[0]
    ratio = r.fer / bound
    ok = 0.5 <= ratio <= 2.0
    report(8, "partial RCU match [128,64] RM", ok,
           f"Eb/N0={snr:.3f} dB bound={bound:.3e} FER={r.fer:.3e} ({r.frame_errors}/{r.frames}) ratio={ratio:.2f}")


def test_c09_craig_identities():
    rng = np.random.default_rng(9)
    worst_q = 0.0
    for _ in range(1000):
        w = int(rng.integers(1, 129))
        sigma = float(rng.uniform(0.3, 1.5))
        x = craig_x(w, sigma)
        worst_q = max(worst_q, abs(craig_q(x) - stats.norm.sf(x)))
    worst_psi = 0.0
    for _ in range(50):
        x, y = (float(v) for v in rng.uniform(0, 4, size=2))
        worst_psi = max(worst_psi, abs(psi(x, y, 0.0) - stats.norm.sf(x) * stats.norm.sf(y)))
    ok = worst_q <= 1e-9 and worst_psi <= 1e-8
    report(9, "Craig identities", ok, f"max |Craig-Q|={worst_q:.1e}; max |psi(rho=0)-QQ|={worst_psi:.1e}")


def test_c10_exponent_positivity():
    p = nu_profile(32, 16, 8)
    r = staircase_exponent(p, ChannelSpec.bsc(0.05))
    bounds = [staircase_exponent(p, ChannelSpec.bsc(e)).bound for e in (0.05, 0.04, 0.03, 0.02, 0.01)]
    ok = all(e > 0 for e in r.exponents) and all(b < a for a, b in zip(bounds, bounds[1:]))
    report(10, "exponent positivity", ok,
           f"min E={min(r.exponents):.4f}; bounds " + ", ".join(f"{b:.3g}" for b in bounds))


@pytest.mark.slow
def test_c11_design_recipe():
    d = W0Designer(128, 64, n_outer=500, seed=0)
    tol = d.gap(28, 1e-7)
    w = {t: d.design(t, tol) for t in (1e-5, 1e-7, 1e-9)}
    ok = 26 <= w[1e-7] <= 30 and 20 <= w[1e-5] <= 24 and 32 <= w[1e-9] <= 36 and w[1e-5] <= w[1e-7] <= w[1e-9]
    report(11, "w0 design recipe", ok, f"tol={tol:.3f} dB -> w0: 1e-5:{w[1e-5]} 1e-7:{w[1e-7]} 1e-9:{w[1e-9]}")


@pytest.mark.slow
def test_c12_baseline_sanity():
    base = dict(profile="nu 64 32 14", code_seed=12, snr=[2.0, 3.0], delta=10, lmax=10_000,
                min_errors=100, max_frames=200_000, seed=12)
    rosd = run_simulation(SimConfig(decoder="lc-rosd", **base))
    osd = run_simulation(SimConfig(decoder="lc-osd", **base))
    agree = all(a.ci_low <= b.ci_high and b.ci_low <= a.ci_high for a, b in zip(rosd, osd))
    ratio = rosd[0].avg_teps / osd[0].avg_teps
    ok = agree and ratio <= 10
    detail = "; ".join(f"{a.snr_db:g}dB FER {a.fer:.2e} vs {b.fer:.2e}" for a, b in zip(rosd, osd))
    report(12, "LC-ROSD vs LC-OSD baseline [64,32]", ok, f"{detail}; TEP ratio at {rosd[0].snr_db:g} dB = {ratio:.2f}")
