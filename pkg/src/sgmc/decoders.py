"""LC-ROSD and the baseline decoders (LC-OSD, OSD, brute-force ML).

All decoders minimise the soft weight ``sum_i e_i |llr_i|`` of the error
pattern ``e = z ^ c`` over codewords ``c``, which is the ML rule for a BIOS
channel.  The heavy lifting happens in :mod:`sgmc._decode_kernels`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import _decode_kernels as K
from .channel import SoftObservation
from .construction import SgmcCode
from .gf2 import BitMatrix, BitVec, encode, nwords, pack_bits

ML_MAX_K = 24


@dataclass(frozen=True)
class BasisPermutation:
    """Column order ``[basis (k) | local (delta) | rest]`` of a decoding basis."""

    perm: np.ndarray
    k: int
    delta: int

    @property
    def sizes(self) -> tuple[int, int, int]:
        return self.k, self.delta, len(self.perm) - self.k - self.delta


@dataclass(frozen=True)
class TepCandidate:
    eL: BitVec
    eM: BitVec
    gamma_lm: float


@dataclass(frozen=True)
class DecodeResult:
    codeword: BitVec
    message: BitVec
    soft_weight: float
    teps_examined: int
    optimal: bool


def _as_obs(obs) -> SoftObservation:
    return obs if isinstance(obs, SoftObservation) else SoftObservation(obs)


def _check_delta(delta: int, n: int, k: int) -> None:
    if not 0 <= delta <= n - k:
        raise ValueError(f"delta={delta} outside [0, {n - k}]")
    if delta > K.MAX_DELTA:
        raise ValueError(f"delta={delta} exceeds the trellis guard {K.MAX_DELTA}")


def soft_weight(error: np.ndarray, reliability: np.ndarray) -> float:
    """Canonical soft weight (sequential sum in index order)."""
    return float(K.soft_weight(np.asarray(error, dtype=np.uint8), np.asarray(reliability, dtype=np.float64)))


def select_representative_basis(code: SgmcCode, reliability, delta: int) -> BasisPermutation:
    """Most reliable bit of each staircase, then the ``delta`` most reliable of the rest.

    Ties go to the lowest original index.
    """
    rel = np.asarray(reliability, dtype=np.float64)
    if rel.shape != (code.n,):
        raise ValueError(f"need {code.n} reliabilities, got shape {rel.shape}")
    _check_delta(delta, code.n, code.k)
    perm = np.empty(code.n, dtype=np.int64)
    p = code.profile
    K.rosd_basis(rel, np.array(p.starts, np.int64), np.array(p.ends, np.int64), code.k, code.n, perm)
    return BasisPermutation(perm, code.k, delta)


def slva_teps(P1: BitMatrix, s0: BitVec, reliability, limit: int | None = None) -> Iterator[TepCandidate]:
    """Stream TEPs satisfying ``eL . P1 ^ eM = s0`` in non-decreasing partial soft weight.

    Args:
        P1: k x delta parity block of the systematic generator.
        s0: local syndrome ``zL . P1 ^ zM``.
        reliability: the first k + delta permuted reliabilities.
        limit: maximum number of candidates (default: all 2**k; requires k <= 22).
    """
    k, delta = P1.shape
    rel = np.asarray(reliability, dtype=np.float64)
    if rel.shape != (k + delta,):
        raise ValueError(f"need {k + delta} reliabilities, got {rel.shape}")
    if len(s0) != delta:
        raise ValueError("s0 length must equal delta")
    if delta > K.MAX_DELTA:
        raise ValueError(f"delta={delta} exceeds the trellis guard {K.MAX_DELTA}")
    if limit is None:
        if k > 22:
            raise ValueError("give an explicit limit when k > 22")
        limit = 1 << k
    limit = int(min(limit, 1 << k)) if k < 63 else int(limit)
    bits = P1.to_bits()
    p1 = np.array([sum(int(b) << j for j, b in enumerate(row)) for row in bits], dtype=np.int64)
    s = int(s0.to_int())
    rec_eL = np.zeros((limit, k), np.uint8)
    rec_eM = np.zeros((limit, max(delta, 1)), np.uint8)
    rec_g = np.zeros(limit, np.float64)
    alpha = np.empty((k + 1) << delta, np.float64)
    _, count, _ = K.tep_search(
        p1, s, rel, np.zeros((k, 1), np.uint64), np.zeros(1, np.uint64), np.zeros(0, np.float64),
        k, delta, limit, False, alpha, True, rec_eL, rec_eM, rec_g, np.zeros(k, np.uint8),
    )
    for t in range(count):
        yield TepCandidate(BitVec.from_bits(rec_eL[t]), BitVec.from_bits(rec_eM[t, :delta]), float(rec_g[t]))


class _Prepared:
    """Per-code arrays shared by every frame."""

    def __init__(self, G: BitMatrix, profile=None):
        self.bits = np.ascontiguousarray(G.to_bits(), dtype=np.uint8)
        self.words = np.ascontiguousarray(G.words)
        self.k, self.n = G.shape
        if profile is None:
            self.starts = np.zeros(1, np.int64)
            self.ends = np.zeros(1, np.int64)
        else:
            self.starts = np.array(profile.starts, np.int64)
            self.ends = np.array(profile.ends, np.int64)


def _run(prep: _Prepared, G: BitMatrix, obs, decoder: int, delta=0, lmax=1, order=0) -> DecodeResult:
    obs = _as_obs(obs)
    if len(obs) != prep.n:
        raise ValueError(f"observation length {len(obs)} != n={prep.n}")
    nst = (1 << delta) if decoder in (K.LC_ROSD, K.LC_OSD) else 1
    alpha = np.empty((prep.k + 1) * nst, np.float64)
    uhat = np.zeros(prep.k, np.uint8)
    teps, optimal, ok = K.decode_frame(
        prep.bits, prep.words, prep.starts, prep.ends, decoder, delta, lmax, order, obs.llr, alpha, uhat
    )
    if not ok:
        raise ValueError("generator matrix is rank deficient")
    u = BitVec.from_bits(uhat)
    c = encode(u, G)
    e = c.to_bits() ^ (obs.llr < 0).astype(np.uint8)
    return DecodeResult(c, u, soft_weight(e, obs.reliability), int(teps), bool(optimal))


def lc_rosd_decode(code: SgmcCode, obs, delta: int, lmax: int) -> DecodeResult:
    """Locally constrained OSD over the representative (staircase) basis."""
    _check_delta(delta, code.n, code.k)
    if lmax < 1:
        raise ValueError("lmax must be >= 1")
    return _run(_Prepared(code.generator, code.profile), code.generator, obs, K.LC_ROSD, delta, int(lmax))


def lc_osd_decode(G: BitMatrix, obs, delta: int, lmax: int) -> DecodeResult:
    """Locally constrained OSD over the most reliable basis (serial Gaussian elimination)."""
    k, n = G.shape
    _check_delta(delta, n, k)
    if lmax < 1:
        raise ValueError("lmax must be >= 1")
    return _run(_Prepared(G), G, obs, K.LC_OSD, delta, int(lmax))


def osd_decode(G: BitMatrix, obs, t: int) -> DecodeResult:
    """Order-t OSD: all TEPs of weight <= t on the most reliable basis."""
    if t < 0:
        raise ValueError("order must be >= 0")
    return _run(_Prepared(G), G, obs, K.OSD, order=int(min(t, G.rows)))


def ml_bruteforce(G: BitMatrix, obs) -> DecodeResult:
    """Exhaustive minimum soft weight decoding; ties go to the lexicographically smallest codeword."""
    if G.rows > ML_MAX_K:
        raise ValueError(f"k={G.rows} exceeds the enumeration guard {ML_MAX_K}")
    return _run(_Prepared(G), G, obs, K.ML)


DECODERS = {"lc-rosd": K.LC_ROSD, "lc-osd": K.LC_OSD, "osd": K.OSD, "ml": K.ML}

__all__ = [
    "BasisPermutation",
    "TepCandidate",
    "DecodeResult",
    "DECODERS",
    "soft_weight",
    "select_representative_basis",
    "slva_teps",
    "lc_rosd_decode",
    "lc_osd_decode",
    "osd_decode",
    "ml_bruteforce",
]
