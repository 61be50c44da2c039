"""BPSK over AWGN and the binary symmetric channel.

Modulation is 0 -> +1, 1 -> -1 with unit symbol energy.  LLRs use the natural
sign ``log P(y|0) / P(y|1)``.  SNR values are Eb/N0 in dB with
``sigma**2 = 1 / (2 R 10**(EbN0/10))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._jit import njit
from .gf2 import BitVec
from .rng import MASK64, fill_gaussian, stream_uniform

SNR_CONVENTION = "EbN0_dB; BPSK 0->+1,1->-1; sigma^2=1/(2*R*10^(EbN0/10)); PEP(d)=Q(sqrt(d)/sigma)"

AWGN = "awgn"
BSC = "bsc"


def sigma_from_ebn0(ebn0_db: float, rate: float) -> float:
    if not 0.0 < rate <= 1.0:
        raise ValueError(f"rate must lie in (0, 1], got {rate}")
    return 1.0 / math.sqrt(2.0 * rate * 10.0 ** (ebn0_db / 10.0))


def ebn0_from_sigma(sigma: float, rate: float) -> float:
    return 10.0 * math.log10(1.0 / (2.0 * rate * sigma * sigma))


def q_function(x):
    return 0.5 * math.erfc(x / math.sqrt(2.0))


@dataclass(frozen=True)
class ChannelSpec:
    kind: str
    sigma: float | None = None
    epsilon: float | None = None
    rate: float = 1.0

    def __post_init__(self):
        if self.kind == AWGN:
            if self.sigma is None or not self.sigma > 0:
                raise ValueError("AWGN channel needs sigma > 0")
        elif self.kind == BSC:
            if self.epsilon is None or not 0.0 < self.epsilon < 0.5:
                raise ValueError("BSC needs 0 < epsilon < 1/2")
        else:
            raise ValueError(f"unknown channel kind {self.kind!r}")

    @classmethod
    def awgn(cls, sigma: float, rate: float = 1.0) -> "ChannelSpec":
        return cls(AWGN, sigma=float(sigma), rate=rate)

    @classmethod
    def awgn_ebn0(cls, ebn0_db: float, rate: float) -> "ChannelSpec":
        return cls(AWGN, sigma=sigma_from_ebn0(ebn0_db, rate), rate=rate)

    @classmethod
    def bsc(cls, epsilon: float, rate: float = 1.0) -> "ChannelSpec":
        return cls(BSC, epsilon=float(epsilon), rate=rate)

    @classmethod
    def bsc_ebn0(cls, ebn0_db: float, rate: float) -> "ChannelSpec":
        """Hard-decision BPSK: epsilon = Q(1/sigma)."""
        return cls(BSC, epsilon=q_function(1.0 / sigma_from_ebn0(ebn0_db, rate)), rate=rate)

    @property
    def kind_code(self) -> int:
        return 0 if self.kind == AWGN else 1

    @property
    def noise(self) -> float:
        return self.sigma if self.kind == AWGN else self.epsilon


@dataclass(frozen=True, eq=False)
class SoftObservation:
    llr: np.ndarray

    def __post_init__(self):
        llr = np.array(self.llr, dtype=np.float64).reshape(-1)
        llr.setflags(write=False)
        object.__setattr__(self, "llr", llr)

    @property
    def hard(self) -> BitVec:
        return BitVec.from_bits((self.llr < 0).astype(np.uint8))

    @property
    def reliability(self) -> np.ndarray:
        return np.abs(self.llr)

    def __len__(self) -> int:
        return self.llr.shape[0]


@njit(nogil=True)
def channel_llr(code_bits, kind, noise, key, out):
    """Noisy LLRs for one frame.  ``kind`` 0 = AWGN (noise = sigma), 1 = BSC (noise = epsilon)."""
    n = code_bits.shape[0]
    if kind == 0:
        fill_gaussian(key, 0, out)
        scale = 2.0 / (noise * noise)
        for i in range(n):
            y = (1.0 - 2.0 * code_bits[i]) + noise * out[i]
            out[i] = scale * y
    else:
        mag = np.log((1.0 - noise) / noise)
        for i in range(n):
            b = np.int64(code_bits[i])
            if stream_uniform(key, i) < noise:
                b = 1 - b
            out[i] = mag if b == 0 else -mag


def transmit(c: BitVec, spec: ChannelSpec, frame_seed: int) -> SoftObservation:
    """Pass codeword ``c`` through the channel; deterministic in (c, spec, frame_seed)."""
    out = np.empty(len(c), dtype=np.float64)
    channel_llr(c.to_bits(), np.int64(spec.kind_code), float(spec.noise), np.uint64(int(frame_seed) & MASK64), out)
    return SoftObservation(out)
