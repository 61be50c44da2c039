"""Choosing the first staircase width w0 of a nearly uniform profile.

For a target FER, find the Eb/N0 at which the partially RCU bound of
NU(n, k, w0) reaches the target and compare it with the SNR at which the
conventional RCU bound of the totally random code does.  The design is the
smallest w0 whose horizontal gap is within a tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy.optimize import brentq

from ..channel import AWGN, sigma_from_ebn0
from ..construction import nu_profile
from .rcu import conventional_rcu, partial_rcu

SNR_LO = -2.0
SNR_HI = 15.0


@dataclass
class W0Designer:
    """Cached SNR-at-target evaluations for one (n, k) pair.

    All bounds use common random numbers (fixed ``seed``), so each curve is a
    deterministic function of the SNR and can be root-found directly.
    """

    n: int
    k: int
    n_outer: int = 500
    seed: int = 0
    xtol: float = 1e-3
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not 1 <= self.k < self.n:
            raise ValueError("need 1 <= k < n")

    @property
    def rate(self) -> float:
        return self.k / self.n

    def fer(self, w0: int | None, snr_db: float) -> float:
        """Conventional RCU when ``w0`` is None, otherwise the partial RCU of NU(w0)."""
        sigma = sigma_from_ebn0(snr_db, self.rate)
        if w0 is None:
            return conventional_rcu(self.n, self.k, AWGN, sigma, self.n_outer, seed=self.seed).value
        return partial_rcu(nu_profile(self.n, self.k, w0), AWGN, sigma, self.n_outer, seed=self.seed).value

    def snr_at(self, w0: int | None, target: float) -> float:
        """Eb/N0 (dB) where the bound equals ``target`` (log-domain root finding)."""
        key = (w0, float(target))
        if key in self._cache:
            return self._cache[key]
        lt = math.log(target)

        def g(s):
            v = self.fer(w0, s)
            return (math.log(v) if v > 0 else -800.0) - lt

        lo, hi = 0.0, 4.0
        glo, ghi = g(lo), g(hi)
        while glo < 0 and lo > SNR_LO:
            hi, ghi = lo, glo
            lo -= 2.0
            glo = g(lo)
        while ghi > 0 and hi < SNR_HI:
            lo, glo = hi, ghi
            hi += 2.0
            ghi = g(hi)
        if glo < 0 or ghi > 0:
            raise ValueError(f"target {target} not reached for SNR in [{SNR_LO}, {SNR_HI}] dB")
        s = brentq(g, lo, hi, xtol=self.xtol)
        self._cache[key] = s
        return s

    def gap(self, w0: int, target: float) -> float:
        """SNR loss (dB) of NU(w0) relative to the conventional RCU at ``target``."""
        return self.snr_at(w0, target) - self.snr_at(None, target)

    def design(self, target: float, gap_db_tolerance: float) -> int:
        """Smallest feasible w0 by bisection (the gap is treated as nonincreasing in w0)."""
        if not 0.0 < target < 1.0:
            raise ValueError("target_fer must lie in (0, 1)")
        lo = -(-self.n // self.k)
        hi = self.n - self.k + 1
        if self.fer(lo, SNR_LO) <= target:
            return lo
        if self.gap(lo, target) <= gap_db_tolerance:
            return lo
        if self.gap(hi, target) > gap_db_tolerance:
            raise ValueError(f"no w0 <= {hi} meets a {gap_db_tolerance} dB gap at FER {target}")
        # invariant: gap(lo) > tol >= gap(hi)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.gap(mid, target) <= gap_db_tolerance:
                hi = mid
            else:
                lo = mid
        return hi


def design_w0(
    n: int,
    k: int,
    channel=AWGN,
    target_fer: float = 1e-5,
    gap_db_tolerance: float = 0.1,
    *,
    n_outer: int = 500,
    seed: int = 0,
    designer: W0Designer | None = None,
) -> int:
    """Smallest w0 >= ceil(n/k) whose partial RCU bound is within the SNR gap tolerance.

    Pass a shared ``designer`` to reuse cached bound evaluations across calls.
    """
    if channel not in (AWGN, None) and getattr(channel, "kind", None) != AWGN:
        raise ValueError("the design recipe uses the AWGN RCU bounds")
    d = designer if designer is not None else W0Designer(n, k, n_outer=n_outer, seed=seed)
    if (d.n, d.k) != (n, k):
        raise ValueError("designer was built for a different (n, k)")
    return d.design(target_fer, gap_db_tolerance)


__all__ = ["W0Designer", "design_w0"]
