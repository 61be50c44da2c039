"""Staircase profiles, random staircase generator sampling and message recovery."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .gf2 import BitMatrix, BitVec, nwords, pack_bits
from .rng import MASK64, derive_array, stream_bits_array


@dataclass(frozen=True)
class Profile:
    """Staircase widths ``(w_0, ..., w_{k-1})``."""

    widths: tuple[int, ...]

    def __post_init__(self):
        widths = tuple(int(w) for w in self.widths)
        if not widths:
            raise ValueError("profile must have at least one staircase")
        if any(w < 1 for w in widths):
            raise ValueError(f"every width must be >= 1, got {widths}")
        object.__setattr__(self, "widths", widths)

    @property
    def k(self) -> int:
        return len(self.widths)

    @property
    def n(self) -> int:
        return sum(self.widths)

    @cached_property
    def ends(self) -> tuple[int, ...]:
        """Cumulative lengths n_l = w_0 + ... + w_l."""
        out, acc = [], 0
        for w in self.widths:
            acc += w
            out.append(acc)
        return tuple(out)

    @cached_property
    def starts(self) -> tuple[int, ...]:
        return (0,) + self.ends[:-1]

    @property
    def rates(self) -> tuple[float, ...]:
        """Partial rates R_l = l / n_l."""
        return tuple(l / nl for l, nl in enumerate(self.ends))

    def __len__(self) -> int:
        return self.k

    def __str__(self) -> str:
        return ",".join(map(str, self.widths))


def rm_profile(r: int, m: int) -> Profile:
    """Profile of the RM(r, m) code in lower-triangular (polar kernel) form.

    The information rows are the kernel rows ``i`` with ``popcount(i) >= m - r``;
    each has its last one at column ``i``, so staircase widths are the gaps
    between consecutive selected indices.
    """
    if m < 0 or r < 0 or r > m:
        raise ValueError(f"need 0 <= r <= m, got r={r}, m={m}")
    idx = [i for i in range(1 << m) if i.bit_count() >= m - r]
    # idx always ends at 2**m - 1 (popcount m), so the widths sum to 2**m
    widths = [idx[0] + 1] + [b - a for a, b in zip(idx, idx[1:])]
    return Profile(tuple(widths))


def nu_profile(n: int, k: int, w0: int) -> Profile:
    """Nearly uniform profile: ``w0`` then widths ceil/floor of (n - w0)/(k - 1)."""
    if k < 2:
        raise ValueError("nearly uniform profile needs k >= 2")
    if w0 < math.ceil(n / k):
        raise ValueError(f"w0={w0} below ceil(n/k)={math.ceil(n / k)}")
    if w0 > n - (k - 1):
        raise ValueError(f"w0={w0} leaves fewer than one column per remaining staircase")
    rest = n - w0
    lo, extra = divmod(rest, k - 1)
    return Profile((w0,) + (lo + 1,) * extra + (lo,) * (k - 1 - extra))


def read_profile(path: str | Path) -> Profile:
    """Profile file: one line of comma separated widths."""
    text = Path(path).read_text().strip()
    if not text:
        raise ValueError(f"{path}: empty profile file")
    line = text.splitlines()[0]
    try:
        widths = tuple(int(t) for t in line.split(",") if t.strip())
    except ValueError as exc:
        raise ValueError(f"{path}: malformed width list {line!r}") from exc
    return Profile(widths)


def write_profile(profile: Profile, path: str | Path) -> None:
    Path(path).write_text(str(profile) + "\n")


@dataclass(frozen=True, eq=False)
class SgmcCode:
    """A sampled staircase generator matrix code."""

    profile: Profile
    generator: BitMatrix
    seed: int

    @property
    def n(self) -> int:
        return self.profile.n

    @property
    def k(self) -> int:
        return self.profile.k

    @cached_property
    def bits(self) -> np.ndarray:
        b = self.generator.to_bits()
        b.setflags(write=False)
        return b

    def __eq__(self, other) -> bool:
        if not isinstance(other, SgmcCode):
            return NotImplemented
        return self.profile == other.profile and self.generator == other.generator and self.seed == other.seed

    def __hash__(self) -> int:
        return hash((self.profile, self.generator, self.seed))


def staircase_bits(profile: Profile, seed: int) -> np.ndarray:
    """Generator bits of the random SGMC for ``(profile, seed)``.

    The bit below the staircase at (row, col) is the top bit of
    ``stream_u64(derive(derive(seed, 0), row), col)``, so every entry is a pure
    function of (seed, row, col).
    """
    k, n = profile.k, profile.n
    base = derive_array(np.uint64(int(seed) & MASK64), 0)
    row_keys = derive_array(np.full(k, base, dtype=np.uint64), np.arange(k, dtype=np.uint64))
    bits = stream_bits_array(row_keys, n)
    for l, (s, e) in enumerate(zip(profile.starts, profile.ends)):
        bits[l, s:e] = 1
        bits[l, e:] = 0
    return bits


def sample_generator(profile: Profile, seed: int) -> SgmcCode:
    return SgmcCode(profile, BitMatrix.from_bits(staircase_bits(profile, seed)), int(seed))


def batch_staircase_bits(profile: Profile, seeds) -> np.ndarray:
    """``staircase_bits`` for many seeds at once -> uint8 (len(seeds), k, n)."""
    seeds = np.asarray(seeds, dtype=np.uint64).reshape(-1)
    k, n = profile.k, profile.n
    base = derive_array(seeds, 0)
    keys = derive_array(base[:, None], np.arange(k, dtype=np.uint64)[None, :])
    bits = stream_bits_array(keys.reshape(-1), n).reshape(seeds.shape[0], k, n)
    for l, (s, e) in enumerate(zip(profile.starts, profile.ends)):
        bits[:, l, s:e] = 1
        bits[:, l, e:] = 0
    return bits


def recover_message(code: SgmcCode, c: BitVec) -> BitVec:
    """The unique ``u`` with ``u . G = c`` by staircase back-substitution.

    Column ``n_l - 1`` is zero in every row above ``l`` and one in row ``l``,
    so after removing rows ``> l`` its residual bit is ``u_l``.
    """
    if len(c) != code.n:
        raise ValueError(f"codeword length {len(c)} != n={code.n}")
    rows = code.generator.words
    res = np.array(c.words, dtype=np.uint64)
    u = np.zeros(code.k, dtype=np.uint8)
    for l in range(code.k - 1, -1, -1):
        col = code.profile.ends[l] - 1
        if (int(res[col // 64]) >> (col % 64)) & 1:
            u[l] = 1
            res ^= rows[l]
    if np.any(res):
        raise ValueError("not a codeword of this code")
    return BitVec.from_bits(u)


def generator_text(code: SgmcCode) -> str:
    """Header ``n k seed`` then one hex row per line (bit i of the integer = column i)."""
    width = (code.n + 3) // 4
    lines = [f"{code.n} {code.k} {code.seed}"]
    lines += [format(code.generator.row(i).to_int(), f"0{width}x") for i in range(code.k)]
    lines.append("profile " + str(code.profile))
    return "\n".join(lines) + "\n"


def export_generator(code: SgmcCode, path: str | Path) -> None:
    Path(path).write_text(generator_text(code))


def import_generator(path: str | Path, profile: Profile | None = None) -> SgmcCode:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    try:
        n, k, seed = (int(t) for t in lines[0].split())
    except (IndexError, ValueError) as exc:
        raise ValueError(f"{path}: bad header, expected 'n k seed'") from exc
    rows = lines[1 : 1 + k]
    if len(rows) != k:
        raise ValueError(f"{path}: expected {k} rows, found {len(rows)}")
    if profile is None:
        tail = [ln for ln in lines[1 + k :] if ln.startswith("profile ")]
        if not tail:
            raise ValueError(f"{path}: no profile line and no profile given")
        profile = Profile(tuple(int(t) for t in tail[0].split(None, 1)[1].split(",")))
    if (profile.n, profile.k) != (n, k):
        raise ValueError(f"{path}: profile does not match header n={n} k={k}")
    words = np.zeros((k, nwords(n)), dtype=np.uint64)
    for i, h in enumerate(rows):
        v = int(h, 16)
        if v >> n:
            raise ValueError(f"{path}: row {i} wider than n")
        for j in range(nwords(n)):
            words[i, j] = (v >> (64 * j)) & ((1 << 64) - 1)
    G = BitMatrix(k, n, words)
    bits = G.to_bits()
    for l, (s, e) in enumerate(zip(profile.starts, profile.ends)):
        if not (bits[l, s:e].all() and not bits[l, e:].any()):
            raise ValueError(f"{path}: row {l} violates the staircase structure")
    return SgmcCode(profile, G, seed)


__all__ = [
    "Profile",
    "SgmcCode",
    "rm_profile",
    "nu_profile",
    "read_profile",
    "write_profile",
    "sample_generator",
    "staircase_bits",
    "batch_staircase_bits",
    "recover_message",
    "export_generator",
    "generator_text",
    "import_generator",
    "pack_bits",
]
