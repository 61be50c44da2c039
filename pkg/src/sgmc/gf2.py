"""Bit-packed GF(2) vectors and matrices.

Bit ``i`` of a vector lives in word ``i // 64`` at position ``i % 64``
(least significant first).  Pad bits beyond the length are always zero.
"""

from __future__ import annotations

from typing import Iterator, Sequence

import numpy as np

from ._jit import njit

WORD = 64
_ONE = np.uint64(1)
_ZERO = np.uint64(0)


def nwords(nbits: int) -> int:
    return max(1, (nbits + WORD - 1) // WORD)


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a (..., n) 0/1 array into (..., nwords(n)) uint64 words."""
    bits = np.asarray(bits, dtype=np.uint8)
    n = bits.shape[-1]
    w = nwords(n)
    padded = np.zeros(bits.shape[:-1] + (w * WORD,), dtype=np.uint8)
    padded[..., :n] = bits & 1
    b8 = np.packbits(padded.reshape(bits.shape[:-1] + (w * 8, 8)), axis=-1, bitorder="little")
    return b8.reshape(bits.shape[:-1] + (w * 8,)).view("<u8").astype(np.uint64)


def unpack_bits(words: np.ndarray, n: int) -> np.ndarray:
    words = np.ascontiguousarray(words, dtype=np.uint64)
    b8 = words.astype("<u8").view(np.uint8)
    return np.unpackbits(b8, axis=-1, bitorder="little")[..., :n]


class BitVec:
    """Immutable packed bit vector."""

    __slots__ = ("_n", "_words")

    def __init__(self, length: int, words: np.ndarray):
        words = np.array(words, dtype=np.uint64).reshape(-1)
        if words.shape[0] != nwords(length):
            raise ValueError(f"expected {nwords(length)} words for {length} bits, got {words.shape[0]}")
        rem = length % WORD
        if rem and int(words[-1]) >> rem:
            raise ValueError("nonzero pad bits")
        if length == 0 and int(words[0]):
            raise ValueError("nonzero pad bits")
        words.setflags(write=False)
        self._n = int(length)
        self._words = words

    @classmethod
    def from_bits(cls, bits: Sequence[int] | np.ndarray) -> "BitVec":
        bits = np.asarray(bits, dtype=np.uint8).reshape(-1)
        if bits.size and bits.max() > 1:
            raise ValueError("bits must be 0/1")
        return cls(bits.shape[0], pack_bits(bits))

    @classmethod
    def zeros(cls, length: int) -> "BitVec":
        return cls(length, np.zeros(nwords(length), dtype=np.uint64))

    @classmethod
    def unit(cls, length: int, index: int) -> "BitVec":
        bits = np.zeros(length, dtype=np.uint8)
        bits[index] = 1
        return cls.from_bits(bits)

    @classmethod
    def from_int(cls, length: int, value: int) -> "BitVec":
        """Bit ``i`` of ``value`` becomes coordinate ``i``."""
        if value < 0 or value >> length:
            raise ValueError("value does not fit")
        w = [(value >> (WORD * j)) & ((1 << WORD) - 1) for j in range(nwords(length))]
        return cls(length, np.array(w, dtype=np.uint64))

    @property
    def words(self) -> np.ndarray:
        return self._words

    def to_bits(self) -> np.ndarray:
        return unpack_bits(self._words, self._n)

    def to_int(self) -> int:
        return sum(int(w) << (WORD * j) for j, w in enumerate(self._words))

    def weight(self) -> int:
        return int(sum(int(w).bit_count() for w in self._words))

    def __len__(self) -> int:
        return self._n

    def __getitem__(self, i: int) -> int:
        if not -self._n <= i < self._n:
            raise IndexError(i)
        i %= self._n
        return int(self._words[i // WORD] >> np.uint64(i % WORD)) & 1

    def __xor__(self, other: "BitVec") -> "BitVec":
        if len(other) != self._n:
            raise ValueError("length mismatch")
        return BitVec(self._n, self._words ^ other._words)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitVec):
            return NotImplemented
        return self._n == other._n and bool(np.array_equal(self._words, other._words))

    def __hash__(self) -> int:
        return hash((self._n, self._words.tobytes()))

    def __repr__(self) -> str:
        return f"BitVec({''.join(map(str, self.to_bits()))})"


class BitMatrix:
    """Immutable packed GF(2) matrix, one word-array per row."""

    __slots__ = ("_rows", "_cols", "_words")

    def __init__(self, rows: int, cols: int, words: np.ndarray):
        words = np.array(words, dtype=np.uint64).reshape(rows, nwords(cols))
        rem = cols % WORD
        if rem and rows and np.any(words[:, -1] >> np.uint64(rem)):
            raise ValueError("nonzero pad bits")
        words.setflags(write=False)
        self._rows = int(rows)
        self._cols = int(cols)
        self._words = words

    @classmethod
    def from_bits(cls, bits) -> "BitMatrix":
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.ndim != 2:
            raise ValueError("expected a 2-D array")
        if bits.size and bits.max() > 1:
            raise ValueError("bits must be 0/1")
        return cls(bits.shape[0], bits.shape[1], pack_bits(bits))

    @classmethod
    def from_rows(cls, rows: Sequence[BitVec]) -> "BitMatrix":
        if not rows:
            raise ValueError("need at least one row")
        n = len(rows[0])
        if any(len(r) != n for r in rows):
            raise ValueError("all rows must have equal length")
        return cls(len(rows), n, np.stack([r.words for r in rows]))

    @classmethod
    def identity(cls, k: int) -> "BitMatrix":
        return cls.from_bits(np.eye(k, dtype=np.uint8))

    @property
    def rows(self) -> int:
        return self._rows

    @property
    def cols(self) -> int:
        return self._cols

    @property
    def shape(self) -> tuple[int, int]:
        return self._rows, self._cols

    @property
    def words(self) -> np.ndarray:
        return self._words

    def row(self, i: int) -> BitVec:
        return BitVec(self._cols, self._words[i])

    def to_bits(self) -> np.ndarray:
        return unpack_bits(self._words, self._cols)

    def columns(self, index) -> "BitMatrix":
        """Column-permuted / selected copy."""
        return BitMatrix.from_bits(self.to_bits()[:, np.asarray(index)])

    def __matmul__(self, other: "BitMatrix") -> "BitMatrix":
        if self._cols != other._rows:
            raise ValueError("dimension mismatch")
        a = self.to_bits().astype(np.int64)
        b = other.to_bits().astype(np.int64)
        return BitMatrix.from_bits((a @ b) & 1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._words, other._words))

    def __hash__(self) -> int:
        return hash((self.shape, self._words.tobytes()))

    def __repr__(self) -> str:
        return f"BitMatrix({self._rows}x{self._cols})"


def encode(u: BitVec, G: BitMatrix) -> BitVec:
    """Codeword ``u . G``: XOR of the rows selected by the set bits of ``u``."""
    if len(u) != G.rows:
        raise ValueError(f"message length {len(u)} does not match {G.rows} generator rows")
    sel = u.to_bits().astype(bool)
    if not sel.any():
        return BitVec.zeros(G.cols)
    return BitVec(G.cols, np.bitwise_xor.reduce(G.words[sel], axis=0))


@njit(nogil=True)
def _bit(words, row, col):
    return (words[row, col >> 6] >> np.uint64(col & 63)) & _ONE


@njit(nogil=True)
def staircase_reduce_rows(src, k, out):
    """Per-row reduction of a packed matrix whose first k columns are unit lower triangular.

    Row l of ``out`` starts as row l of ``src`` and, scanning i = l-1 .. 0,
    absorbs *original* row i whenever its bit i is set.  Rows never read each
    other's results, so the loop over l is embarrassingly parallel.
    """
    w = src.shape[1]
    for l in range(k):
        for j in range(w):
            out[l, j] = src[l, j]
        for i in range(l - 1, -1, -1):
            if (out[l, i >> 6] >> np.uint64(i & 63)) & _ONE:
                for j in range(w):
                    out[l, j] ^= src[i, j]


def _check_unit_lower(bits: np.ndarray, k: int) -> None:
    left = bits[:, :k]
    if not np.array_equal(np.tril(left), left) or not np.all(np.diag(left) == 1):
        raise ValueError("left k x k block is not unit lower triangular")


def reduce_staircase(G: BitMatrix) -> tuple[BitMatrix, BitMatrix]:
    """Parallel Gaussian elimination of ``G = [L | Q]`` with L unit lower triangular.

    Returns ``(Gtilde, T)`` with ``Gtilde = [I | P]`` and ``T . G = Gtilde``.
    """
    k, n = G.shape
    if k > n:
        raise ValueError("more rows than columns")
    bits = G.to_bits()
    _check_unit_lower(bits, k)
    aug = pack_bits(np.concatenate([bits, np.eye(k, dtype=np.uint8)], axis=1))
    out = np.empty_like(aug)
    staircase_reduce_rows(aug, k, out)
    full = unpack_bits(out, n + k)
    return BitMatrix.from_bits(full[:, :n]), BitMatrix.from_bits(full[:, n:])


def serial_reduce(G: BitMatrix, pivot_cols: int | None = None) -> BitMatrix:
    """Column-by-column Gauss-Jordan elimination over the first ``pivot_cols`` columns.

    Python-integer implementation kept independent of the packed kernels; used
    as a reference.  Raises if a pivot column has no usable pivot.
    """
    k, n = G.shape
    pc = k if pivot_cols is None else pivot_cols
    rows = [r.to_int() for r in (G.row(i) for i in range(k))]
    for col in range(pc):
        piv = next((r for r in range(col, k) if rows[r] >> col & 1), None)
        if piv is None:
            raise ValueError(f"no pivot in column {col}")
        rows[col], rows[piv] = rows[piv], rows[col]
        for r in range(k):
            if r != col and rows[r] >> col & 1:
                rows[r] ^= rows[col]
    return BitMatrix.from_rows([BitVec.from_int(n, v) for v in rows])


def rank(G: BitMatrix) -> int:
    rows = [G.row(i).to_int() for i in range(G.rows)]
    r = 0
    for col in range(G.cols):
        piv = next((i for i in range(r, len(rows)) if rows[i] >> col & 1), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i] >> col & 1:
                rows[i] ^= rows[r]
        r += 1
        if r == len(rows):
            break
    return r


def enumerate_subcode(G: BitMatrix, j: int) -> Iterator[BitVec]:
    """All 2**j codewords spanned by rows 0..j-1, starting with zero (Gray-code order)."""
    if j < 0 or j > G.rows:
        raise ValueError(f"j={j} outside [0, {G.rows}]")
    cur = np.zeros(nwords(G.cols), dtype=np.uint64)
    yield BitVec(G.cols, cur)
    for t in range(1, 1 << j):
        bit = (t & -t).bit_length() - 1
        cur = cur ^ G.words[bit]
        yield BitVec(G.cols, cur)


def subcode_words(G: BitMatrix, j: int) -> np.ndarray:
    """Packed words of the 2**j subcode codewords, index = message integer."""
    if j < 0 or j > G.rows:
        raise ValueError(f"j={j} outside [0, {G.rows}]")
    out = np.zeros((1 << j, G.words.shape[1]), dtype=np.uint64)
    for i in range(j):
        half = 1 << i
        out[half : 2 * half] = out[:half] ^ G.words[i]
    return out


def popcount_words(words: np.ndarray) -> np.ndarray:
    """Hamming weight of each packed row of a (..., w) uint64 array."""
    b8 = np.ascontiguousarray(words, dtype=np.uint64).astype("<u8").view(np.uint8)
    return np.unpackbits(b8, axis=-1).sum(axis=-1, dtype=np.int64)
