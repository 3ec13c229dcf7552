"""Small-blocklength random codes.

Two code families are provided:

* :class:`WiretapCodebook` -- random binning. Message ``w`` owns the bin of
  rows ``w * bin_size .. (w + 1) * bin_size - 1``; the stochastic encoder
  sends a uniformly chosen row of the bin.
* :class:`ChannelCodebook` -- a plain random code used for the keyed
  (one-time-padded) mini-slot.

Both are regenerated from ``(seed, dimensions, input distribution)`` so a
dump only needs those fields. Decoding is maximum likelihood with ties
going to the lowest codeword index. Message indices map to bit strings
big-endian with fixed width (see :func:`int_to_bits`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelModel
from .errors import EnumerationCapError, InputError, RateError
from .infotheory import InputDistribution, channel_mi, mutual_information

DEFAULT_MAX_N = 16
DEFAULT_LEAKAGE_CAP = 2**24


def int_to_bits(value: int, width: int) -> np.ndarray:
    """Big-endian fixed-width bit array of ``value``."""
    if width == 0:
        return np.zeros(0, dtype=np.uint8)
    if not 0 <= value < (1 << width):
        raise InputError(f"{value} does not fit in {width} bits")
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def bits_to_int(bits) -> int:
    out = 0
    for b in np.asarray(bits, dtype=np.uint8).reshape(-1):
        out = (out << 1) | int(b)
    return out


def _draw_table(rows: int, n: int, input_dist: InputDistribution, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    table = rng.choice(len(input_dist), size=(rows, n), p=input_dist.as_array())
    table = table.astype(np.int64)
    table.setflags(write=False)
    return table


def _log_table(matrix: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(matrix)


def _ml_index(codewords: np.ndarray, log_bob: np.ndarray, y_block) -> int:
    y = np.asarray(y_block, dtype=np.int64).reshape(-1)
    if y.size != codewords.shape[1]:
        raise InputError(f"received block has length {y.size}, expected {codewords.shape[1]}")
    scores = log_bob[codewords, y[None, :]].sum(axis=1)
    return int(np.argmax(scores))


def _ml_index_many(codewords: np.ndarray, log_bob: np.ndarray, y_blocks: np.ndarray) -> np.ndarray:
    """Vectorized ML over a stack of received blocks ``(trials, n)``."""
    scores = log_bob[codewords[None, :, :], y_blocks[:, None, :]].sum(axis=2)
    return np.argmax(scores, axis=1)


def _check_dims(n: int, bits: int, x_size: int, max_n: int) -> None:
    if n < 1:
        raise InputError(f"blocklength must be positive, got {n}")
    if n > max_n:
        raise EnumerationCapError(f"blocklength {n} exceeds the cap of {max_n}", n, max_n)
    if bits < 0:
        raise InputError("bit counts must be non-negative")
    if bits > n * math.log2(x_size) + 1e-12:
        raise RateError(
            f"rate exceeds alphabet capacity: {bits} bits in {n} uses of a {x_size}-ary input"
        )


@dataclass(frozen=True)
class WiretapCodebook:
    n: int
    rate_bits: int
    bin_bits: int
    input_dist: InputDistribution
    seed: int
    codewords: np.ndarray = field(repr=False, compare=False)

    @property
    def num_bins(self) -> int:
        return 1 << self.rate_bits

    @property
    def bin_size(self) -> int:
        return 1 << self.bin_bits

    @property
    def x_size(self) -> int:
        return len(self.input_dist)

    def to_dict(self) -> dict:
        return {"kind": "wiretap", "n": self.n, "rate_bits": self.rate_bits,
                "bin_bits": self.bin_bits, "input_dist": list(self.input_dist.probs),
                "seed": self.seed}


@dataclass(frozen=True)
class ChannelCodebook:
    n: int
    bits: int
    input_dist: InputDistribution
    seed: int
    codewords: np.ndarray = field(repr=False, compare=False)

    @property
    def num_codewords(self) -> int:
        return 1 << self.bits

    def to_dict(self) -> dict:
        return {"kind": "channel", "n": self.n, "bits": self.bits,
                "input_dist": list(self.input_dist.probs), "seed": self.seed}


def build_wiretap(n: int, rate_bits: int, bin_bits: int, input_dist: InputDistribution,
                  seed: int, max_n: int = DEFAULT_MAX_N) -> WiretapCodebook:
    """Random-binning code with ``2**rate_bits`` bins of ``2**bin_bits`` codewords.

    Every symbol of every codeword is drawn i.i.d. from ``input_dist``.
    """
    _check_dims(n, rate_bits + bin_bits, len(input_dist), max_n)
    if rate_bits < 0 or bin_bits < 0:
        raise InputError("rate_bits and bin_bits must be non-negative")
    table = _draw_table(1 << (rate_bits + bin_bits), n, input_dist, seed)
    return WiretapCodebook(n, rate_bits, bin_bits, input_dist, seed, table)


def build_channel_code(n: int, bits: int, input_dist: InputDistribution, seed: int,
                       max_n: int = DEFAULT_MAX_N) -> ChannelCodebook:
    _check_dims(n, bits, len(input_dist), max_n)
    table = _draw_table(1 << bits, n, input_dist, seed)
    return ChannelCodebook(n, bits, input_dist, seed, table)


def restore_codebook(data: dict, max_n: int = DEFAULT_MAX_N):
    """Inverse of ``to_dict`` for either codebook type."""
    dist = InputDistribution(tuple(data["input_dist"]))
    if data.get("kind") == "wiretap":
        return build_wiretap(data["n"], data["rate_bits"], data["bin_bits"], dist, data["seed"], max_n)
    if data.get("kind") == "channel":
        return build_channel_code(data["n"], data["bits"], dist, data["seed"], max_n)
    raise InputError(f"unknown codebook kind {data.get('kind')!r}")


def wiretap_encode(book: WiretapCodebook, w: int, rng: np.random.Generator) -> np.ndarray:
    if not 0 <= w < book.num_bins:
        raise InputError(f"message {w} outside [0, {book.num_bins})")
    j = int(rng.integers(book.bin_size)) if book.bin_bits else 0
    return book.codewords[w * book.bin_size + j]


def wiretap_decode(book: WiretapCodebook, y_block, model: ChannelModel) -> int:
    """Bin index of the ML codeword under Bob's marginal ``p(y|x)``."""
    return _ml_index(book.codewords, _log_table(model.bob), y_block) // book.bin_size


def channel_encode(book: ChannelCodebook, index: int) -> np.ndarray:
    if not 0 <= index < book.num_codewords:
        raise InputError(f"message {index} outside [0, {book.num_codewords})")
    return book.codewords[index]


def channel_decode(book: ChannelCodebook, y_block, model: ChannelModel) -> int:
    return _ml_index(book.codewords, _log_table(model.bob), y_block)


def decode_many(book, y_blocks, model: ChannelModel) -> np.ndarray:
    """Decode a ``(trials, n)`` stack; returns message indices for either code type."""
    y = np.asarray(y_blocks, dtype=np.int64)
    idx = _ml_index_many(book.codewords, _log_table(model.bob), y)
    if isinstance(book, WiretapCodebook):
        return idx // book.bin_size
    return idx


def eve_block_kernel(codewords: np.ndarray, eve: np.ndarray) -> np.ndarray:
    """``p(z^n | codeword)`` for every codeword and every ``z^n``.

    Built as a Kronecker product of per-position rows, so ``z^n`` is indexed
    big-endian in base ``z_size``.
    """
    rows = codewords.shape[0]
    out = np.ones((rows, 1))
    for i in range(codewords.shape[1]):
        per_symbol = eve[codewords[:, i]]  # (rows, z_size)
        out = (out[:, :, None] * per_symbol[:, None, :]).reshape(rows, -1)
    return out


def exact_block_leakage(book: WiretapCodebook, model: ChannelModel,
                        cap: int = DEFAULT_LEAKAGE_CAP) -> float:
    """Exact I(W; Z^n) in bits for uniform messages through this codebook.

    ``p(w, z^n) = (1/M) (1/M') sum_j prod_i p(z_i | x_i(w, j))``.
    """
    states = model.z_size ** book.n * book.num_bins * book.bin_size
    if states > cap:
        raise EnumerationCapError(
            f"enumeration cap: {states} joint states exceed {cap}; use a smaller n", states, cap
        )
    kernel = eve_block_kernel(book.codewords, model.eve)
    per_bin = kernel.reshape(book.num_bins, book.bin_size, -1).mean(axis=1)
    return mutual_information(per_bin / book.num_bins)


def default_bin_bits(n: int, input_dist: InputDistribution, model: ChannelModel) -> int:
    """Randomization bits covering ``n * I(X;Z)`` for the given input law."""
    return int(math.ceil(n * float(channel_mi(input_dist.as_array(), model.eve)) - 1e-12))
