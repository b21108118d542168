"""Fixed-length constant-composition distribution matcher.

Maps k uniform input bits to a length-n amplitude sequence with a fixed
per-amplitude composition via exact combinatorial ranking/unranking.  The
input bits are read as the lexicographic rank of the output sequence among
all sequences with that composition (amplitudes ordered ascending), so the
map is a bijection between [0, 2^k) and the first 2^k such sequences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class DematchError(ValueError):
    """Decoder output is not a valid matcher image; callers count this as a
    frame error."""


@dataclass(frozen=True)
class Composition:
    counts: tuple           # occurrences per alphabet symbol, sum = n
    alphabet: tuple         # symbol values, ascending (amplitudes for PAS)
    n: int
    num_sequences: int      # multinomial(n; counts)
    k: int                  # floor(log2(num_sequences))

    @property
    def rate(self):
        return self.k / self.n

    def empirical(self):
        return np.array(self.counts, dtype=float) / self.n


def _multinomial(n, counts):
    out = math.factorial(n)
    for c in counts:
        out //= math.factorial(c)
    return out


def make_composition(counts, alphabet):
    counts = tuple(int(c) for c in counts)
    if any(c < 0 for c in counts) or len(counts) != len(alphabet):
        raise ValueError("invalid composition counts")
    n = sum(counts)
    num = _multinomial(n, counts)
    return Composition(
        counts=counts,
        alphabet=tuple(alphabet),
        n=n,
        num_sequences=num,
        k=num.bit_length() - 1,
    )


def composition_for(p_amp, n, alphabet):
    """Composition from largest-remainder rounding of n * p_amp."""
    if n < 1:
        raise ValueError("n must be positive")
    p_amp = np.asarray(p_amp, dtype=float)
    scaled = p_amp * n
    counts = np.floor(scaled).astype(int)
    remainder = scaled - counts
    short = n - counts.sum()
    for i in np.argsort(-remainder)[:short]:
        counts[i] += 1
    return make_composition(counts, alphabet)


def dm_encode(bits, comp):
    """Unrank k input bits into the amplitude sequence of that rank."""
    bits = np.asarray(bits)
    if bits.shape != (comp.k,):
        raise ValueError(f"expected {comp.k} bits, got shape {bits.shape}")
    rank = 0
    for b in bits:
        rank = (rank << 1) | int(b)
    counts = list(comp.counts)
    remaining = comp.num_sequences
    n_left = comp.n
    out = np.empty(comp.n, dtype=np.int64)
    for pos in range(comp.n):
        for a, c in enumerate(counts):
            if c == 0:
                continue
            # sequences starting with symbol a, exact integer arithmetic
            block = remaining * c // n_left
            if rank < block:
                out[pos] = comp.alphabet[a]
                counts[a] -= 1
                remaining = block
                n_left -= 1
                break
            rank -= block
    return out


def dm_decode(amps, comp):
    """Rank an amplitude sequence back to its k input bits.

    Raises DematchError on a composition mismatch or when the sequence lies
    outside the 2^k encode image.
    """
    amps = np.asarray(amps)
    if amps.shape != (comp.n,):
        raise DematchError("sequence length mismatch")
    index = {a: i for i, a in enumerate(comp.alphabet)}
    counts = list(comp.counts)
    remaining = comp.num_sequences
    n_left = comp.n
    rank = 0
    for v in amps:
        a = index.get(int(v))
        if a is None or counts[a] == 0:
            raise DematchError("sequence violates the target composition")
        for lower in range(a):
            if counts[lower]:
                rank += remaining * counts[lower] // n_left
        remaining = remaining * counts[a] // n_left
        counts[a] -= 1
        n_left -= 1
    if rank >= (1 << comp.k):
        raise DematchError("sequence outside the matcher image")
    bits = np.empty(comp.k, dtype=np.int64)
    for i in range(comp.k - 1, -1, -1):
        bits[i] = rank & 1
        rank >>= 1
    return bits
