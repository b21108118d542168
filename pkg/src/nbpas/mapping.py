"""ASK constellations, Gray labeling, and Maxwell-Boltzmann shaping.

Constellation points are kept at the unscaled integer levels
{+-1, +-3, ..., +-(M-1)}; the power-normalizing scale factor depends on the
input distribution and is carried by ShapedDistribution (or computed with
scale_for for uniform inputs).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class MappingError(ValueError):
    pass


def brgc(m):
    """Binary reflected Gray code labels for 2^m points, as a (2^m, m) array.

    Built by the reflect-and-prefix construction; label i equals the binary
    image of i ^ (i >> 1), most-significant-first.
    """
    if not 1 <= m <= 8:
        raise MappingError(f"bits per symbol m={m} outside [1, 8]")
    idx = np.arange(1 << m)
    gray = idx ^ (idx >> 1)
    shifts = np.arange(m - 1, -1, -1)
    return ((gray[:, None] >> shifts) & 1).astype(np.int64)


@dataclass(frozen=True)
class Constellation:
    """M-ASK constellation with Gray labels, sign bit in the first bit-level."""

    m: int
    points: np.ndarray      # unscaled levels, ascending
    labels: np.ndarray      # (M, m) bit labels, labels[i] is the label of points[i]
    amplitudes: np.ndarray  # {1, 3, ..., M-1}

    @property
    def M(self):
        return 1 << self.m

    def label_index(self, bits):
        """Point index for each m-bit label; inverse of the labels array."""
        bits = np.asarray(bits)
        weights = 1 << np.arange(self.m - 1, -1, -1)
        gray = bits.astype(np.int64) @ weights
        # invert gray coding: idx ^ (idx >> 1) = gray
        idx = gray.copy()
        shift = 1
        while shift < self.m:
            idx = idx ^ (idx >> shift)
            shift <<= 1
        return idx

    def amplitude_label(self, amp_index):
        """chi_A: the (m-1)-bit amplitude label of amplitudes[amp_index]."""
        return self.labels[self.M // 2 + np.asarray(amp_index), 1:]

    def amplitude_index(self, bits):
        """Inverse of chi_A: amplitude index for (m-1)-bit labels."""
        bits = np.asarray(bits)
        full = np.concatenate(
            [np.ones(bits.shape[:-1] + (1,), dtype=np.int64), bits], axis=-1)
        return self.label_index(full) - self.M // 2


def make_ask(m):
    """Build the 2^m-ASK constellation with BRGC labels on ascending points.

    For standard BRGC the first label bit already separates the negative and
    positive half-planes (0 on negatives, 1 on positives) and the remaining
    bits are mirror-symmetric, so no bit rotation is needed; both properties
    are asserted rather than assumed.
    """
    labels = brgc(m)
    M = 1 << m
    points = np.arange(-(M - 1), M, 2)
    assert np.all(labels[: M // 2, 0] == 0) and np.all(labels[M // 2:, 0] == 1)
    assert np.array_equal(labels[::-1, 1:], labels[:, 1:])
    return Constellation(
        m=m,
        points=points,
        labels=labels,
        amplitudes=np.arange(1, M, 2),
    )


@dataclass(frozen=True)
class ShapedDistribution:
    """Symmetric point distribution P_X(x) prop. to exp(-nu x^2).

    nu is defined on the unscaled integer levels; scale is the factor that
    normalizes the constellation to unit average power under this P_X.
    """

    nu: float
    p_amp: np.ndarray       # P_A over amplitudes, ascending
    p_x: np.ndarray         # P_X over points, ascending
    entropy_amp: float      # H(A) in bits
    scale: float            # Delta with E[(Delta*X)^2] = 1

    @property
    def entropy(self):
        """H(X) = H(A) + 1 (uniform sign)."""
        return self.entropy_amp + 1.0


def _entropy(p):
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def _mb_distribution(c, nu):
    w = np.exp(-nu * c.amplitudes.astype(float) ** 2)
    p_amp = w / w.sum()
    p_x = np.concatenate([p_amp[::-1], p_amp]) / 2.0
    return ShapedDistribution(
        nu=float(nu),
        p_amp=p_amp,
        p_x=p_x,
        entropy_amp=_entropy(p_amp),
        scale=scale_for(c, p_x),
    )


def uniform_distribution(c):
    """The nu = 0 member: uniform amplitudes and points."""
    return _mb_distribution(c, 0.0)


def mb_fit(c, target_entropy, tol=1e-6):
    """Fit nu so the amplitude entropy H(A) hits target_entropy (bits).

    H(A) is strictly decreasing in nu, so plain bisection suffices.  The
    bracket [0, 10] is doubled until it contains the target.
    """
    max_entropy = c.m - 1
    if not 0 < target_entropy <= max_entropy:
        raise MappingError(
            f"target H(A)={target_entropy} outside (0, {max_entropy}]")
    if abs(target_entropy - max_entropy) <= tol:
        return _mb_distribution(c, 0.0)
    lo, hi = 0.0, 10.0
    while _mb_distribution(c, hi).entropy_amp > target_entropy:
        hi *= 2.0
        if hi > 1e9:
            raise MappingError("bisection bracket expansion failed")
    while True:
        mid = 0.5 * (lo + hi)
        d = _mb_distribution(c, mid)
        if abs(d.entropy_amp - target_entropy) <= tol:
            return d
        if d.entropy_amp > target_entropy:
            lo = mid
        else:
            hi = mid


def scale_for(c, p_x):
    """Power-normalizing factor Delta = 1/sqrt(E[x_unscaled^2]) under p_x."""
    p_x = np.asarray(p_x, dtype=float)
    second_moment = float((p_x * c.points.astype(float) ** 2).sum())
    if second_moment <= 0:
        raise MappingError("degenerate distribution: zero average power")
    return 1.0 / np.sqrt(second_moment)
