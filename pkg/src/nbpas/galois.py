"""Binary-extension Galois field arithmetic with log/antilog tables.

Elements of GF(2^p) are plain integers in [0, 2^p); bit i of the integer is
the coefficient of alpha^i in the polynomial basis.  Addition is XOR,
multiplication goes through discrete-log tables.  All bulk operations accept
numpy integer arrays.
"""

from __future__ import annotations

import numpy as np

# Default primitive polynomials per bit-width, given as (p+1)-bit masks.
# Any valid alternative is accepted by make_field; primitivity is re-verified
# at construction either way.
DEFAULT_PRIMITIVE_POLYS = {
    1: 0b11,                 # x + 1 (degenerate GF(2))
    2: 0b111,                # x^2 + x + 1
    3: 0b1011,               # x^3 + x + 1
    4: 0b10011,              # x^4 + x + 1
    5: 0b100101,             # x^5 + x^2 + 1
    6: 0b1000011,            # x^6 + x + 1
    7: 0b10000011,           # x^7 + x + 1
    8: 0b100011101,          # x^8 + x^4 + x^3 + x^2 + 1
    9: 0b1000010001,         # x^9 + x^4 + 1
    10: 0b10000001001,       # x^10 + x^3 + 1
    11: 0b100000000101,      # x^11 + x^2 + 1
    12: 0b1000001010011,     # x^12 + x^6 + x^4 + x + 1
    13: 0b10000000011011,    # x^13 + x^4 + x^3 + x + 1
    14: 0b100010001000011,   # x^14 + x^10 + x^6 + x + 1
    15: 0b1000000000000011,  # x^15 + x + 1
    16: 0b10001000000001011,  # x^16 + x^12 + x^3 + x + 1
}


class FieldError(ValueError):
    """Invalid field parameter or domain violation (e.g. inverting zero)."""


class Field:
    """GF(2^p) with multiplication via log/antilog tables.

    Immutable after construction; safe to share between workers.
    """

    def __init__(self, p, prim_poly=None):
        if not 1 <= p <= 16:
            raise FieldError(f"bit-width p={p} outside [1, 16]")
        if prim_poly is None:
            prim_poly = DEFAULT_PRIMITIVE_POLYS[p]
        if prim_poly.bit_length() != p + 1:
            raise FieldError(
                f"polynomial 0b{prim_poly:b} does not have degree {p}")
        self.p = p
        self.q = 1 << p
        self.prim_poly = prim_poly

        exp = np.zeros(self.q - 1, dtype=np.int64)
        log = np.full(self.q, -1, dtype=np.int64)
        x = 1
        for i in range(self.q - 1):
            if log[x] != -1:
                # x repeated before covering the full multiplicative group:
                # alpha does not generate it, so the polynomial is not
                # primitive (reducible polynomials also fail this way).
                raise FieldError(
                    f"0b{prim_poly:b} is not primitive over GF(2)")
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & self.q:
                x ^= prim_poly
        if x != 1:
            raise FieldError(f"0b{prim_poly:b} is not primitive over GF(2)")
        self.exp_table = exp
        self.log_table = log
        self.alpha = 2 % self.q  # alpha encodes "x"; degenerates to 1 in GF(2)

    def __repr__(self):
        return f"Field(p={self.p}, prim_poly=0b{self.prim_poly:b})"

    def __eq__(self, other):
        return (isinstance(other, Field) and other.p == self.p
                and other.prim_poly == self.prim_poly)

    def __hash__(self):
        return hash((self.p, self.prim_poly))

    def add(self, a, b):
        return np.bitwise_xor(a, b) if isinstance(a, np.ndarray) else a ^ b

    def mul(self, a, b):
        """Elementwise product; zero absorbs.  Accepts scalars or arrays."""
        a = np.asarray(a)
        b = np.asarray(b)
        out = self.exp_table[
            (self.log_table[a] + self.log_table[b]) % (self.q - 1)]
        out = np.where((a == 0) | (b == 0), 0, out)
        return int(out) if out.ndim == 0 else out

    def inv(self, a):
        """Multiplicative inverse of non-zero a."""
        a = np.asarray(a)
        if np.any(a == 0):
            raise FieldError("zero has no multiplicative inverse")
        out = self.exp_table[(self.q - 1 - self.log_table[a]) % (self.q - 1)]
        return int(out) if out.ndim == 0 else out

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow_alpha(self, k):
        """alpha^k for integer k (any sign)."""
        return int(self.exp_table[k % (self.q - 1)])

    # -- binary-string <-> element mapping ---------------------------------

    def beta(self, bits):
        """Map a length-p bit sequence to a field element.

        Convention (fixed globally): the first bit is the coefficient of
        alpha^(p-1), i.e. most-significant-first.
        """
        bits = np.asarray(bits)
        if bits.shape[-1] != self.p:
            raise FieldError(
                f"expected {self.p} bits, got {bits.shape[-1]}")
        weights = 1 << np.arange(self.p - 1, -1, -1)
        out = bits.astype(np.int64) @ weights
        return int(out) if out.ndim == 0 else out

    def beta_inv(self, c):
        """Binary image of element(s) c, most-significant-first."""
        c = np.asarray(c)
        if np.any(c >= self.q) or np.any(c < 0):
            raise FieldError("element out of range")
        shifts = np.arange(self.p - 1, -1, -1)
        return ((c[..., None] >> shifts) & 1).astype(np.int64)


def make_field(p, prim_poly=None):
    """Construct GF(2^p), validating primitivity of the polynomial."""
    return Field(p, prim_poly)
