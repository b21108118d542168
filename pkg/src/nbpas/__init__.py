"""Coded modulation toolkit: non-binary LDPC codes, bit- and symbol-metric
decoding, and probabilistic amplitude shaping over the real AWGN channel."""

__version__ = "0.1.0"
