"""Probabilistic amplitude shaping chain and the uniform baseline chain.

Bit layout of a PAS frame (the only free choice the chain has to freeze):
the codeword binary image, read in the order "systematic symbols ascending,
then parity symbols ascending", is the concatenation of

  * the amplitude labels (bit levels 2..m) of channel uses 1..n, then
  * the sign bits (bit level 1) of channel uses 1..n.

The first k_c*p positions of that stream are the systematic bit-string, so
amplitude bits fill the information part, the n_extra trailing systematic
bits carry data-borne signs for channel uses 1..n_extra, and parity bits
supply the remaining signs in channel-use order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import demap, ldpc, matcher
from .mapping import mb_fit, uniform_distribution


class PasConfigError(ValueError):
    pass


@dataclass
class PasConfig:
    constellation: object
    field: object
    code: object
    dist: object                 # MB-fitted ShapedDistribution
    comp: object                 # DM composition over the amplitudes
    n: int                       # channel uses per frame
    n_extra: int                 # data-borne sign bits
    eta: float                   # realized transmission rate (bits/use)
    slot_cols: np.ndarray        # stream symbol slot -> codeword column
    bit_use: np.ndarray          # (n_c, p): channel use of each codeword bit
    bit_level: np.ndarray        # (n_c, p): 1-based bit level

    @property
    def info_bits_per_frame(self):
        return self.comp.k + self.n_extra

    @property
    def metric_modes(self):
        modes = ["bmd"]
        if demap.compatibility(self.field.p, self.constellation.m,
                               "pas-smd") is not None:
            modes.append("smd")
        return modes


def build_config(c, f, code, target_rdm=None, target_eta=None):
    """Validate and assemble a PAS configuration.

    Exactly one of target_rdm / target_eta selects the matcher rate; the
    realized rate k/n (and therefore eta) can be slightly below the target
    because k is an integer number of bits.
    """
    m, p = c.m, f.p
    if (target_rdm is None) == (target_eta is None):
        raise PasConfigError("give exactly one of target_rdm / target_eta")
    r_c = Fraction(code.k_c, code.n_c)
    if target_eta is not None:
        target_rdm = Fraction(target_eta) - 1 + (1 - r_c) * m
    if code.field is not f and code.field != f:
        raise PasConfigError("code is not defined over the given field")
    if (code.n_c * p) % m:
        raise PasConfigError(
            f"n_c*p = {code.n_c * p} not divisible by m = {m}")
    n = code.n_c * p // m
    if r_c < Fraction(m - 1, m):
        raise PasConfigError(
            f"code rate {r_c} below the PAS minimum (m-1)/m = {m - 1}/{m}")
    n_extra = n - code.m_c * p
    if not 0 < target_rdm <= m - 1:
        raise PasConfigError(
            f"implied matcher rate {target_rdm} outside (0, {m - 1}]")
    dist = mb_fit(c, float(target_rdm))
    comp = matcher.composition_for(dist.p_amp, n, tuple(c.amplitudes))
    eta = comp.k / n + 1 - float(1 - r_c) * m
    slot_cols, bit_use, bit_level = _layout(code, n, m, p)
    return PasConfig(
        constellation=c, field=f, code=code, dist=dist, comp=comp,
        n=n, n_extra=n_extra, eta=eta,
        slot_cols=slot_cols, bit_use=bit_use, bit_level=bit_level)


def _layout(code, n, m, p):
    """Codeword-bit position <-> (channel use, bit level) maps."""
    slot_cols = np.concatenate([code.systematic_cols, code.parity_cols])
    t = np.arange(code.n_c * p)
    amp = t < n * (m - 1)
    use = np.where(amp, t // (m - 1), t - n * (m - 1))
    level = np.where(amp, 2 + t % (m - 1), 1)
    bit_use = np.empty((code.n_c, p), dtype=np.int64)
    bit_level = np.empty((code.n_c, p), dtype=np.int64)
    bit_use[slot_cols] = use.reshape(code.n_c, p)
    bit_level[slot_cols] = level.reshape(code.n_c, p)
    return slot_cols, bit_use, bit_level


def transmit(config, info_bits, rng=None):
    """Map one frame of information bits to channel symbols.

    Returns (x, codeword); the codeword is exposed for test hooks.  The
    first comp.k bits feed the matcher, the last n_extra are direct signs.
    """
    c, f, code = config.constellation, config.field, config.code
    info_bits = np.asarray(info_bits)
    if info_bits.shape != (config.info_bits_per_frame,):
        raise PasConfigError(
            f"expected {config.info_bits_per_frame} information bits")
    dm_bits = info_bits[:config.comp.k]
    extra_sign_bits = info_bits[config.comp.k:]

    amps = matcher.dm_encode(dm_bits, config.comp)
    amp_idx = (amps - 1) // 2
    amp_bits = c.amplitude_label(amp_idx)            # (n, m-1)

    sys_bits = np.concatenate([amp_bits.reshape(-1), extra_sign_bits])
    info_symbols = f.beta(sys_bits.reshape(code.k_c, f.p))
    cw = ldpc.encode(code, info_symbols)

    parity_bits = f.beta_inv(cw[code.parity_cols]).reshape(-1)
    sign_bits = np.concatenate([extra_sign_bits, parity_bits])
    signs = 2 * sign_bits - 1                        # bit 1 -> positive
    x = config.dist.scale * signs * amps
    return x, cw


def receive(config, decoded_codeword):
    """Recover the frame's information bits, or None on a detected error.

    A matcher composition mismatch or out-of-image sequence after the
    inverse DM counts as a frame error (returned as None).
    """
    c, f = config.constellation, config.field
    n, m = config.n, c.m
    stream = f.beta_inv(
        np.asarray(decoded_codeword)[config.slot_cols]).reshape(-1)
    amp_bits = stream[:n * (m - 1)].reshape(n, m - 1)
    amps = c.amplitudes[c.amplitude_index(amp_bits)]
    try:
        dm_bits = matcher.dm_decode(amps, config.comp)
    except matcher.DematchError:
        return None
    extra = stream[n * (m - 1): n * (m - 1) + config.n_extra]
    return np.concatenate([dm_bits, extra])


def demap_frame(config, y, sigma, metric):
    """Decoder soft input (n_c, q) for one received PAS frame."""
    c, f, code = config.constellation, config.field, config.code
    n, m, p = config.n, c.m, f.p
    priors = np.empty((code.n_c, f.q))
    if metric == "bmd":
        llr = demap.bit_llrs(y, c, config.dist, sigma)   # (n, m)
        stream = np.concatenate([llr[:, 1:].reshape(-1), llr[:, 0]])
        soft = demap.bmd_combine(stream.reshape(code.n_c, p), f)
        priors[config.slot_cols] = soft
        return priors
    if metric == "smd":
        comp = demap.compatibility(p, m, "pas-smd")
        if comp is None:
            raise demap.CompatibilityError(
                f"PAS SMD incompatible: p={p}, m={m}")
        if n * (m - 1) % p or n % p:
            raise demap.CompatibilityError(
                "frame does not split into whole SMD symbols")
        n_amp_sym = n * (m - 1) // p
        soft_a = demap.smd_pas(y.reshape(n_amp_sym, comp.ell), "amplitude",
                               c, config.dist, sigma, f)
        soft_s = demap.smd_pas(y.reshape(n // p, p), "sign",
                               c, config.dist, sigma, f)
        priors[config.slot_cols] = np.concatenate([soft_a, soft_s])
        return priors
    raise ValueError(f"unknown metric {metric!r}")


# -- uniform baseline chain (no shaping) -----------------------------------

@dataclass
class UniformConfig:
    constellation: object
    field: object
    code: object
    dist: object
    n: int

    @property
    def info_bits_per_frame(self):
        return self.code.k_c * self.field.p

    @property
    def eta(self):
        return self.code.design_rate * self.constellation.m

    @property
    def metric_modes(self):
        modes = ["bmd"]
        if demap.compatibility(self.field.p, self.constellation.m,
                               "uniform-smd") is not None:
            modes.append("smd")
        return modes


def build_uniform_config(c, f, code):
    if (code.n_c * f.p) % c.m:
        raise PasConfigError(
            f"n_c*p = {code.n_c * f.p} not divisible by m = {c.m}")
    return UniformConfig(constellation=c, field=f, code=code,
                         dist=uniform_distribution(c),
                         n=code.n_c * f.p // c.m)


def transmit_uniform(config, info_bits, rng=None):
    """Uniform chain: pack, encode, map m-bit blocks in natural order."""
    c, f, code = config.constellation, config.field, config.code
    info_bits = np.asarray(info_bits)
    if info_bits.shape != (config.info_bits_per_frame,):
        raise PasConfigError(
            f"expected {config.info_bits_per_frame} information bits")
    info_symbols = f.beta(info_bits.reshape(code.k_c, f.p))
    cw = ldpc.encode(code, info_symbols)
    bits = f.beta_inv(cw).reshape(-1)
    idx = c.label_index(bits.reshape(config.n, c.m))
    x = config.dist.scale * c.points[idx]
    return x, cw


def receive_uniform(config, decoded_codeword):
    f, code = config.field, config.code
    info = np.asarray(decoded_codeword)[code.systematic_cols]
    return f.beta_inv(info).reshape(-1)


def demap_frame_uniform(config, y, sigma, metric):
    """Decoder soft input (n_c, q) for one received uniform frame."""
    c, f, code = config.constellation, config.field, config.code
    if metric == "bmd":
        llr = demap.bit_llrs(y, c, config.dist, sigma)
        return demap.bmd_combine(llr.reshape(code.n_c, f.p), f)
    if metric == "smd":
        comp = demap.compatibility(f.p, c.m, "uniform-smd")
        if comp is None:
            raise demap.CompatibilityError(
                f"uniform SMD incompatible: p={f.p}, m={c.m}")
        return demap.smd_uniform(y.reshape(code.n_c, comp.ell), c, f, sigma)
    raise ValueError(f"unknown metric {metric!r}")


def transmit_any(config, info_bits):
    if isinstance(config, PasConfig):
        return transmit(config, info_bits)
    return transmit_uniform(config, info_bits)


def receive_any(config, decoded_codeword):
    if isinstance(config, PasConfig):
        return receive(config, decoded_codeword)
    return receive_uniform(config, decoded_codeword)


def demap_any(config, y, sigma, metric):
    if isinstance(config, PasConfig):
        return demap_frame(config, y, sigma, metric)
    return demap_frame_uniform(config, y, sigma, metric)
