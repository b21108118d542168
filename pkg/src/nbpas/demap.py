"""Channel soft-information for symbol-metric and bit-metric decoding.

All producers return per-symbol probability vectors over GF(q), normalized
row-wise, computed in the log domain for stability.  Batch-first: the symbol
axis comes first and single frames are just batches.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LLR_CLAMP = 40.0


class CompatibilityError(ValueError):
    """Field order and constellation size cannot be combined in this mode."""


@dataclass(frozen=True)
class Compatibility:
    mode: str               # "uniform-smd" | "pas-smd" | "bmd"
    ell: int | None         # channel symbols / amplitudes per field symbol


def compatibility(p, m, mode):
    """Field/constellation compatibility; None when the mode cannot be built.

    Uniform SMD needs p = ell*m, PAS SMD needs p = ell*(m-1); BMD places no
    constraint on the pair (the whole point of bit-metric operation).
    """
    if mode == "bmd":
        return Compatibility(mode=mode, ell=None)
    if mode == "uniform-smd":
        return (Compatibility(mode, p // m) if p % m == 0 else None)
    if mode == "pas-smd":
        if m > 1 and p % (m - 1) == 0:
            return Compatibility(mode, p // (m - 1))
        return None
    raise ValueError(f"unknown mode {mode!r}")


def _log_normalize(logp):
    logp = logp - logp.max(axis=-1, keepdims=True)
    p = np.exp(logp)
    return p / p.sum(axis=-1, keepdims=True)


def bit_llrs(y, c, dist, sigma):
    """Per-bit-level LLRs l_{i,j} = ln P(B_j=0|y_i) / P(B_j=1|y_i).

    dist carries the transmit-side prior P_X and the power-normalizing scale;
    positive values favor bit 0.
    """
    from scipy.special import logsumexp

    y = np.asarray(y, dtype=float)
    x = dist.scale * c.points.astype(float)
    logpx = np.log(np.maximum(dist.p_x, 1e-300))
    loglik = -((y[:, None] - x[None, :]) ** 2) / (2.0 * sigma ** 2) + logpx
    out = np.empty((len(y), c.m))
    for j in range(c.m):
        b0 = c.labels[:, j] == 0
        out[:, j] = (logsumexp(loglik[:, b0], axis=1)
                     - logsumexp(loglik[:, ~b0], axis=1))
    return out


def bmd_combine(llrs, f):
    """Combine per-bit LLRs into symbol probability vectors (bit-metric).

    llrs: (n_sym, p) in codeword bit order, MSB-first per symbol (or a flat
    vector of n_sym*p entries).  Returns (n_sym, q) normalized rows.
    """
    llrs = np.asarray(llrs, dtype=float)
    if llrs.ndim == 1:
        if llrs.size % f.p:
            raise ValueError("flat LLR length not divisible by p")
        llrs = llrs.reshape(-1, f.p)
    if llrs.shape[1] != f.p:
        raise ValueError(f"expected {f.p} bit levels per symbol")
    l = np.clip(llrs, -LLR_CLAMP, LLR_CLAMP)
    logp0 = -np.logaddexp(0.0, -l)      # log sigma(l)
    logp1 = -np.logaddexp(0.0, l)
    bits = f.beta_inv(np.arange(f.q))   # (q, p) MSB-first
    logp = logp0 @ (1 - bits.T) + logp1 @ bits.T
    return _log_normalize(logp)


# -- symbol-metric soft information ----------------------------------------

_table_cache = {}


def _symbol_tables(f, c):
    key = (f.p, f.prim_poly, c.m)
    if key not in _table_cache:
        bits = f.beta_inv(np.arange(f.q))
        tables = {}
        comp = compatibility(f.p, c.m, "uniform-smd")
        if comp is not None:
            chunk = bits.reshape(f.q, comp.ell, c.m)
            tables["points"] = c.points[c.label_index(chunk)]
        comp = compatibility(f.p, c.m, "pas-smd")
        if comp is not None and c.m > 1:
            chunk = bits.reshape(f.q, comp.ell, c.m - 1)
            tables["amps"] = c.amplitudes[c.amplitude_index(chunk)]
        tables["signs"] = 2 * bits - 1    # bit 1 -> +1 (positive half-plane)
        _table_cache[key] = tables
    return _table_cache[key]


def smd_uniform(y_blocks, c, f, sigma):
    """Symbol posteriors for uniform signaling, ell = p/m channel uses each.

    y_blocks: (N, ell) received samples per codeword symbol.
    """
    comp = compatibility(f.p, c.m, "uniform-smd")
    if comp is None:
        raise CompatibilityError(
            f"p={f.p} is not a multiple of m={c.m} (uniform SMD)")
    y = np.atleast_2d(np.asarray(y_blocks, dtype=float))
    if y.shape[1] != comp.ell:
        raise ValueError(f"expected blocks of {comp.ell} samples")
    from .mapping import uniform_distribution
    x = uniform_distribution(c).scale * _symbol_tables(f, c)["points"]
    logp = -(((y[:, None, :] - x[None, :, :]) ** 2).sum(axis=2)
             / (2.0 * sigma ** 2))
    return _log_normalize(logp)


def smd_pas(y_blocks, kind, c, dist, sigma, f):
    """Symbol posteriors for the PAS symbol-metric receiver.

    kind "amplitude": blocks of ell = p/(m-1) samples whose amplitudes form
    the symbol; the unknown signs are marginalized uniformly.  kind "sign":
    blocks of p samples whose sign bits form the symbol; the amplitudes are
    marginalized with the shaping prior P_A.
    """
    comp = compatibility(f.p, c.m, "pas-smd")
    if comp is None:
        raise CompatibilityError(
            f"p={f.p} is not a multiple of m-1={c.m - 1} (PAS SMD)")
    y = np.atleast_2d(np.asarray(y_blocks, dtype=float))
    tables = _symbol_tables(f, c)
    inv_2s2 = 1.0 / (2.0 * sigma ** 2)
    if kind == "amplitude":
        if y.shape[1] != comp.ell:
            raise ValueError(f"expected blocks of {comp.ell} samples")
        amps_t = tables["amps"]                          # (q, ell)
        a = dist.scale * amps_t.astype(float)
        ll_pos = -((y[:, None, :] - a[None]) ** 2) * inv_2s2
        ll_neg = -((y[:, None, :] + a[None]) ** 2) * inv_2s2
        # posterior: shaping prior P_A on each amplitude, signs uniform
        log_pa = np.log(np.maximum(dist.p_amp, 1e-300))
        log_prior = log_pa[(amps_t - 1) // 2].sum(axis=1)  # (q,)
        logp = np.logaddexp(ll_pos, ll_neg).sum(axis=2) + log_prior
        return _log_normalize(logp)
    if kind == "sign":
        if y.shape[1] != f.p:
            raise ValueError(f"expected blocks of {f.p} samples")
        from scipy.special import logsumexp
        amp = dist.scale * c.amplitudes.astype(float)    # (A,)
        log_pa = np.log(np.maximum(dist.p_amp, 1e-300))
        s = tables["signs"]                              # (q, p) in {-1,+1}
        # (N, q, p, A) collapsed over the amplitude prior
        ll = -((y[:, None, :, None] - s[None, :, :, None] * amp) ** 2
               ) * inv_2s2 + log_pa
        logp = logsumexp(ll, axis=3).sum(axis=2)
        return _log_normalize(logp)
    raise ValueError(f"unknown symbol kind {kind!r}")
