"""Probability-domain belief propagation for non-binary LDPC codes.

Check-node updates run in the Walsh-Hadamard domain: the additive group of
GF(2^p) is (Z/2)^p, so the GF convolution of check-node inputs is an XOR
convolution, diagonalized by the WHT.  Edge coefficients act as index
permutations before and after the convolution.

decode_batch() processes many frames at once with a flooding schedule and
per-frame early stopping; decode() is the single-frame wrapper.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_PROB_FLOOR = 1e-30


_hadamard_cache = {}


def _hadamard(n, dtype):
    key = (n, dtype)
    if key not in _hadamard_cache:
        h = np.array([[1.0]])
        while h.shape[0] < n:
            h = np.block([[h, h], [h, -h]])
        _hadamard_cache[key] = h.astype(dtype)
    return _hadamard_cache[key]


def wht(v):
    """Unnormalized Walsh-Hadamard transform along the last axis.

    Done as a dense Hadamard matmul for the q <= 1024 used here (BLAS beats
    the butterfly at these sizes); a butterfly pass covers larger lengths.
    """
    v = np.asarray(v)
    if not np.issubdtype(v.dtype, np.floating):
        v = v.astype(float)
    n = v.shape[-1]
    if n & (n - 1):
        raise ValueError("length must be a power of two")
    if n <= 1024:
        return v @ _hadamard(n, v.dtype)
    y = v.copy()
    flat = y.reshape(-1, n)
    h = 1
    while h < n:
        z = flat.reshape(flat.shape[0], n // (2 * h), 2, h)
        a = z[:, :, 0, :].copy()
        b = z[:, :, 1, :].copy()
        z[:, :, 0, :] = a + b
        z[:, :, 1, :] = a - b
        h *= 2
    return y


@dataclass
class DecodeResult:
    hard: np.ndarray
    converged: bool
    iterations: int


class _Wiring:
    """Precomputed edge layout and coefficient permutations for one code."""

    def __init__(self, code):
        f = code.field
        q = f.q
        ecol, ecoef = [], []
        row_slots = []
        for row in code.rows:
            slots = []
            for col, coef in row:
                slots.append(len(ecol))
                ecol.append(col)
                ecoef.append(coef)
            row_slots.append(slots)
        e = len(ecol)
        self.q = q
        self.n_edges = e
        self.ecol = np.array(ecol, dtype=np.int64)
        ecoef = np.array(ecoef, dtype=np.int64)

        d_c = max(len(s) for s in row_slots)
        self.row_edges = np.full((len(row_slots), d_c), -1, dtype=np.int64)
        for j, slots in enumerate(row_slots):
            self.row_edges[j, :len(slots)] = slots
        col_lists = [[] for _ in range(code.n_c)]
        for eid, col in enumerate(ecol):
            col_lists[col].append(eid)
        d_v = max(len(s) for s in col_lists)
        self.col_edges = np.full((code.n_c, d_v), -1, dtype=np.int64)
        for i, slots in enumerate(col_lists):
            self.col_edges[i, :len(slots)] = slots

        # index remaps: toward the check t = h*c, back c = h^{-1}*t
        grid = np.arange(q)[None, :]
        self.to_check = f.mul(f.inv(ecoef)[:, None], grid)   # gather for Q(t)
        self.from_check = f.mul(ecoef[:, None], grid)        # gather for R(c)

        # segmented layout for batched syndrome checks
        self.ecoef = ecoef
        self.row_ptr = np.cumsum(
            [0] + [len(s) for s in row_slots])[:-1].astype(np.int64)


_wiring_cache = {}


def _wiring(code):
    key = id(code)
    w = _wiring_cache.get(key)
    if w is None or w[0] is not code:
        w = (code, _Wiring(code))
        _wiring_cache[key] = w
    return w[1]


def _leave_one_out(prod_terms):
    """Leave-one-out products along axis -2 via prefix/suffix cumprods."""
    if prod_terms.shape[-2] == 1:
        return np.ones_like(prod_terms)
    pre = np.cumprod(prod_terms, axis=-2)
    suf = np.cumprod(prod_terms[..., ::-1, :], axis=-2)[..., ::-1, :]
    out = np.empty_like(prod_terms)
    out[..., 0, :] = suf[..., 1, :]
    out[..., -1, :] = pre[..., -2, :]
    if prod_terms.shape[-2] > 2:
        out[..., 1:-1, :] = pre[..., :-2, :] * suf[..., 2:, :]
    return out


def _normalize(p):
    p = np.maximum(p, _PROB_FLOOR)
    return p / p.sum(axis=-1, keepdims=True)


def decode_batch(code, priors, max_iter=100):
    """Flooding sum-product decoding of a batch of frames.

    priors: (batch, n_c, q) a-priori probability matrices.
    Returns (hard (batch, n_c), converged (batch,), iterations (batch,)).
    """
    priors = np.asarray(priors, dtype=float)
    batch, n_c, q = priors.shape
    if n_c != code.n_c or q != code.field.q:
        raise ValueError("soft input dimensions do not match the code")
    w = _wiring(code)
    rowsums = priors.sum(axis=-1)
    if (np.abs(rowsums - 1.0) > 1e-6).any() or (priors < 0).any():
        raise ValueError("soft input rows must be normalized probabilities")

    hard_out = np.zeros((batch, n_c), dtype=np.int64)
    conv_out = np.zeros(batch, dtype=bool)
    iter_out = np.full(batch, max_iter, dtype=np.int64)
    active = np.arange(batch)

    pri = _normalize(priors)
    c2v = np.ones((batch, w.n_edges, q)) / q

    for it in range(1, max_iter + 1):
        p = pri[active]
        msgs = c2v

        # variable-node update: prior times extrinsic product per edge
        col_msgs = _gather_padded(msgs, w.col_edges, fill=1.0)
        extr = _leave_one_out(col_msgs)
        v2c_cols = _normalize(p[:, :, None, :] * extr)
        v2c = np.empty_like(msgs)
        valid = w.col_edges >= 0
        v2c[:, w.col_edges[valid]] = v2c_cols[:, valid]

        # check-node update in the WHT domain
        qmsg = np.take_along_axis(
            v2c, np.broadcast_to(w.to_check, v2c.shape), axis=-1)
        wq = wht(qmsg)
        row_w = _gather_padded(wq, w.row_edges, fill=1.0)
        loo = _leave_one_out(row_w)
        r = wht(loo) / q
        r_edges = np.empty_like(wq)
        validr = w.row_edges >= 0
        r_edges[:, w.row_edges[validr]] = r[:, validr]
        r_edges = np.take_along_axis(
            r_edges, np.broadcast_to(w.from_check, r_edges.shape), axis=-1)
        c2v = _normalize(r_edges)

        # a-posteriori hard decision and early stop on zero syndrome
        app_terms = _gather_padded(c2v, w.col_edges, fill=1.0)
        app = p * app_terms.prod(axis=2)
        hard = app.argmax(axis=-1)
        ok = _syndrome_zero(code, w, hard)
        if ok.any():
            hard_out[active[ok]] = hard[ok]
            conv_out[active[ok]] = True
            iter_out[active[ok]] = it
            keep = ~ok
            active = active[keep]
            if len(active) == 0:
                break
            c2v = c2v[keep]
        if it == max_iter and len(active):
            hard_out[active] = hard[~ok] if ok.any() else hard
    return hard_out, conv_out, iter_out


def _gather_padded(msgs, slot_table, fill):
    """Gather per-edge messages into (batch, nodes, slots, q), padding -1."""
    safe = np.maximum(slot_table, 0)
    out = msgs[:, safe.reshape(-1)].reshape(
        msgs.shape[0], *slot_table.shape, msgs.shape[-1])
    out[:, slot_table < 0] = fill
    return out


def _syndrome_zero(code, w, hard):
    """Vectorized zero-syndrome check for a batch of hard decisions."""
    terms = code.field.mul(w.ecoef[None, :], hard[:, w.ecol])
    synd = np.bitwise_xor.reduceat(terms, w.row_ptr, axis=1)
    return ~synd.any(axis=1)


def decode(code, soft_input, max_iter=100):
    """Decode a single frame; see decode_batch for the schedule."""
    hard, conv, iters = decode_batch(code, soft_input[None], max_iter)
    return DecodeResult(hard=hard[0], converged=bool(conv[0]),
                        iterations=int(iters[0]))
