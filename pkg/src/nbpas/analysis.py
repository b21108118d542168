"""AWGN simulation, Monte Carlo density-evolution thresholds, and FER runs.

Density evolution tracks message populations in the true-symbol-centered
domain (entry 0 of every soft vector is the transmitted symbol), which stays
valid for shaped inputs and PAS framing where the all-zero-codeword argument
does not.  The (d_v = 2, d_c) ensemble is averaged by drawing fresh edge
coefficients and random message pairings every iteration.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass

import numpy as np
from scipy.stats import beta as beta_dist

from . import demap, pas
from .airs import MetricKind, required_snr, snr_db_to_sigma
from .decoder import decode_batch, wht
from .mapping import uniform_distribution

_PROB_FLOOR = 1e-30


@dataclass
class AwgnChannel:
    sigma: float
    rng: np.random.Generator

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    @property
    def snr_db(self):
        return -20.0 * np.log10(self.sigma)


def awgn_transmit(ch, x):
    return np.asarray(x, dtype=float) + ch.rng.normal(0.0, ch.sigma, len(x))


# -- Monte Carlo density evolution ------------------------------------------

@dataclass
class DeConfig:
    population: int = 20000
    max_iter: int = 200
    target_error: float = 1e-5
    bracket: tuple | None = None   # (lo, hi) dB; default: +-2 dB around AIR
    precision: float = 0.02        # bisection stop, dB

    def __post_init__(self):
        if self.population < 10 ** 3:
            raise ValueError("population must be at least 1000")
        if self.precision < 0.01:
            raise ValueError("precision must be at least 0.01 dB")


def _center(soft, true_sym):
    """Re-index soft vectors so the transmitted symbol sits at entry 0."""
    q = soft.shape[1]
    cols = np.arange(q)[None, :] ^ true_sym[:, None]
    return np.take_along_axis(soft, cols, axis=1)


def _de_priors(mode, f, c, dist, sigma, n_pop, rng):
    """Sample a centered population of decoder soft inputs for one mode.

    The population is generated from a long stream of channel uses laid out
    exactly like the finite-length chain, so the mixture of amplitude-,
    sign-, and boundary-symbol soft inputs matches the R_c : (1 - R_c)
    split automatically.
    """
    m, p = c.m, f.p
    shaped = mode.startswith("pas")
    if shaped:
        n_use = -(-n_pop * p // m) + p   # ceil, plus boundary slack
        amp_idx = rng.choice(len(c.amplitudes), size=n_use, p=dist.p_amp)
        sign_bits = rng.integers(0, 2, n_use)
        x = dist.scale * (2 * sign_bits - 1) * c.amplitudes[amp_idx]
        y = x + rng.normal(0.0, sigma, n_use)
    else:
        n_use = -(-n_pop * p // m) + p
        point_idx = rng.integers(0, c.M, n_use)
        x = dist.scale * c.points[point_idx]
        y = x + rng.normal(0.0, sigma, n_use)

    if mode.endswith("bmd"):
        llr = demap.bit_llrs(y, c, dist, sigma)
        if shaped:
            stream_llr = np.concatenate([llr[:, 1:].reshape(-1), llr[:, 0]])
            amp_bits = c.amplitude_label(amp_idx)
            stream_bits = np.concatenate(
                [amp_bits.reshape(-1), sign_bits])
        else:
            stream_llr = llr.reshape(-1)
            stream_bits = c.labels[point_idx].reshape(-1)
        n_sym = min(n_pop, stream_llr.size // p)
        soft = demap.bmd_combine(stream_llr[:n_sym * p].reshape(n_sym, p), f)
        true_sym = f.beta(stream_bits[:n_sym * p].reshape(n_sym, p))
        return _center(soft, true_sym)

    if mode == "uniform-smd":
        ell = demap.compatibility(p, m, "uniform-smd").ell
        n_sym = min(n_pop, n_use // ell)
        yb = y[:n_sym * ell].reshape(n_sym, ell)
        soft = demap.smd_uniform(yb, c, f, sigma)
        bits = c.labels[point_idx[:n_sym * ell]].reshape(n_sym, p)
        return _center(soft, f.beta(bits))

    if mode == "pas-smd":
        ell = demap.compatibility(p, m, "pas-smd").ell
        n_amp = round(n_pop * (m - 1) / m)
        n_sign = n_pop - n_amp
        # amplitude symbols
        na_use = n_amp * ell
        soft_a = demap.smd_pas(y[:na_use].reshape(n_amp, ell), "amplitude",
                               c, dist, sigma, f)
        bits_a = c.amplitude_label(amp_idx[:na_use]).reshape(n_amp, p)
        # sign symbols (fresh uses; ensemble marginals only)
        ns_use = n_sign * p
        amp_s = rng.choice(len(c.amplitudes), size=ns_use, p=dist.p_amp)
        sb = rng.integers(0, 2, ns_use)
        ys = (dist.scale * (2 * sb - 1) * c.amplitudes[amp_s]
              + rng.normal(0.0, sigma, ns_use))
        soft_s = demap.smd_pas(ys.reshape(n_sign, p), "sign",
                               c, dist, sigma, f)
        bits_s = sb.reshape(n_sign, p)
        soft = np.concatenate([_center(soft_a, f.beta(bits_a)),
                               _center(soft_s, f.beta(bits_s))])
        return soft
    raise ValueError(f"unknown DE mode {mode!r}")


def _normalize(p):
    p = np.maximum(p, _PROB_FLOOR)
    return p / p.sum(axis=1, keepdims=True)


_dual_perm_cache = {}


def _dual_perms(f):
    """Spectral image of the coefficient permutations, per field element.

    Permuting a length-q vector by x -> h*x over GF(2^p) is GF(2)-linear on
    the index bits, so it commutes with the WHT as another index permutation:
    WHT(v o A_h)(k) = WHT(v)(A_h^{-T} k).  Row h-1 of the returned (q-1, q)
    table is that dual permutation, letting DE apply fresh edge coefficients
    in the transform domain without per-edge transforms.
    """
    key = (f.p, f.prim_poly)
    if key not in _dual_perm_cache:
        q, p = f.q, f.p
        h = np.arange(1, q)
        # columns of A_{h^-1}: images of the bit basis under x -> h^-1 * x
        cols = f.mul(f.inv(h)[:, None], (1 << np.arange(p))[None, :])
        k = np.arange(q)[None, None, :]
        bits = np.bitwise_count(cols[:, :, None] & k) & 1   # (q-1, p, q)
        dual = np.bitwise_or.reduce(
            bits.astype(np.int64) << np.arange(p)[None, :, None], axis=1)
        mulperm = f.mul(h[:, None], np.arange(q)[None, :])
        _dual_perm_cache[key] = (dual.astype(np.int32),
                                 mulperm.astype(np.int64))
    return _dual_perm_cache[key]


def _de_run(priors, d_c, f, cfg, rng):
    """One DE run at fixed SNR; True if the tracked error converges."""
    priors = priors.astype(np.float32)
    n, q = priors.shape
    dual, mulperm = _dual_perms(f)

    def rand_perm_rows(msgs):
        h = rng.integers(1, q, size=n)
        return np.take_along_axis(msgs, mulperm[h - 1], axis=1)

    msgs = priors
    best = 1.0
    stall = 0
    idx = np.empty((n, q), dtype=np.int32)
    for _ in range(cfg.max_iter):
        flat = wht(msgs).reshape(-1)
        wacc = None
        for _e in range(d_c - 1):
            # pick a random message row and edge coefficient per sample,
            # with the coefficient permutation applied in the WHT domain
            rows = rng.integers(0, n, n, dtype=np.int32) * np.int32(q)
            h = rng.integers(1, q, size=n)
            np.add(rows[:, None], dual[h - 1], out=idx)
            factor = flat.take(idx)
            if wacc is None:
                wacc = factor
            else:
                wacc *= factor
        cn = _normalize(rand_perm_rows(wht(wacc) / q))
        pri = priors[rng.integers(0, n, n)]
        base = pri * cn
        msgs = _normalize(base)
        app = _normalize(base * cn[rng.permutation(n)])
        err = float(1.0 - app[:, 0].mean())
        if err < cfg.target_error:
            return True
        if err < best * 0.999:
            best = err
            stall = 0
        else:
            stall += 1
            if stall >= 30:
                return False
    return False


def _de_mode_dist(mode, c, shaping):
    return shaping if mode.startswith("pas") else uniform_distribution(c)


def de_threshold(d_c, f, mode, c, shaping=None, cfg=None, seed=0):
    """Bisect for the smallest SNR at which DE converges.

    mode is one of "uniform-bmd", "uniform-smd", "pas-bmd", "pas-smd";
    shaping is the MB distribution for the PAS modes.
    """
    cfg = cfg or DeConfig()
    kind = mode.split("-")[1]
    if kind != "bmd" and demap.compatibility(
            f.p, c.m, "uniform-smd" if mode.startswith("uni") else
            "pas-smd") is None:
        raise demap.CompatibilityError(f"mode {mode} incompatible")
    dist = _de_mode_dist(mode, c, shaping)
    bracket = cfg.bracket
    if bracket is None:
        r_c = 1 - 2 / d_c
        target = (dist.entropy_amp + 1 - (1 - r_c) * c.m
                  if mode.startswith("pas") else r_c * c.m)
        policy = None if mode.startswith("uni") else dist
        center = required_snr(MetricKind(kind), target, c, policy)
        bracket = (center - 2.0, center + 2.0)

    def converges(snr_db, trial):
        rng = np.random.default_rng([seed, trial])
        sigma = snr_db_to_sigma(snr_db)
        priors = _de_priors(mode, f, c, dist, sigma, cfg.population, rng)
        return _de_run(priors, d_c, f, cfg, rng)

    lo, hi = bracket
    trial = 0
    if converges(lo, trial):
        raise ValueError(f"bracket low end {lo} dB already converges")
    if not converges(hi, trial + 1):
        raise ValueError(f"bracket high end {hi} dB does not converge")
    trial = 2
    while hi - lo > cfg.precision:
        mid = 0.5 * (lo + hi)
        if converges(mid, trial):
            hi = mid
        else:
            lo = mid
        trial += 1
    return 0.5 * (lo + hi)


# -- frame error rate --------------------------------------------------------

@dataclass
class StopRule:
    min_errors: int = 50
    max_frames: int = 10 ** 6

    def __post_init__(self):
        if self.min_errors < 1:
            raise ValueError("min_errors must be at least 1")


@dataclass
class FerPoint:
    snr_db: float
    frames: int
    frame_errors: int
    seed: int

    @property
    def fer(self):
        return self.frame_errors / self.frames

    @property
    def ci95(self):
        """95% Clopper-Pearson interval on the frame error rate."""
        e, n = self.frame_errors, self.frames
        lo = 0.0 if e == 0 else float(beta_dist.ppf(0.025, e, n - e + 1))
        hi = 1.0 if e == n else float(beta_dist.ppf(0.975, e + 1, n - e))
        return lo, hi


def _fer_chunk(config, metric, sigma, seed, snr_idx, start, count, max_iter):
    """Simulate frames [start, start+count); returns the error count.

    Every frame is seeded by (seed, snr_idx, frame_idx) only, so results do
    not depend on chunking or worker count.
    """
    infos, priors, sent = [], [], []
    for fidx in range(start, start + count):
        rng = np.random.default_rng([seed, snr_idx, fidx])
        bits = rng.integers(0, 2, config.info_bits_per_frame)
        x, cw = pas.transmit_any(config, bits)
        y = x + rng.normal(0.0, sigma, len(x))
        infos.append(bits)
        sent.append(cw)
        priors.append(pas.demap_any(config, y, sigma, metric))
    hard, conv, _ = decode_batch(config.code, np.stack(priors), max_iter)
    errors = 0
    for bits, cw, dec in zip(infos, sent, hard):
        out = pas.receive_any(config, dec)
        if out is None or not np.array_equal(out, bits):
            errors += 1
    return errors


def run_fer(config, metric, snr_list, stop=None, seed=0, max_iter=100,
            threads=1, chunk=256):
    """FER per SNR point, counted after the inverse DM.

    Frames are simulated in fixed-size chunks; the stop rule (min_errors
    frame errors or max_frames) is evaluated between chunks, so totals are
    identical for any thread count.
    """
    stop = stop or StopRule()
    points = []
    for snr_idx, snr_db in enumerate(snr_list):
        sigma = snr_db_to_sigma(snr_db)
        frames = errors = 0
        while frames < stop.max_frames and errors < stop.min_errors:
            count = min(chunk, stop.max_frames - frames)
            if threads > 1 and count >= 2 * threads:
                split = np.array_split(np.arange(count), threads)
                with concurrent.futures.ProcessPoolExecutor(threads) as ex:
                    futs = [ex.submit(_fer_chunk, config, metric, sigma,
                                      seed, snr_idx, frames + int(s[0]),
                                      len(s), max_iter)
                            for s in split if len(s)]
                    errors += sum(ft.result() for ft in futs)
            else:
                errors += _fer_chunk(config, metric, sigma, seed, snr_idx,
                                     frames, count, max_iter)
            frames += count
        points.append(FerPoint(snr_db=snr_db, frames=frames,
                               frame_errors=errors, seed=seed))
    return points
