"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

The density-evolution and FER criteria are Monte Carlo and take tens of
minutes at the default analysis settings; run with `-s` to watch progress.
"""

import itertools

import numpy as np
import pytest

from nbpas import analysis, ldpc, matcher, pas
from nbpas.airs import required_snr
from nbpas.decoder import decode_batch, wht
from nbpas.demap import bmd_combine, compatibility, smd_pas, smd_uniform
from nbpas.galois import make_field
from nbpas.mapping import make_ask, mb_fit, uniform_distribution


def report(num, name, ok, detail=""):
    tag = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {num} ({name}): {tag} {detail}".rstrip())
    return ok


@pytest.fixture(scope="module")
def systems():
    """The six operating modes: (SE, shaping) -> chain config."""
    f64, f256 = make_field(6), make_field(8)
    ask8, ask16 = make_ask(3), make_ask(4)
    out = {
        ("1.5", "uniform"): pas.build_uniform_config(
            ask8, f64, ldpc.construct(f64, 96, 4, seed=2)),
        ("1.5", "pas"): pas.build_config(
            ask8, f64, ldpc.construct(f64, 96, 8, seed=1), target_rdm=1.25),
        ("2.0", "uniform"): pas.build_uniform_config(
            ask8, f64, ldpc.construct(f64, 96, 6, seed=3)),
        ("2.0", "pas"): pas.build_config(
            ask8, f64, ldpc.construct(f64, 96, 8, seed=4), target_rdm=1.75),
        ("3.0", "uniform"): pas.build_uniform_config(
            ask16, f256, ldpc.construct(f256, 144, 8, seed=5)),
        ("3.0", "pas"): pas.build_config(
            ask16, f256, ldpc.construct(f256, 144, 12, seed=6),
            target_rdm=8 / 3),
    }
    return out


@pytest.fixture(scope="module")
def de_thresholds():
    """All ten density-evolution thresholds at the default settings."""
    f64, f256 = make_field(6), make_field(8)
    ask8, ask16 = make_ask(3), make_ask(4)
    mb125 = mb_fit(ask8, 1.25)
    mb175 = mb_fit(ask8, 1.75)
    mb83 = mb_fit(ask16, 8 / 3)
    jobs = {
        ("1.5", "uniform", "bmd"): (4, f64, ask8, None),
        ("1.5", "uniform", "smd"): (4, f64, ask8, None),
        ("1.5", "pas", "bmd"): (8, f64, ask8, mb125),
        ("1.5", "pas", "smd"): (8, f64, ask8, mb125),
        ("2.0", "uniform", "bmd"): (6, f64, ask8, None),
        ("2.0", "uniform", "smd"): (6, f64, ask8, None),
        ("2.0", "pas", "bmd"): (8, f64, ask8, mb175),
        ("2.0", "pas", "smd"): (8, f64, ask8, mb175),
        ("3.0", "uniform", "bmd"): (8, f256, ask16, None),
        ("3.0", "pas", "bmd"): (12, f256, ask16, mb83),
    }
    out = {}
    for (se, shaping, metric), (d_c, f, c, dist) in jobs.items():
        mode = f"{shaping}-{metric}"
        out[(se, shaping, metric)] = analysis.de_threshold(
            d_c, f, mode, c, shaping=dist, seed=1)
        print(f"  de-threshold {se} {mode}: "
              f"{out[(se, shaping, metric)]:.3f} dB", flush=True)
    return out


# -- criterion 1: rate rows ---------------------------------------------------

def test_criterion_1_rate_rows():
    ask8, ask16 = make_ask(3), make_ask(4)
    rows = [
        # (metric, rate, constellation, H(A) policy, expected dB, tolerance)
        ("bmd", 1.5, ask8, None, 9.44, 0.03),
        ("smd", 1.5, ask8, None, 9.00, 0.03),
        ("bmd", 2.0, ask8, None, 12.72, 0.03),
        ("smd", 2.0, ask8, None, 12.61, 0.03),
        ("bmd", 3.0, ask16, None, 19.25, 0.03),
        ("smd", 3.0, ask16, None, 19.17, 0.03),
        ("bmd", 1.5, ask8, 1.25, 8.48, 0.10),
        ("smd", 1.5, ask8, 1.25, 8.46, 0.10),
        ("bmd", 2.0, ask8, 1.75, 11.89, 0.10),
        ("smd", 2.0, ask8, 1.75, 11.87, 0.10),
        ("bmd", 3.0, ask16, 8 / 3, 18.11, 0.10),
        ("smd", 3.0, ask16, 8 / 3, 18.10, 0.10),
    ]
    worst = -np.inf
    ok = True
    for metric, rate, c, ha, expected, tol in rows:
        got = required_snr(metric, rate, c, dist_policy=ha)
        err = abs(got - expected)
        worst = max(worst, err - tol)
        if err > tol:
            ok = False
            print(f"  rate row ({metric}, {rate}, H(A)={ha}): "
                  f"{got:.3f} dB vs {expected} +- {tol}")
    assert report(1, "rate rows", ok, f"worst margin {worst:+.3f} dB")


# -- criterion 2: DE thresholds ----------------------------------------------

def test_criterion_2_de_thresholds(de_thresholds):
    expected = {
        ("1.5", "uniform", "bmd"): 9.93,
        ("1.5", "uniform", "smd"): 9.53,
        ("1.5", "pas", "bmd"): 8.90,
        ("1.5", "pas", "smd"): 8.92,
        ("2.0", "uniform", "bmd"): 13.20,
        ("2.0", "uniform", "smd"): 13.10,
        ("2.0", "pas", "bmd"): 12.31,
        ("2.0", "pas", "smd"): 12.29,
        ("3.0", "uniform", "bmd"): 19.79,
        ("3.0", "pas", "bmd"): 18.54,
    }
    ok = True
    worst = 0.0
    for key, ref in expected.items():
        err = abs(de_thresholds[key] - ref)
        worst = max(worst, err)
        if err > 0.2:
            ok = False
            print(f"  threshold {key}: {de_thresholds[key]:.3f} dB "
                  f"vs {ref} +- 0.2")
    assert report(2, "DE thresholds", ok, f"worst |error| {worst:.3f} dB")


# -- criterion 3: BMD and SMD coincide for PAS -------------------------------

FER_POINTS = {"1.5": [9.6, 10.0, 10.4], "2.0": [13.0, 13.4, 13.8]}


def test_criterion_3_bmd_smd_coincide(systems, de_thresholds):
    ok = True
    for se in ("1.5", "2.0"):
        thr_gap = abs(de_thresholds[(se, "pas", "bmd")]
                      - de_thresholds[(se, "pas", "smd")])
        if thr_gap > 0.1:
            ok = False
            print(f"  SE {se}: DE threshold gap {thr_gap:.3f} dB > 0.1")
        cfg = systems[(se, "pas")]
        stop = analysis.StopRule(min_errors=40, max_frames=40000)
        pts = {m: analysis.run_fer(cfg, m, FER_POINTS[se], stop=stop,
                                   seed=21, max_iter=100)
               for m in ("bmd", "smd")}
        for pb, ps in zip(pts["bmd"], pts["smd"]):
            blo, bhi = pb.ci95
            slo, shi = ps.ci95
            overlap = max(blo, slo) <= min(bhi, shi)
            print(f"  SE {se} @ {pb.snr_db} dB: bmd {pb.fer:.3g} "
                  f"[{blo:.3g},{bhi:.3g}] smd {ps.fer:.3g} "
                  f"[{slo:.3g},{shi:.3g}]"
                  + ("" if overlap else "  NO OVERLAP"), flush=True)
            if not overlap:
                ok = False
        if min(pt.fer for pt in pts["bmd"] + pts["smd"]) > 1e-2:
            ok = False
            print(f"  SE {se}: no point reaches FER 1e-2")
    assert report(3, "BMD/SMD FER coincide", ok)


# -- criterion 4: configuration flexibility ----------------------------------

def test_criterion_4_flexibility(systems):
    ok = True
    # GF(256) + 16-ASK PAS: BMD builds and simulates, PAS-SMD impossible
    cfg = systems[("3.0", "pas")]
    if compatibility(8, 4, "pas-smd") is not None:
        ok = False
        print("  GF(256)+16-ASK PAS-SMD unexpectedly compatible")
    if cfg.metric_modes != ["bmd"]:
        ok = False
        print(f"  GF(256)+16-ASK metric modes {cfg.metric_modes}")
    pts = analysis.run_fer(cfg, "bmd", [25.0],
                           stop=analysis.StopRule(min_errors=1, max_frames=8),
                           seed=2, max_iter=20)
    if pts[0].frame_errors != 0:
        ok = False
        print("  GF(256)+16-ASK BMD did not simulate cleanly at high SNR")
    # GF(32) + 8-ASK PAS builds under BMD
    f32 = make_field(5)
    code = ldpc.construct(f32, 96, 8, seed=9)
    cfg32 = pas.build_config(make_ask(3), f32, code, target_rdm=1.25)
    if "bmd" not in cfg32.metric_modes:
        ok = False
        print("  GF(32)+8-ASK PAS lacks BMD")
    rng = np.random.default_rng(0)
    bits = rng.integers(0, 2, cfg32.info_bits_per_frame)
    x, cw = pas.transmit(cfg32, bits)
    if not np.array_equal(pas.receive(cfg32, cw), bits):
        ok = False
        print("  GF(32)+8-ASK PAS round-trip failed")
    assert report(4, "flexibility", ok)


# -- criterion 5: oracle equivalences ----------------------------------------

def test_criterion_5_oracles():
    rng = np.random.default_rng(5)
    ok = True

    # field axioms on 1e5 random triples
    f = make_field(8)
    a, b, c = rng.integers(0, 256, (3, 100_000))
    axioms = (np.array_equal(f.mul(a, b), f.mul(b, a))
              and np.array_equal(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)))
              and np.array_equal(f.mul(a, b ^ c), f.mul(a, b) ^ f.mul(a, c)))
    nz = a[a != 0]
    axioms = axioms and np.array_equal(f.mul(nz, f.inv(nz)),
                                       np.ones(len(nz), dtype=int))
    if not axioms:
        ok = False
        print("  field axioms failed")

    # beta bijection for p <= 8
    for p in range(1, 9):
        fp = make_field(p)
        if not np.array_equal(fp.beta(fp.beta_inv(np.arange(fp.q))),
                              np.arange(fp.q)):
            ok = False
            print(f"  beta bijection failed for p={p}")

    # wht vs direct XOR convolution, q <= 16
    for q in (2, 4, 8, 16):
        u, v = rng.random((2, q))
        conv = np.zeros(q)
        for i, j in itertools.product(range(q), range(q)):
            conv[i ^ j] += u[i] * v[j]
        if not np.allclose(wht(wht(u) * wht(v)) / q, conv, atol=1e-10):
            ok = False
            print(f"  wht convolution failed for q={q}")

    # bmd_combine vs brute-force posterior product, q=8
    f8 = make_field(3)
    llrs = rng.normal(scale=2.0, size=(50, 3))
    got = bmd_combine(llrs, f8)
    p0 = 1 / (1 + np.exp(-llrs))
    ref = np.empty((50, 8))
    for s in range(8):
        bits = f8.beta_inv(s)
        ref[:, s] = np.where(bits == 0, p0, 1 - p0).prod(axis=1)
    ref /= ref.sum(axis=1, keepdims=True)
    if not np.allclose(got, ref, atol=1e-10):
        ok = False
        print("  bmd_combine oracle failed")

    # smd_uniform enumeration oracle (GF(64), 8-ASK pairs)
    f64, c8 = make_field(6), make_ask(3)
    du = uniform_distribution(c8)
    y = rng.normal(size=(5, 2))
    got = smd_uniform(y, c8, f64, 0.6)
    ref = np.empty((5, 64))
    x = du.scale * c8.points.astype(float)
    for s in range(64):
        bits = f64.beta_inv(s).reshape(2, 3)
        xs = x[c8.label_index(bits)]
        ref[:, s] = np.exp(-((y - xs) ** 2).sum(axis=1) / (2 * 0.6**2))
    ref /= ref.sum(axis=1, keepdims=True)
    if not np.allclose(got, ref, atol=1e-10):
        ok = False
        print("  smd_uniform oracle failed")

    # smd_pas enumeration oracles (GF(8), 4-ASK)
    c4 = make_ask(2)
    dd = mb_fit(c4, 0.8)
    y = rng.normal(size=(5, 3))
    got = smd_pas(y, "amplitude", c4, dd, 0.6, f8)
    ref = np.zeros((5, 8))
    for s in range(8):
        amp_idx = c4.amplitude_index(f8.beta_inv(s).reshape(3, 1))
        amps = dd.scale * c4.amplitudes[amp_idx].astype(float)
        prior = dd.p_amp[amp_idx].prod()
        for signs in itertools.product((-1, 1), repeat=3):
            xs = np.array(signs) * amps
            ref[:, s] += prior * np.exp(
                -((y - xs) ** 2).sum(axis=1) / (2 * 0.6**2))
    ref /= ref.sum(axis=1, keepdims=True)
    if not np.allclose(got, ref, atol=1e-10):
        ok = False
        print("  smd_pas amplitude oracle failed")
    got = smd_pas(y, "sign", c4, dd, 0.6, f8)
    ref = np.zeros((5, 8))
    amp = dd.scale * c4.amplitudes.astype(float)
    for s in range(8):
        signs = 2 * f8.beta_inv(s) - 1
        per = [(dd.p_amp * np.exp(-((y[:, t, None] - signs[t] * amp) ** 2)
                                  / (2 * 0.6**2))).sum(axis=1)
               for t in range(3)]
        ref[:, s] = np.prod(per, axis=0)
    ref /= ref.sum(axis=1, keepdims=True)
    if not np.allclose(got, ref, atol=1e-10):
        ok = False
        print("  smd_pas sign oracle failed")

    # DM rank/unrank vs enumeration, n <= 10
    comp = matcher.make_composition((4, 3, 2, 1), (1, 3, 5, 7))
    pool = [a for a, n in zip(comp.alphabet, comp.counts) for _ in range(n)]
    seqs = sorted(set(itertools.permutations(pool)))
    for i in range(1 << comp.k):
        bits = np.array([(i >> (comp.k - 1 - j)) & 1
                         for j in range(comp.k)])
        if tuple(matcher.dm_encode(bits, comp)) != seqs[i]:
            ok = False
            print(f"  DM unrank mismatch at rank {i}")
            break
        if not np.array_equal(matcher.dm_decode(np.array(seqs[i]), comp),
                              bits):
            ok = False
            print(f"  DM rank mismatch at rank {i}")
            break

    # encoder vs dense linear solve
    code = ldpc.construct(f64, 96, 8, seed=1)
    h = code.dense_h()
    for _ in range(20):
        cw = ldpc.encode(code, rng.integers(0, 64, code.k_c))
        s = np.bitwise_xor.reduce(f64.mul(h, cw[None, :]), axis=1)
        if s.any():
            ok = False
            print("  encoder produced a non-codeword")
            break
    assert report(5, "oracle equivalences", ok)


# -- criterion 6: chain integrity --------------------------------------------

def test_criterion_6_chain_integrity(systems):
    ok = True
    n_frames = 1000
    sigma = 0.01
    for (se, shaping), cfg in systems.items():
        rng = np.random.default_rng(60)
        infos = rng.integers(0, 2, (n_frames, cfg.info_bits_per_frame))
        xs, cws = [], []
        for bits in infos:
            x, cw = pas.transmit_any(cfg, bits)
            if ldpc.syndrome(cfg.code, cw).any():
                ok = False
                print(f"  {se} {shaping}: nonzero syndrome")
            xs.append(x)
            cws.append(cw)
        if shaping == "pas":
            amps = np.rint(np.abs(np.stack(xs)) / cfg.dist.scale).astype(int)
            for frame in amps:
                counts = tuple(int((frame == a).sum())
                               for a in cfg.comp.alphabet)
                if counts != cfg.comp.counts:
                    ok = False
                    print(f"  {se} {shaping}: composition violated")
                    break
        for metric in cfg.metric_modes:
            bad = 0
            for lo in range(0, n_frames, 200):
                chunk = slice(lo, lo + 200)
                priors = np.stack([pas.demap_any(cfg, x, sigma, metric)
                                   for x in xs[chunk]])
                hard, conv, _ = decode_batch(cfg.code, priors, max_iter=5)
                for bits, cw, dec, cv in zip(infos[chunk], cws[chunk],
                                             hard, conv):
                    out = pas.receive_any(cfg, dec)
                    if (not cv or out is None
                            or not np.array_equal(out, bits)):
                        bad += 1
            if bad:
                ok = False
                print(f"  {se} {shaping} {metric}: {bad}/{n_frames} "
                      "noiseless round-trips failed")
        print(f"  chain {se} {shaping}: {n_frames} frames x "
              f"{cfg.metric_modes} clean", flush=True)
    assert report(6, "chain integrity", ok)


# -- criterion 7: waterfall shape --------------------------------------------

def test_criterion_7_waterfall(systems, de_thresholds):
    """The finite-length waterfall sits just above the DE threshold and is
    about 1.5 dB wide: the first probe with FER >= 0.1 must reach FER <=
    1e-3 within the next 1.5 dB."""
    cfg = systems[("1.5", "pas")]
    thr = de_thresholds[("1.5", "pas", "bmd")]
    stop = analysis.StopRule(min_errors=40, max_frames=25000)
    low = None
    for probe in (thr + 0.7, thr + 0.4, thr + 0.1):
        pt = analysis.run_fer(cfg, "bmd", [probe], stop=stop, seed=70)[0]
        print(f"  probe FER({probe:.2f}) = {pt.fer:.3g}", flush=True)
        if pt.fer >= 1e-1:
            low = pt
            break
    ok = low is not None
    if ok:
        high = analysis.run_fer(cfg, "bmd", [low.snr_db + 1.5], stop=stop,
                                seed=70)[0]
        print(f"  FER({high.snr_db:.2f}) = {high.fer:.3g} "
              f"({high.frames} frames)", flush=True)
        ok = high.fer <= 1e-3
        detail = (f"{low.fer:.3g} @ thr{low.snr_db - thr:+.1f} dB -> "
                  f"{high.fer:.3g} 1.5 dB later")
    else:
        detail = "no probe above the threshold reached FER 1e-1"
    assert report(7, "waterfall shape", ok, detail)
