"""Command-line front end: experiment configuration and CSV emission.

Every output file starts with comment lines recording the subcommand, the
full configuration, and the master seed, so a run is reproducible from its
header alone.  SNR is in dB everywhere at this surface.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import analysis, ldpc, pas, plots
from .airs import MetricKind, capacity, rate_bmd, rate_smd, required_snr
from .demap import CompatibilityError
from .galois import FieldError, make_field
from .ldpc import CodeError
from .mapping import MappingError, make_ask, mb_fit
from .pas import PasConfigError


class CliError(ValueError):
    pass


def _write_csv(path, command, config, columns, rows):
    with open(path, "w") as fh:
        fh.write(f"# nbpas {command}\n")
        for key in sorted(config):
            fh.write(f"# {key} = {config[key]}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[c]) for c in columns) + "\n")


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def _dist_policy(args, c):
    if args.uniform:
        return None
    if args.optimize:
        return "optimize"
    if args.entropy is None:
        raise CliError("give one of --uniform, --entropy, --optimize")
    return mb_fit(c, args.entropy)


def _cmd_rates(args):
    c = make_ask(args.ask)
    grid = np.arange(args.snr_start, args.snr_stop + 1e-9, args.snr_step)
    if len(grid) == 0:
        raise CliError("empty SNR grid")
    dist = None if args.uniform else mb_fit(c, args.entropy)
    rows = []
    for snr_db in grid:
        snr = 10.0 ** (snr_db / 10.0)
        rows.append({
            "snr_db": float(snr_db),
            "capacity": capacity(snr),
            "rate_smd": rate_smd(snr_db, c, dist),
            "rate_bmd": rate_bmd(snr_db, c, dist),
        })
    config = {"ask_m": args.ask, "snr_grid": f"{args.snr_start}:"
              f"{args.snr_stop}:{args.snr_step}",
              "distribution": "uniform" if args.uniform
              else f"mb(H_A={args.entropy})", "seed": args.seed}
    _write_csv(args.out, "rates", config,
               ["snr_db", "capacity", "rate_smd", "rate_bmd"], rows)
    if args.plot:
        plots.render_rates(rows, _png(args.out))


def _cmd_required_snr(args):
    c = make_ask(args.ask)
    policy = _dist_policy(args, c)
    snr_db = required_snr(MetricKind(args.metric), args.rate, c, policy)
    config = {"ask_m": args.ask, "metric": args.metric, "rate": args.rate,
              "distribution": "uniform" if args.uniform else
              ("optimize" if args.optimize else f"mb(H_A={args.entropy})"),
              "seed": args.seed}
    _write_csv(args.out, "required-snr", config,
               ["metric", "rate", "snr_db"],
               [{"metric": args.metric, "rate": args.rate,
                 "snr_db": snr_db}])


def _cmd_mb_fit(args):
    c = make_ask(args.ask)
    d = mb_fit(c, args.entropy)
    rows = [{"amplitude": int(a), "p_amp": float(p)}
            for a, p in zip(c.amplitudes, d.p_amp)]
    config = {"ask_m": args.ask, "target_entropy": args.entropy,
              "nu": d.nu, "scale": d.scale, "entropy_amp": d.entropy_amp,
              "seed": args.seed}
    _write_csv(args.out, "mb-fit", config, ["amplitude", "p_amp"], rows)


def _cmd_codegen(args):
    f = make_field(args.field_p)
    code = ldpc.construct(f, args.n_c, args.d_c, args.seed)
    ldpc.save_code(code, args.out)


def _cmd_de_threshold(args):
    f = make_field(args.field_p)
    c = make_ask(args.ask)
    mode = f"{args.mode}-{args.metric}"
    if args.mode == "pas" and args.rdm is None:
        raise CliError("--rdm is required for PAS modes")
    shaping = mb_fit(c, args.rdm) if args.mode == "pas" else None
    cfg = analysis.DeConfig(
        population=args.population, max_iter=args.max_iter,
        target_error=args.target_error, precision=args.precision,
        bracket=tuple(args.bracket) if args.bracket else None)
    thr = analysis.de_threshold(args.d_c, f, mode, c, shaping=shaping,
                                cfg=cfg, seed=args.seed)
    config = {"field_p": args.field_p, "d_c": args.d_c, "ask_m": args.ask,
              "mode": mode, "rdm": args.rdm, "population": cfg.population,
              "max_iter": cfg.max_iter, "target_error": cfg.target_error,
              "precision": cfg.precision, "seed": args.seed}
    _write_csv(args.out, "de-threshold", config,
               ["mode", "d_c", "threshold_db"],
               [{"mode": mode, "d_c": args.d_c, "threshold_db": thr}])


_FER_KEYS = {"mode", "metric", "field_p", "prim_poly", "ask_m", "code",
             "rdm", "eta", "snr_dbs", "min_errors", "max_frames", "max_iter"}


def _fer_config(doc):
    unknown = set(doc) - _FER_KEYS
    if unknown:
        raise CliError(f"unknown config keys: {sorted(unknown)}")
    for key in ("mode", "metric", "field_p", "ask_m", "code", "snr_dbs"):
        if key not in doc:
            raise CliError(f"missing config key {key!r}")
    f = make_field(doc["field_p"], doc.get("prim_poly"))
    c = make_ask(doc["ask_m"])
    code_doc = doc["code"]
    if "file" in code_doc:
        code = ldpc.load_code(code_doc["file"])
    else:
        code = ldpc.construct(f, code_doc["n_c"], code_doc["d_c"],
                              code_doc.get("seed", 0))
    if doc["mode"] == "pas":
        config = pas.build_config(c, f, code, target_rdm=doc.get("rdm"),
                                  target_eta=doc.get("eta"))
    elif doc["mode"] == "uniform":
        config = pas.build_uniform_config(c, f, code)
    else:
        raise CliError(f"unknown mode {doc['mode']!r}")
    if doc["metric"] not in config.metric_modes:
        raise CliError(
            f"metric {doc['metric']!r} incompatible with this configuration")
    return config


def _cmd_fer(args):
    with open(args.config) as fh:
        doc = json.load(fh)
    config = _fer_config(doc)
    stop = analysis.StopRule(min_errors=doc.get("min_errors", 50),
                             max_frames=doc.get("max_frames", 10 ** 6))
    points = analysis.run_fer(config, doc["metric"], doc["snr_dbs"],
                              stop=stop, seed=args.seed,
                              max_iter=doc.get("max_iter", 100),
                              threads=args.threads)
    rows = []
    for pt in points:
        lo, hi = pt.ci95
        rows.append({"snr_db": pt.snr_db, "frames": pt.frames,
                     "errors": pt.frame_errors, "fer": pt.fer,
                     "ci_low": lo, "ci_high": hi})
    header = {f"config.{k}": json.dumps(v) for k, v in sorted(doc.items())}
    header["seed"] = args.seed
    header["eta"] = config.eta
    _write_csv(args.out, "fer", header,
               ["snr_db", "frames", "errors", "fer", "ci_low", "ci_high"],
               rows)
    if args.plot:
        plots.render_fer(rows, _png(args.out))


def _png(csv_path):
    return (csv_path[:-4] if csv_path.endswith(".csv") else csv_path) + ".png"


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nbpas",
        description="Coded modulation with non-binary LDPC codes and "
                    "probabilistic amplitude shaping")
    parser.add_argument("--seed", type=int, default=0,
                        help="master seed (default 0)")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker processes for simulations")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("rates", help="rate curves over an SNR grid")
    sp.add_argument("--ask", type=int, required=True, help="bits per symbol")
    sp.add_argument("--snr-start", type=float, required=True)
    sp.add_argument("--snr-stop", type=float, required=True)
    sp.add_argument("--snr-step", type=float, default=0.25)
    sp.add_argument("--uniform", action="store_true")
    sp.add_argument("--entropy", type=float,
                    help="amplitude entropy H(A) for MB shaping")
    sp.add_argument("--out", required=True)
    sp.add_argument("--plot", action="store_true")
    sp.set_defaults(fn=_cmd_rates)

    sp = sub.add_parser("required-snr",
                        help="SNR needed to support a target rate")
    sp.add_argument("--metric", choices=["smd", "bmd"], required=True)
    sp.add_argument("--rate", type=float, required=True)
    sp.add_argument("--ask", type=int, required=True)
    sp.add_argument("--uniform", action="store_true")
    sp.add_argument("--entropy", type=float)
    sp.add_argument("--optimize", action="store_true",
                    help="optimize the shaping parameter per SNR")
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=_cmd_required_snr)

    sp = sub.add_parser("mb-fit", help="fit a Maxwell-Boltzmann distribution")
    sp.add_argument("--ask", type=int, required=True)
    sp.add_argument("--entropy", type=float, required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=_cmd_mb_fit)

    sp = sub.add_parser("codegen", help="construct and save an LDPC code")
    sp.add_argument("--field-p", type=int, required=True)
    sp.add_argument("--n-c", type=int, required=True)
    sp.add_argument("--d-c", type=int, required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=_cmd_codegen)

    sp = sub.add_parser("de-threshold",
                        help="Monte Carlo density-evolution threshold")
    sp.add_argument("--field-p", type=int, required=True)
    sp.add_argument("--d-c", type=int, required=True)
    sp.add_argument("--ask", type=int, required=True)
    sp.add_argument("--mode", choices=["uniform", "pas"], required=True)
    sp.add_argument("--metric", choices=["smd", "bmd"], required=True)
    sp.add_argument("--rdm", type=float, help="matcher rate (PAS modes)")
    sp.add_argument("--population", type=int, default=20000)
    sp.add_argument("--max-iter", type=int, default=200)
    sp.add_argument("--target-error", type=float, default=1e-5)
    sp.add_argument("--precision", type=float, default=0.02)
    sp.add_argument("--bracket", type=float, nargs=2, metavar=("LO", "HI"))
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=_cmd_de_threshold)

    sp = sub.add_parser("fer", help="frame error rate simulation")
    sp.add_argument("--config", required=True, help="JSON experiment file")
    sp.add_argument("--out", required=True)
    sp.add_argument("--plot", action="store_true")
    sp.set_defaults(fn=_cmd_fer)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.fn(args)
    except (CliError, CodeError, CompatibilityError, FieldError,
            MappingError, PasConfigError, ValueError, OSError,
            json.JSONDecodeError) as exc:
        print(f"nbpas: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
