"""Command line entry point (``sgmc``)."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .channel import ChannelSpec, sigma_from_ebn0
from .construction import export_generator, generator_text, sample_generator, write_profile
from .harness import (
    SimConfig,
    emit_csv,
    emit_json,
    parse_profile,
    run_bounds,
    run_simulation,
)

CONFIG_FLAGS = ("profile", "code_seed", "channel", "snr", "decoder", "delta", "lmax", "order",
                "min_errors", "max_frames", "seed", "workers", "out")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its fields")
    p.add_argument("--profile", help="'rm r m', 'nu n k w0', 'file PATH' or widths '4,2,1,1'")
    p.add_argument("--code-seed", type=int, help="seed of the sampled generator")
    p.add_argument("--channel", choices=("awgn", "bsc"))
    p.add_argument("--snr", type=float, nargs="+", help="Eb/N0 values in dB")
    p.add_argument("--decoder", choices=("lc-rosd", "lc-osd", "osd", "ml"))
    p.add_argument("--delta", type=int)
    p.add_argument("--lmax", type=int)
    p.add_argument("--order", type=int, help="OSD order t")
    p.add_argument("--min-errors", type=int)
    p.add_argument("--max-frames", type=int)
    p.add_argument("--seed", type=int, help="master seed of the frame streams")
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="output file (.csv or .json)")


def config_from_args(args) -> SimConfig:
    base = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
    for name in CONFIG_FLAGS:
        v = getattr(args, name, None)
        if v is not None:
            base[name] = v
    return SimConfig.from_dict(base)


def _emit(items, out: str | None, config=None) -> None:
    if out is None:
        return
    if Path(out).suffix.lower() == ".json":
        emit_json(items, out, config)
    else:
        emit_csv(items, out)


def cmd_profile(args) -> None:
    p = parse_profile(" ".join(args.profile_words))
    print(f"widths {p}")
    print(f"n={p.n} k={p.k}")
    print("ends " + " ".join(map(str, p.ends)))
    if args.out:
        write_profile(p, args.out)


def cmd_sample(args) -> None:
    code = sample_generator(parse_profile(" ".join(args.profile_words)), args.seed)
    if args.out:
        export_generator(code, args.out)
    else:
        sys.stdout.write(generator_text(code))


def cmd_simulate(args) -> None:
    cfg = config_from_args(args)
    print("snr_db frames errors fer ci_low ci_high avg_teps optimal_rate")

    def show(r):
        print(f"{r.snr_db:g} {r.frames} {r.frame_errors} {r.fer:.4e} {r.ci_low:.4e} {r.ci_high:.4e} "
              f"{r.avg_teps:.2f} {r.optimal_rate:.4f}", flush=True)

    records = run_simulation(cfg, progress=show)
    _emit(records, cfg.out, cfg)


def cmd_bounds(args) -> None:
    cfg = config_from_args(args)
    kinds = [k for k in args.kinds.split(",") if k]
    curves = run_bounds(cfg, kinds, n_outer=args.n_outer, bonferroni_count=args.count, mc_seed=args.mc_seed)
    for c in curves:
        for pt in c.points:
            print(f"{c.kind} {pt.snr_db:g} {pt.value:.4e} [{pt.ci_low:.4e}, {pt.ci_high:.4e}]")
    _emit(curves, cfg.out, cfg)


def cmd_spectrum(args) -> None:
    from .spectrum import random_code_spectrum, sgmc_spectrum

    p = parse_profile(" ".join(args.profile_words))
    s = random_code_spectrum(p.n, p.k) if args.random else sgmc_spectrum(p)
    if args.out:
        s.to_csv(args.out)
    else:
        print("d,A_d")
        for d, a in enumerate(s.coefficients):
            print(f"{d},{float(a)!r}")


def cmd_design(args) -> None:
    from .bounds.design import W0Designer

    d = W0Designer(args.n, args.k, n_outer=args.n_outer, seed=args.mc_seed)
    for t in args.target:
        w0 = d.design(t, args.tol)
        print(f"target {t:g}: w0={w0} gap={d.gap(w0, t):.3f} dB")


def cmd_oracle(args) -> None:
    """Compare a decoder against brute-force ML on common frames."""
    from .decoders import lc_osd_decode, lc_rosd_decode, ml_bruteforce, osd_decode
    import numpy as np

    from .channel import transmit
    from .gf2 import BitVec, encode
    from .rng import key_of, stream_bits_array

    p = parse_profile(" ".join(args.profile_words))
    if p.k > 20:
        raise ValueError("oracle comparison needs k <= 20")
    code = sample_generator(p, args.code_seed)
    sigma = sigma_from_ebn0(args.snr, p.k / p.n)
    spec = ChannelSpec.awgn(sigma)
    mism = 0
    for f in range(args.frames):
        key = key_of(args.seed, f)
        u = BitVec.from_bits(stream_bits_array(np.array([key], np.uint64), p.k)[0])
        obs = transmit(encode(u, code.generator), spec, key_of(key, 1))
        ref = ml_bruteforce(code.generator, obs)
        if args.decoder == "lc-rosd":
            got = lc_rosd_decode(code, obs, args.delta, args.lmax)
        elif args.decoder == "lc-osd":
            got = lc_osd_decode(code.generator, obs, args.delta, args.lmax)
        else:
            got = osd_decode(code.generator, obs, args.order)
        if abs(got.soft_weight - ref.soft_weight) > 1e-9 * max(1.0, ref.soft_weight):
            mism += 1
    print(f"{args.decoder} vs ML: {mism} soft-weight mismatches in {args.frames} frames")
    if mism:
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sgmc", description="Staircase generator matrix codes: decoding and bounds.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="print a staircase profile")
    p.add_argument("profile_words", metavar="PROFILE", nargs="+", help="rm r m | nu n k w0 | file PATH")
    p.add_argument("--out")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("sample", help="sample a generator matrix and export it")
    p.add_argument("profile_words", metavar="PROFILE", nargs="+")
    p.add_argument("--seed", type=int, default=1, help="code seed")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("simulate", help="Monte-Carlo FER simulation")
    _add_config_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bounds", help="evaluate bound curves over the SNR list")
    _add_config_flags(p)
    p.add_argument("--kinds", default="UB,partialRCU", help="comma list of UB,partialRCU,RCU,BonferroniLB,exponentUB")
    p.add_argument("--n-outer", type=int, default=2000, help="Monte-Carlo samples per tilt for the RCU bounds")
    p.add_argument("--count", type=int, default=1023, help="codewords used by the Bonferroni bound")
    p.add_argument("--mc-seed", type=int, default=0)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("spectrum", help="ensemble weight spectrum as CSV")
    p.add_argument("profile_words", metavar="PROFILE", nargs="+")
    p.add_argument("--random", action="store_true", help="totally random code of the same n, k")
    p.add_argument("--out")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("design-w0", help="choose w0 of a nearly uniform profile")
    p.add_argument("n", type=int)
    p.add_argument("k", type=int)
    p.add_argument("--target", type=float, nargs="+", default=[1e-5])
    p.add_argument("--tol", type=float, default=0.3, help="allowed SNR gap in dB")
    p.add_argument("--n-outer", type=int, default=500)
    p.add_argument("--mc-seed", type=int, default=0)
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("oracle", help="check a decoder against brute-force ML")
    p.add_argument("profile_words", metavar="PROFILE", nargs="+")
    p.add_argument("--code-seed", type=int, default=1)
    p.add_argument("--decoder", choices=("lc-rosd", "lc-osd", "osd"), default="lc-rosd")
    p.add_argument("--delta", type=int, default=8)
    p.add_argument("--lmax", type=int, default=1 << 16)
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--snr", type=float, default=2.0)
    p.add_argument("--frames", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValueError, OSError) as exc:
        print(f"sgmc: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
