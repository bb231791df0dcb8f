"""``primespec`` command-line tool.

Subcommands:

* ``scan``      sieve and write one gap table per checkpoint (resumable);
* ``rigidity``  Delta_3 curves for primes, a sampled pi staircase, or the Cramer model;
* ``analyze``   overlays, scaling fits, the P(d) spectrum, unfolded histograms
  and interval-count statistics.

Exit codes: 0 success, 2 usage error, 3 data or validation error, 4 resource error.
"""
from __future__ import annotations

import argparse
import hashlib
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import io as pio
from .cramer import CramerConfig, ensemble_delta3
from .fitting import DEFAULT_U_RANGE, RankError, cosine_basis_fit, exp_fit
from .gapstats import (IncompleteDataError, ScanState, accumulate, gallagher_counts, poisson_tv_distance,
                       rescale, unfold_histogram)
from .predictions import tau_expected
from .rigidity import AlignmentError, delta3_sampled, doubling_grid, leading_term, prime_curve, RigidityCurve, SAMPLED
from .sieve import PrimeStream, SieveConfig, SieveConfigError, StaircaseSample, sample_staircase
from .spectrum import SpectrumConfigError, parseval_error, power_spectrum

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RESOURCE = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _num(text):
    try:
        return pio.parse_number(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _int(text):
    try:
        return pio.parse_int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _run_dir(args, command: str, params: dict) -> Path:
    if args.out is not None:
        d = Path(args.out)
    else:
        root = Path(os.environ.get(pio.OUTPUT_ROOT_ENV, "primespec-runs"))
        key = ";".join(f"{k}={v}" for k, v in params.items())
        d = root / f"{command}-{hashlib.sha1(key.encode()).hexdigest()[:10]}"
    d.mkdir(parents=True, exist_ok=True)
    return d


def _manifest(directory: Path, command: str, params: dict, outputs: list, seed=None, extra=None) -> None:
    items = {"command": command, "tool_version": __version__}
    for k, v in params.items():
        items[f"param.{k}"] = v
    items["seed"] = "none" if seed is None else seed
    for k, v in (extra or {}).items():
        items[k] = v
    items["outputs"] = ",".join(sorted(Path(p).name for p in outputs))
    pio.write_manifest(directory, items)


# ------------------------------------------------------------------- scan


def cmd_scan(args) -> int:
    limit = args.limit
    cps = pio.parse_checkpoints(args.checkpoints) if args.checkpoints else \
        [2**k for k in range(15, limit.bit_length()) if 2**k <= limit]
    cps = [c for c in cps if c <= limit]
    if not cps:
        raise UsageError(f"no checkpoint at or below --limit {limit}")
    params = {"limit": limit, "checkpoints": ",".join(map(str, cps)), "segment_size": args.segment_size}
    out = _run_dir(args, "scan", params)

    done = []
    state = None
    if args.resume and (out / pio.CHECKPOINT_INDEX).exists():
        done = [(t, lp) for t, lp in pio.read_checkpoint_index(out) if t.x in cps]
        if done:
            last, lp = done[-1]
            state = ScanState.from_table(last, lp)
    remaining = [c for c in cps if c not in {t.x for t, _ in done}]
    outputs = [out / pio.tau_filename(t.x) for t, _ in done]

    def on_checkpoint(table, st):
        outputs.append(pio.write_gap_table(out, table))
        done.append((table, st.last_prime))
        pio.write_checkpoint_index(out, done)

    if remaining:
        start = 0 if state is None else state.position
        stream = PrimeStream(SieveConfig(limit, args.segment_size, start=start,
                                         base_primes_path=args.base_primes))
        series = accumulate(stream, remaining, state=state, on_checkpoint=on_checkpoint)
        # tables at x <= 2 are emitted without the callback
        for t in series:
            if t.x not in {d.x for d, _ in done}:
                on_checkpoint(t, ScanState())
        done.sort(key=lambda e: e[0].x)
        pio.write_checkpoint_index(out, done)
    outputs.append(out / pio.CHECKPOINT_INDEX)
    extra = {}
    for t, _ in done:
        lab = pio.checkpoint_label(t.x)
        extra[f"pi.{lab}"] = t.pi_x
        extra[f"gmax.{lab}"] = t.max_gap
        extra[f"gmax_prime.{lab}"] = t.max_gap_prime
    _manifest(out, "scan", params, outputs, extra=extra)
    last = done[-1][0]
    print(f"scan: {len(done)} checkpoints in {out}; pi({last.x}) = {last.pi_x}, "
          f"G = {last.max_gap} after {last.max_gap_prime}")
    return EXIT_OK


# --------------------------------------------------------------- rigidity


def _L_grid(args, unit: float = 1.0):
    lo = args.L_min * unit
    hi = args.L_max * unit
    if not 0 < lo <= hi:
        raise UsageError("need 0 < --L-min <= --L-max")
    return doubling_grid(lo, hi)


def cmd_rigidity(args) -> int:
    mode = args.mode
    if mode == "sampled":
        return _rigidity_sampled(args)
    if mode == "cramer":
        return _rigidity_cramer(args)
    x = args.x if args.x is not None else 1e8
    grid = _L_grid(args)
    params = {"mode": mode, "x": pio.fmt(x), "L_min": pio.fmt(grid[0]), "L_max": pio.fmt(grid[-1]),
              "unfold": args.unfold}
    out = _run_dir(args, "rigidity", params)
    curve = prime_curve(x, grid, args.unfold)
    path = out / "rigidity.csv"
    curve.to_csv(path)
    _manifest(out, "rigidity", params, [path])
    print(f"rigidity: {len(grid)} points written to {path}")
    return EXIT_OK


def _rigidity_sampled(args) -> int:
    if args.pi_table is None and (args.h is None or args.x is None):
        raise UsageError("--mode sampled needs --x and --h, or --pi-table")
    if args.pi_table is not None:
        sample = StaircaseSample.from_csv(args.pi_table)
        x = int(args.x) if args.x is not None else sample.x0
    else:
        x = int(args.x)
        h = int(args.h)
        n = int(args.L_max) + 1
        sample = sample_staircase(x, h, n)
    h = sample.h
    grid = [int(L) for L in _L_grid(args, h)]
    params = {"mode": "sampled", "x": x, "h": h, "L_min": grid[0], "L_max": grid[-1],
              "pi_table": args.pi_table or "none"}
    out = _run_dir(args, "rigidity", params)
    values = np.array([delta3_sampled(sample, x, L) for L in grid])
    curve = RigidityCurve(SAMPLED, float(x), h, np.array(grid, dtype=np.float64), values)
    path = out / "rigidity.csv"
    curve.to_csv(path)
    outputs = [path]
    if args.pi_table is None:
        sp = out / "staircase.csv"
        sample.to_csv(sp)
        outputs.append(sp)
    lead = leading_term(x, h)
    _manifest(out, "rigidity", params, outputs, extra={"leading_term": pio.fmt(lead)})
    print(f"rigidity: leading term h^2/(3 ln^2 x) = {lead:.6g}; first value {values[0]:.6g}")
    return EXIT_OK


def _rigidity_cramer(args) -> int:
    x = args.x if args.x is not None else 1e6
    grid = _L_grid(args)
    cfg = CramerConfig(x=x, L_max=float(grid[-1]), seed=args.seed, samples=args.samples,
                       include_even=not args.odd_only, k0=args.k0, unfold=args.unfold)
    params = {"mode": "cramer", "x": pio.fmt(x), "L_min": pio.fmt(grid[0]), "L_max": pio.fmt(grid[-1]),
              "samples": cfg.samples, "k0": cfg.k0, "include_even": cfg.include_even, "unfold": cfg.unfold}
    out = _run_dir(args, "rigidity", params | {"seed": args.seed})
    ens = ensemble_delta3(cfg, grid, workers=args.workers)
    paths = [out / "ensemble.csv", out / "rigidity.csv"]
    ens.to_csv(paths[0])
    ens.mean_curve.to_csv(paths[1])
    if args.dump_samples:
        paths.append(out / "samples.csv")
        ens.samples_to_csv(paths[-1])
    slope = ens.slope_through_origin()
    _manifest(out, "rigidity", params, paths, seed=args.seed, extra={"slope_through_origin": pio.fmt(slope)})
    print(f"rigidity: {cfg.samples} Cramer samples, mean slope {slope:.5f} (1/15 = {1 / 15:.5f})")
    return EXIT_OK


# ---------------------------------------------------------------- analyze


def cmd_analyze(args) -> int:
    params = {"scan": args.scan or "none", "x": args.x or "all", "d_max": args.d_max,
              "spectrum": args.spectrum or "none", "cosine": args.cosine or "none",
              "histogram": args.histogram or "none", "bin_width": pio.fmt(args.bin_width),
              "normalize": args.normalize,
              "gallagher": ",".join(map(str, args.gallagher)) if args.gallagher else "none",
              "u_range": f"{pio.fmt(args.u_range[0])}:{pio.fmt(args.u_range[1])}"}
    if not any([args.scan, args.spectrum, args.cosine, args.histogram, args.gallagher]):
        raise UsageError("analyze needs at least one of --scan, --spectrum, --cosine, --histogram, --gallagher")
    out = _run_dir(args, "analyze", params)
    outputs, extra = [], {}

    if args.scan:
        entries = pio.read_checkpoint_index(args.scan)
        tables = [t for t, _ in entries]
        if args.x is not None:
            tables = [t for t in tables if t.x == args.x]
            if not tables:
                raise pio.DataError(f"{args.scan}: no checkpoint at x={args.x}")
        fit_rows = []
        for t in tables:
            lab = pio.checkpoint_label(t.x)
            rows = []
            for d in range(2, args.d_max + 1, 2):
                pred = tau_expected(d, t.x, t.pi_x)
                meas = t.tau(d)
                rows.append((d, meas, pred, (meas - pred) / pred))
            p = out / f"overlay_{lab}.csv"
            pio.write_rows(p, ["d", "tau_measured", "tau_predicted", "residual"], rows)
            outputs.append(p)
            curve = rescale(t)
            p = out / f"scaled_{lab}.csv"
            pio.write_rows(p, ["d", "u", "t", "tau"],
                           zip(curve.d.tolist(), curve.u.tolist(), curve.t.tolist(), curve.tau.tolist()))
            outputs.append(p)
            try:
                f = exp_fit(curve, tuple(args.u_range))
                fit_rows.append((t.x, f.prefactor, f.slope, f.residual_ss))
            except (RankError, ValueError) as exc:
                print(f"analyze: no exponential fit at x={t.x}: {exc}", file=sys.stderr)
        p = out / "expfit.csv"
        pio.write_rows(p, ["x", "alpha_or_a", "beta_or_s", "residual_ss"], fit_rows)
        outputs.append(p)

    if args.cosine:
        alpha, beta, rss = cosine_basis_fit(args.cosine)
        p = out / "cosine_fit.csv"
        pio.write_rows(p, ["x", "alpha_or_a", "beta_or_s", "residual_ss"], [(args.cosine, alpha, beta, rss)])
        outputs.append(p)

    if args.spectrum:
        spec = power_spectrum(args.spectrum)
        p = out / "spectrum.csv"
        spec.to_csv(p)
        outputs.append(p)
        extra["spectrum.dominant_inv_f"] = pio.fmt(spec.dominant_period())
        extra["spectrum.parseval_error"] = pio.fmt(parseval_error(spec))

    if args.histogram:
        hist = unfold_histogram(PrimeStream(SieveConfig(args.histogram)), args.histogram,
                                args.bin_width, args.unfold)
        centres, dens = hist.normalized(args.normalize)
        idx = sorted(hist.bins)
        p = out / "histogram.csv"
        pio.write_rows(p, ["bin_centre", "count", "probability" if args.normalize == "probability" else "relative"],
                       zip(centres.tolist(), [hist.bins[i] for i in idx], dens.tolist()))
        outputs.append(p)

    if args.gallagher:
        N, h = args.gallagher
        g = gallagher_counts(h, N)
        from scipy.stats import poisson

        pmf = g.pmf()
        rows = [(k, g.counts.get(k, 0), float(pmf[k]), float(poisson.pmf(k, g.lam))) for k in range(pmf.size)]
        p = out / "gallagher.csv"
        pio.write_rows(p, ["k", "count", "empirical", "poisson"], rows)
        outputs.append(p)
        extra["gallagher.lambda"] = pio.fmt(g.lam)
        extra["gallagher.tv_distance"] = pio.fmt(poisson_tv_distance(g))

    _manifest(out, "analyze", params, outputs, extra=extra)
    print(f"analyze: {len(outputs)} files written to {out}")
    return EXIT_OK


def _gallagher_arg(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected N,h")
    return _int(parts[0]), _int(parts[1])


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="primespec", description="Prime gap statistics and spectral rigidity.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help=f"output directory (default: ${pio.OUTPUT_ROOT_ENV}/<command>-<hash>)")
        sp.add_argument("--workers", type=int, default=os.cpu_count() or 1, help="worker processes")

    s = sub.add_parser("scan", help="sieve and tabulate gap counts at checkpoints")
    common(s)
    s.add_argument("--limit", type=_int, required=True, help="sieve bound, e.g. 2^34")
    s.add_argument("--checkpoints", help="2^a..2^b or a comma list (default 2^15 upward)")
    s.add_argument("--segment-size", type=_int, default=2**20)
    s.add_argument("--base-primes", help="file caching the sieving primes")
    s.add_argument("--resume", action="store_true", help="continue from the last complete checkpoint")
    s.set_defaults(func=cmd_scan)

    r = sub.add_parser("rigidity", help="spectral rigidity curves")
    common(r)
    r.add_argument("--mode", choices=["unfolded", "sampled", "cramer"], required=True)
    r.add_argument("--x", type=_num, help="window start (unfolded coordinate, or integer for sampled)")
    r.add_argument("--h", type=_int, help="staircase step (sampled mode)")
    r.add_argument("--pi-table", help="CSV x,pi with uniform step (sampled mode)")
    r.add_argument("--L-min", type=_num, default=None,
                   help="first L (multiples of h in sampled mode; default 2^7, or 2 when sampled)")
    r.add_argument("--L-max", type=_num, default=None, help="last L (default 2^14, or 2^16 when sampled)")
    r.add_argument("--unfold", choices=["r", "li"], default="r")
    r.add_argument("--samples", type=_int, default=100)
    r.add_argument("--seed", type=_int, default=0)
    r.add_argument("--k0", type=_int, default=None, help="first Cramer candidate (default: R(k) > x)")
    r.add_argument("--odd-only", action="store_true", help="odd candidates with probability 2/ln k")
    r.add_argument("--dump-samples", action="store_true")
    r.set_defaults(func=cmd_rigidity)

    a = sub.add_parser("analyze", help="overlays, fits, spectrum, histograms")
    common(a)
    a.add_argument("--scan", help="directory written by `scan`")
    a.add_argument("--x", type=_int, help="restrict to one checkpoint")
    a.add_argument("--d-max", type=_int, default=100)
    a.add_argument("--u-range", type=_num, nargs=2, default=list(DEFAULT_U_RANGE), metavar=("LO", "HI"))
    a.add_argument("--cosine", type=_int, metavar="D_MAX", help="fit P(d) ~ alpha + beta cos(2 pi d/6)")
    a.add_argument("--spectrum", type=_int, metavar="M", help="power spectrum of P(2k), k < M")
    a.add_argument("--histogram", type=_int, metavar="LIMIT", help="unfolded spacing histogram below LIMIT")
    a.add_argument("--bin-width", type=_num, default=0.1)
    a.add_argument("--normalize", choices=["probability", "max"], default="probability",
                   help="histogram heights as a density or relative to the tallest bin")
    a.add_argument("--unfold", choices=["li", "r"], default="li")
    a.add_argument("--gallagher", type=_gallagher_arg, metavar="N,h", help="interval prime counts")
    a.set_defaults(func=cmd_analyze)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "mode", None) is not None:
        sampled = args.mode == "sampled"
        if args.L_min is None:
            args.L_min = 2.0 if sampled else 2.0**7
        if args.L_max is None:
            args.L_max = 2.0**16 if sampled else 2.0**14
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"primespec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (pio.DataError, IncompleteDataError, SieveConfigError, SpectrumConfigError,
            AlignmentError, RankError, ValueError, LookupError) as exc:
        print(f"primespec: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (OSError, MemoryError) as exc:
        print(f"primespec: resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
