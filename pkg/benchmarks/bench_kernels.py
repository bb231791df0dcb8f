"""Time the sieve and gap-scan kernels with numba against the pure-numpy path.

Each backend runs in its own interpreter because the choice is made once at
import time (``PRIMESPEC_DISABLE_NUMBA``).

    python3 benchmarks/bench_kernels.py --limit 2^28 --repeat 3
"""
import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, sys, time
from primespec import _accel
from primespec.gapstats import scan_gaps
from primespec.sieve import PrimeStream, SieveConfig

limit, repeat = int(sys.argv[1]), int(sys.argv[2])
PrimeStream(SieveConfig(2**16)).count()            # compile / warm caches
scan_gaps(2**16)
out = {"numba": _accel.USE_NUMBA}
for name, fn in (("count", lambda: PrimeStream(SieveConfig(limit)).count()),
                 ("gap_scan", lambda: scan_gaps(limit).tables[-1].pi_x)):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t)
    out[name] = {"seconds": best, "result": result}
print(json.dumps(out))
"""


def run(limit: int, repeat: int, disable: bool) -> dict:
    env = dict(os.environ)
    env["PRIMESPEC_DISABLE_NUMBA"] = "1" if disable else "0"
    proc = subprocess.run([sys.executable, "-c", CHILD, str(limit), str(repeat)],
                          env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main():
    from primespec.io import parse_int

    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--limit", default="2^26")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    limit = parse_int(args.limit)

    fast = run(limit, args.repeat, disable=False)
    slow = run(limit, args.repeat, disable=True)
    if not fast["numba"]:
        print("numba is not importable; both runs use numpy")
    print(f"limit = {limit}")
    print(f"{'kernel':<10} {'numba s':>10} {'numpy s':>10} {'speedup':>8}  result")
    for k in ("count", "gap_scan"):
        a, b = fast[k], slow[k]
        if a["result"] != b["result"]:
            sys.exit(f"backends disagree on {k}: {a['result']} vs {b['result']}")
        print(f"{k:<10} {a['seconds']:10.3f} {b['seconds']:10.3f} {b['seconds'] / a['seconds']:8.1f}  {a['result']}")


if __name__ == "__main__":
    main()
