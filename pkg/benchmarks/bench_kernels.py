"""Compare the compiled and pure-Python kernels.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5]

Times the scalar kernels across their evaluation regimes and one full
dynamic-panel fit per backend, and prints the speed-up of the compiled
build.  The largest absolute difference between backends is reported as a
parity check.
"""
from __future__ import annotations

import argparse
import importlib
import os
import subprocess
import sys
import timeit

from mile.numkern import _pykernels as py

CASES = [
    ("log_bessel_i series", "log_bessel_i", (5.0, 7.5)),
    ("log_bessel_i continued fraction", "log_bessel_i", (50.0, 300.0)),
    ("log_bessel_i uniform expansion", "log_bessel_i", (999.0, 1300.0)),
    ("log_bessel_i large argument", "log_bessel_i", (2.0, 1e4)),
    ("bessel_i_ratio", "bessel_i_ratio", (5.0, 7.5)),
    ("scaled_bessel_term", "scaled_bessel_term", (999.0, 1.3, 2000.0)),
    ("dyn_value_grad", "dyn_value_grad", (5.0, 3.1, 4.0, 20.0, 15.0, 12.0, 100.0, 5.0, 0.5, 1.0, 2.0)),
    ("iv_value_grad", "iv_value_grad", (1.1, -0.3, 1.1, 2.0, 1.0, 1.5, 5.0, 2000.0, 0.5, 1.0)),
]

FIT = (
    "import numpy as np\n"
    "from mile.dyn_panel import simulate_dyn, mile_dyn\n"
    "d = simulate_dyn(100, 10, 0.5, 1.0, 2.0, rng=np.random.default_rng(0))\n"
)


def fit_time(pure: bool, repeat: int) -> float:
    env = dict(os.environ)
    if pure:
        env["MILE_PURE_PYTHON"] = "1"
    code = (
        "import timeit\n"
        f"t = min(timeit.repeat('mile_dyn(d, std_errors=False)', setup={FIT!r}, number=20, repeat={repeat}))\n"
        "print(t / 20)\n"
    )
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=2000)
    args = ap.parse_args()
    try:
        ck = importlib.import_module("mile.numkern._ckernels")
    except ImportError:
        sys.exit("compiled kernels are not built; reinstall with Cython available")
    print(f"{'kernel':34s} {'python us':>10s} {'cython us':>10s} {'speed-up':>9s} {'max |diff|':>11s}")
    for label, name, argv in CASES:
        row = []
        vals = []
        for mod in (py, ck):
            fn = getattr(mod, name)
            t = min(timeit.repeat(lambda: fn(*argv), number=args.number, repeat=args.repeat))
            row.append(1e6 * t / args.number)
            vals.append(fn(*argv))
        a, b = vals
        a = a if isinstance(a, tuple) else (a,)
        b = b if isinstance(b, tuple) else (b,)
        diff = max(abs(x - y) for x, y in zip(a, b))
        print(f"{label:34s} {row[0]:10.2f} {row[1]:10.2f} {row[0] / row[1]:8.1f}x {diff:11.2e}")
    tp = fit_time(True, args.repeat)
    tc = fit_time(False, args.repeat)
    print(f"{'dyn fit N=100 T=10 (ms)':34s} {1e3 * tp:10.2f} {1e3 * tc:10.2f} {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()
