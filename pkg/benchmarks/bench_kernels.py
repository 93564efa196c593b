"""Time the compiled and pure-Python path kernels on the same workload.

    python3 benchmarks/bench_kernels.py --steps 20000 --repeat 3
"""
import argparse
import time

import numpy as np

from stochsirs import _pykernels
from stochsirs.core import baseline_params
from stochsirs.integrate import Scheme, draw_noise

try:
    from stochsirs._ckernels import integrate_path as compiled
except ImportError:
    compiled = None


def bench(fn, args, steps, repeat):
    out = np.empty((steps + 1, 3))
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args, out)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    p = baseline_params(mu=0.006)
    sig = (0.01, 0.02, 0.03, 0.01)
    xi = draw_noise(0, 0, args.steps)
    print(f"{'scheme':<20}{'python µs/step':>16}{'cython ns/step':>16}{'speedup':>10}  identical")
    for scheme in Scheme:
        call = ((10.0, 5.0, 2.0), p.as_tuple(), sig, 0.1, 0.1, args.steps, scheme.code,
                True, 1e-6, xi)
        tp, outp = bench(_pykernels.integrate_path, call, args.steps, args.repeat)
        if compiled is None:
            print(f"{scheme.value:<20}{tp / args.steps * 1e6:>16.2f}{'n/a':>16}{'':>10}  -")
            continue
        tc, outc = bench(compiled, call, args.steps, args.repeat)
        print(f"{scheme.value:<20}{tp / args.steps * 1e6:>16.2f}{tc / args.steps * 1e9:>16.1f}"
              f"{tp / tc:>9.0f}x  {np.array_equal(outp, outc)}")


if __name__ == "__main__":
    main()
