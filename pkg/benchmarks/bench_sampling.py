"""Time the compiled sampling kernels against the pure-Python fallback.

    python benchmarks/bench_sampling.py [--shots N] [--repeat K]

Both backends are fed identical generator states, so the script also
confirms that their outputs are bit-identical.
"""

import argparse
import time

import numpy as np

from elgi import _fallback
from elgi.protocols import analytic_joint2
from elgi.sampling import Rng


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return min(times), result


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--shots", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    try:
        from elgi import _kernels
    except ImportError:
        print("compiled kernels not built; run `pip install -e . --no-build-isolation` first")
        return 1

    cdf = np.cumsum(analytic_joint2(0.5, np.pi / 4).flat())
    cdf[-1] = 1.0

    def counts(module):
        state = Rng(1).state
        return lambda: module.multinomial_counts(cdf, args.shots, state.copy())

    def uniforms(module):
        state = Rng(1).state
        return lambda: module.uniform_doubles(args.shots, state.copy())

    print(f"{'kernel':<20}{'cython (s)':>12}{'python (s)':>12}{'speedup':>10}  identical")
    for name, make in (("multinomial_counts", counts), ("uniform_doubles", uniforms)):
        tc, rc = best_of(make(_kernels), args.repeat)
        tp, rp = best_of(make(_fallback), 1)
        same = np.array_equal(rc, rp)
        print(f"{name:<20}{tc:>12.4f}{tp:>12.4f}{tp / tc:>9.0f}x  {same}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
