"""Time the numba and numpy variants of the hot kernels.

    python benchmarks/bench_kernels.py [--lines 2000] [--points 20000] [--repeat 5]

Each kernel runs once untimed (numba compiles on first call), then the best of
``--repeat`` runs is reported.  The two variants are also checked for agreement.
"""

import argparse
import time

import numpy as np

from linefib import _accel, _kernels
from linefib.expr.compile import CompiledField
from linefib.gallery import get_example


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def agreement(name, a, b):
    """Largest difference between the two outputs.

    For pair_scan the parameters t1, t2 carry a 1 / sin^2(angle) condition
    number, so their differences are scaled by sin^2(angle) first.
    """
    if name.startswith("pair_scan"):
        w = np.sin(a[3]) ** 2
        diffs = [np.abs(a[0] - b[0]) * w, np.abs(a[1] - b[1]) * w, np.abs(a[2] - b[2]), np.abs(a[3] - b[3])]
        diffs.append((a[4] != b[4]).astype(float))
    else:
        diffs = [np.abs(np.nan_to_num(x) - np.nan_to_num(y)) for x, y in zip(a, b)]
    return max(float(d.max()) for d in diffs)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lines", type=int, default=2000)
    ap.add_argument("--points", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(args.seed)
    B = rng.uniform(-1, 1, size=(args.lines, 3))
    D = rng.normal(size=(args.lines, 3))
    D /= np.linalg.norm(D, axis=1)[:, None]
    P = rng.uniform(-1, 1, size=(args.points, 3))
    lo, hi = np.full(3, -1.5), np.full(3, 1.5)

    spec = get_example("skew-hopf").spec()
    fast = CompiledField(spec.components, spec.normalize, use_numba=True)
    slow = CompiledField(spec.components, spec.normalize, use_numba=False)

    cases = [
        (f"pair_scan ({args.lines} lines)", lambda u: _kernels.pair_scan(B, D, use_numba=u)),
        (f"clip_to_box ({args.lines} lines)", lambda u: _kernels.clip_to_box(B, D, lo, hi, use_numba=u)),
        (f"jet_batch skew-hopf ({args.points} pts)", lambda u: (fast if u else slow).jet_batch(P)),
    ]
    print(f"{'kernel':<36} {'numpy [s]':>10} {'numba [s]':>10} {'speedup':>8}  max diff")
    for name, fn in cases:
        a, b = fn(True), fn(False)
        diff = agreement(name, a, b)
        t_np = best_of(lambda: fn(False), args.repeat)
        t_nb = best_of(lambda: fn(True), args.repeat)
        print(f"{name:<36} {t_np:>10.4f} {t_nb:>10.4f} {t_np / t_nb:>7.1f}x  {diff:.1e}")


if __name__ == "__main__":
    main()
