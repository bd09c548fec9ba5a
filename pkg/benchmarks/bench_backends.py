"""Compare the numba and pure-numpy backends.

Runs the Jacobi eigensolver directly with each backend (LAPACK as a
reference), then times the full overlap pipeline in subprocesses with and
without ``LPBOUNDS_DISABLE_NUMBA`` so the whole package runs on one backend.

    python benchmarks/bench_backends.py [--batch 2000] [--dims 2 3 4 8] [--repeat 5]
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from lpbounds import matcore
from lpbounds.randgen import RngStream

PIPELINE = """
import time
from lpbounds.measure import joint_overlap, intrinsic_overlap
from lpbounds.randgen import RngStream, random_povm
rng = RngStream(1)
pairs = [(random_povm({n}, 4, rng), random_povm({n}, 5, rng)) for _ in range({pairs})]
joint_overlap(*pairs[0])  # compile / warm up
t0 = time.perf_counter()
for a, b in pairs:
    joint_overlap(a, b); intrinsic_overlap(a); intrinsic_overlap(b)
print(time.perf_counter() - t0)
"""


def hermitian_batch(n, batch, seed=0):
    g = RngStream(seed).complex_normal((batch, n, n))
    return 0.5 * (g + np.conj(np.swapaxes(g, 1, 2)))


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_eigh(dims, batch, repeat):
    print(f"eigh_batch, {batch} matrices, best of {repeat} (ms)")
    print(f"{'N':>4} {'numba':>10} {'numpy':>10} {'LAPACK':>10} {'speedup':>8} {'max |dw|':>10}")
    for n in dims:
        h = hermitian_batch(n, batch)
        matcore.eigh_batch(h[:2], backend="numba")  # compile outside the timing
        t_nb = best_of(lambda: matcore.eigh_batch(h, backend="numba"), repeat)
        t_np = best_of(lambda: matcore.eigh_batch(h, backend="numpy"), repeat)
        t_la = best_of(lambda: np.linalg.eigh(h), repeat)
        dw = np.max(np.abs(matcore.eigh_batch(h, backend="numba")[0] - matcore.eigh_batch(h, backend="numpy")[0]))
        print(f"{n:>4} {t_nb * 1e3:>10.2f} {t_np * 1e3:>10.2f} {t_la * 1e3:>10.2f} {t_np / t_nb:>7.1f}x {dw:>10.1e}")


def bench_pipeline(n, pairs):
    code = PIPELINE.format(n=n, pairs=pairs)
    times = {}
    for label, flag in (("numba", ""), ("numpy", "1")):
        env = dict(os.environ, LPBOUNDS_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        times[label] = float(out.stdout.strip())
    print(f"\noverlap pipeline, {pairs} POVM pairs (N={n}, N_A=4, N_B=5)")
    for label, t in times.items():
        print(f"  {label:>6}: {t:.3f} s")
    print(f"  speedup: {times['numpy'] / times['numba']:.1f}x")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--batch", type=int, default=2000)
    ap.add_argument("--dims", type=int, nargs="+", default=[2, 3, 4, 8])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--pairs", type=int, default=2000)
    args = ap.parse_args(argv)
    bench_eigh(args.dims, args.batch, args.repeat)
    bench_pipeline(3, args.pairs)


if __name__ == "__main__":
    main()
