"""Compare the numba and pure-numpy SCL list-decoder kernels.

    python benchmarks/bench_scl.py [--batch 256] [--n-c 32] [--list-size 2] [--repeats 5]

Both kernels decode the same noisy BPSK batch; the script checks that they
return identical paths and prints the best-of-N wall time for each.
"""

import argparse
import time

import numpy as np

from polarair import kernels
from polarair._backend import HAS_NUMBA
from polarair.polar_code import bpsk, build_polar_spec, estimates_to_llr, polar_encode


def make_batch(batch, n_c, payload_len, sigma, seed):
    rng = np.random.default_rng(seed)
    spec = build_polar_spec(n_c, payload_len)
    payload = rng.integers(0, 2, size=(batch, payload_len), dtype=np.uint8)
    frozen = rng.integers(0, 2, size=(batch, n_c - payload_len), dtype=np.uint8)
    x = bpsk(polar_encode(payload, frozen, spec))
    llr = estimates_to_llr(x + sigma * rng.standard_normal(x.shape))
    full = np.zeros((batch, n_c), dtype=np.uint8)
    full[:, list(spec.frozen_set)] = frozen
    return llr, np.asarray(spec.info_mask), full


def best_time(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--batch", type=int, default=256)
    ap.add_argument("--n-c", type=int, default=32)
    ap.add_argument("--payload", type=int, default=15)
    ap.add_argument("--list-size", type=int, default=2)
    ap.add_argument("--sigma", type=float, default=0.8)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    llr, mask, frozen = make_batch(args.batch, args.n_c, args.payload, args.sigma, seed=1)
    t_np, ref = best_time(lambda: kernels.scl_batch_numpy(llr, mask, frozen, args.list_size),
                          args.repeats)
    print(f"numpy  batch={args.batch} n_c={args.n_c} list={args.list_size}: {t_np * 1e3:9.2f} ms")
    if not HAS_NUMBA:
        print("numba  unavailable or disabled (POLARAIR_NUMBA=0); skipped")
        return

    t0 = time.perf_counter()
    kernels.scl_batch_numba(llr[:1], mask, frozen[:1], args.list_size)
    print(f"numba  first call (compile or cache load): {(time.perf_counter() - t0) * 1e3:.1f} ms")
    t_nb, out = best_time(lambda: kernels.scl_batch_numba(llr, mask, frozen, args.list_size),
                          args.repeats)
    print(f"numba  batch={args.batch} n_c={args.n_c} list={args.list_size}: {t_nb * 1e3:9.2f} ms")
    print(f"speedup {t_np / t_nb:.2f}x")

    same_u = np.array_equal(out[0], ref[0]) and out[2] == ref[2]
    finite = np.isfinite(ref[1])
    same_pm = np.array_equal(finite, np.isfinite(out[1])) and np.allclose(out[1][finite], ref[1][finite],
                                                                         rtol=1e-12, atol=1e-12)
    print(f"outputs agree: {same_u and same_pm}")


if __name__ == "__main__":
    main()
