"""Compare the numba and pure-numpy MinHash kernels on identical inputs.

Run directly:

    python3 benchmarks/bench_minhash.py [--sets 2000] [--shingles 200]

The numba path warms up its JIT on a throwaway batch before timing. Both
backends must produce bit-identical signatures; the script asserts that.
"""

import argparse
import random
import time

import numpy as np

from warnminer import minhash as mh


def make_inputs(n_sets: int, n_shingles: int, seed: int) -> list[np.ndarray]:
    rng = random.Random(seed)
    return [
        np.fromiter(
            sorted({rng.getrandbits(64) for _ in range(n_shingles)}), dtype=np.uint64
        )
        for _ in range(n_sets)
    ]


def run_backend(kernel, inputs, a, b):
    start = time.perf_counter()
    sigs = [kernel(xs, a, b) for xs in inputs]
    return time.perf_counter() - start, sigs


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sets", type=int, default=2000)
    parser.add_argument("--shingles", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    inputs = make_inputs(args.sets, args.shingles, args.seed)
    a, b = mh._params(mh.SIGNATURE_SEED)

    numpy_time, numpy_sigs = run_backend(mh._signature_numpy, inputs, a, b)
    print(f"numpy : {args.sets} sets x {args.shingles} shingles "
          f"in {numpy_time:.3f}s ({args.sets / numpy_time:.0f} sets/s)")

    if not mh.HAS_NUMBA:
        print("numba : unavailable (not installed or disabled via "
              "WARNMINER_NO_NUMBA); skipping comparison")
        return

    mh._signature_numba(inputs[0], a, b)  # JIT warm-up outside the timer
    numba_time, numba_sigs = run_backend(mh._signature_numba, inputs, a, b)
    print(f"numba : {args.sets} sets x {args.shingles} shingles "
          f"in {numba_time:.3f}s ({args.sets / numba_time:.0f} sets/s)")
    print(f"speedup: {numpy_time / numba_time:.2f}x")

    for s_np, s_nb in zip(numpy_sigs, numba_sigs):
        assert np.array_equal(s_np, s_nb), "backends disagree"
    print("signatures bit-identical across backends")


if __name__ == "__main__":
    main()
