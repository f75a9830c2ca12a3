"""Compare the compiled and numpy model-checking kernels on random systems.

    python3 benchmarks/bench_kernels.py [--states 20000] [--degree 4] [--domain 6] [--arity 1]
"""

import argparse
import time

import numpy as np

from baumlv.kernels import _fallback

try:
    from baumlv.kernels import _ckernels
except ImportError:
    _ckernels = None


def random_system(rng, states, degree, domain, arity):
    counts = rng.integers(1, 2 * degree, size=states)
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    E = int(offsets[-1])
    dst = rng.integers(0, states, size=E).astype(np.int64)
    A = domain ** arity
    mapped = rng.integers(-1, A, size=(E, A)).astype(np.int64)
    X = rng.random((A, states)) < 0.3
    return offsets, dst, mapped, X


def timed(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t)
    return best


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--states", type=int, default=20000)
    p.add_argument("--degree", type=int, default=4)
    p.add_argument("--domain", type=int, default=6)
    p.add_argument("--arity", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    rng = np.random.default_rng(args.seed)
    offsets, dst, mapped, X = random_system(rng, args.states, args.degree, args.domain, args.arity)
    print(f"{args.states} states, {len(dst)} edges, {X.shape[0]} assignments")
    impls = [("numpy", _fallback)] + ([("cython", _ckernels)] if _ckernels else [])
    results = {}
    for name, mod in impls:
        for kernel in ("pre_exists", "pre_forall"):
            fn = getattr(mod, kernel)
            results[(name, kernel)] = fn(offsets, dst, mapped, X, False)
            print(f"{name:7s} {kernel:11s} {timed(fn, offsets, dst, mapped, X, False) * 1e3:9.2f} ms")
        print(f"{name:7s} {'reachable':11s} {timed(mod.reachable, offsets, dst, 0) * 1e3:9.2f} ms")
    if _ckernels:
        for kernel in ("pre_exists", "pre_forall"):
            assert np.array_equal(results[("numpy", kernel)], results[("cython", kernel)]), kernel
        print("backends agree")
    else:
        print("compiled kernels not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
