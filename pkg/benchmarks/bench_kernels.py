"""Compare the compiled and numpy Pauli kernels on a matrix-free apply.

Usage::

    python benchmarks/bench_kernels.py [--n 14] [--terms 40] [--repeat 20]
"""

import argparse
import time

import numpy as np

from adiasym import kernels


def bench(mod, xs, zs, coefs, psi, repeat):
    out = np.zeros_like(psi)
    mod.apply_pauli(xs, zs, coefs, psi, out)  # warm up
    best = np.inf
    for _ in range(repeat):
        out[:] = 0
        t0 = time.perf_counter()
        mod.apply_pauli(xs, zs, coefs, psi, out)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=14)
    ap.add_argument("--terms", type=int, default=40)
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    dim = 1 << args.n
    xs = rng.integers(1, dim, size=args.terms).astype(np.uint64)
    zs = rng.integers(0, dim, size=args.terms).astype(np.uint64)
    print(f"n={args.n} terms={args.terms} dim={dim}")
    print(f"{'backend':>8} {'dtype':>10} {'seconds':>10} {'ns/elem-term':>13}")
    for dtype in (np.float64, np.complex128):
        coefs = rng.normal(size=args.terms).astype(dtype)
        psi = rng.normal(size=dim).astype(dtype)
        ref = None
        for name, mod in sorted(kernels.available_backends().items()):
            t, out = bench(mod, xs, zs, coefs, psi, args.repeat)
            if ref is None:
                ref = out
            assert np.allclose(out, ref), "backends disagree"
            per = 1e9 * t / (dim * args.terms)
            print(f"{name:>8} {np.dtype(dtype).name:>10} {t:10.5f} {per:13.2f}")


if __name__ == "__main__":
    main()
