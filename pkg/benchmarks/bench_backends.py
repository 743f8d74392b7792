"""Wall-clock comparison of the compiled step kernels against the
pure-Python step rule on the shipped instance families.

Usage: python benchmarks/bench_backends.py [T]
"""

import sys
import time

import numpy as np

import saddlebench as sb


def bench(problem, kind, params, x0, y0, T, backend, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        sb.run(kind, problem, params, x0, y0, T, stride=max(1, T // 10),
               measures=(), backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    T = int(sys.argv[1]) if len(sys.argv) > 1 else 100000
    if not sb.COMPILED_AVAILABLE:
        print("compiled kernels unavailable; timing the Python path only")

    cells = [
        ("bilinear_cc n=d=2", sb.InstanceSpec(family="bilinear_cc", n=2, d=2,
                                              seed=3)),
        ("bilinear_cc n=d=8", sb.InstanceSpec(family="bilinear_cc", n=8, d=8,
                                              seed=3)),
        ("quadratic_cc n=d=4", sb.InstanceSpec(family="quadratic_cc", n=4,
                                               d=4, seed=11)),
        ("polynomial_nc_c", sb.InstanceSpec(family="polynomial_nc_c")),
    ]
    print(f"{'instance':22} {'algo':8} {'python':>10} {'compiled':>10} "
          f"{'speedup':>8}   (T={T})")
    for name, spec in cells:
        prob = sb.make_instance(spec)
        L = prob.structure.lipschitz_L
        params = sb.SolverParams(2 * L, 2 * L, 0.02 / L, 0.02 / L, 0.05, 0.05,
                                 sb.Regime.MANUAL)
        x0 = prob.set_x.sample(np.random.Generator(np.random.Philox(0)))
        y0 = prob.set_y.sample(np.random.Generator(np.random.Philox(1)))
        for kind in ("ds_ogda", "eg"):
            t_py = bench(prob, kind, params, x0, y0, T, "python")
            if sb.COMPILED_AVAILABLE:
                t_c = bench(prob, kind, params, x0, y0, T, "compiled")
                print(f"{name:22} {kind:8} {t_py:9.3f}s {t_c:9.3f}s "
                      f"{t_py / t_c:7.1f}x")
            else:
                print(f"{name:22} {kind:8} {t_py:9.3f}s {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
