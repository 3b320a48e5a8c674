"""Benchmark the compiled kernel lane against the pure-numpy lane.

Runs the per-node hot kernels on increasing node counts and, when the
extension is available, an end-to-end implicit step on a property-test
grid under both lanes.  Usage: python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from framewalk import ElasticCoefficients, SolverSettings, SpectralGrid, \
    initial_profile, reduce_coefficients
from framewalk import _kernels_np as np_lane
from framewalk import kernels
from framewalk.integrator import StepState, grdg_step

try:
    from framewalk import _kernels as cy_lane
except ImportError:
    cy_lane = None


def timeit(fn, *args, repeat=7):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_pointwise():
    rng = np.random.default_rng(0)
    print(f"{'kernel':<18}{'nodes':>9}{'numpy':>12}{'compiled':>12}{'speedup':>9}")
    for m in (1_024, 16_384, 262_144):
        p = np_lane.cayley_apply(
            np.broadcast_to(np.eye(3), (m, 3, 3)).copy(),
            rng.normal(size=(m, 3)), 1.0)
        omega = rng.normal(size=(m, 3))
        d = rng.normal(size=(m, 3, 3))
        cases = [
            ("cayley_apply", (p, omega, 2e-3),
             np_lane.cayley_apply, cy_lane and cy_lane.cayley_apply),
            ("tangent_pairings", (p, d),
             np_lane.tangent_pairings, cy_lane and cy_lane.tangent_pairings),
            ("gram_error", (p,),
             np_lane.gram_error, cy_lane and cy_lane.gram_error),
            ("frame_times_skew", (p, omega),
             np_lane.frame_times_skew, cy_lane and cy_lane.frame_times_skew),
        ]
        for name, args, fnp, fcy in cases:
            t_np = timeit(fnp, *args)
            if fcy is None:
                print(f"{name:<18}{m:>9}{t_np * 1e3:>10.3f}ms{'-':>12}{'-':>9}")
                continue
            t_cy = timeit(fcy, *args)
            print(f"{name:<18}{m:>9}{t_np * 1e3:>10.3f}ms"
                  f"{t_cy * 1e3:>10.3f}ms{t_np / t_cy:>8.1f}x")
        print()


def bench_step(lane_name):
    g = SpectralGrid((48, 48, 1), (2, 2, 2), (-1, -1, -1))
    p0 = initial_profile("paper_eq_3_3", g)
    coeffs = ElasticCoefficients((1.0,) * 12)
    rc = reduce_coefficients(coeffs)
    state = StepState.initial(p0, rc, tau=2e-3)
    t0 = time.perf_counter()
    for _ in range(20):
        grdg_step(state, rc, coeffs.chi, SolverSettings())
    elapsed = time.perf_counter() - t0
    evals = sum(r.residual_evals for r in state.history)
    print(f"{lane_name}: 20 implicit steps on 48x48 in {elapsed:.2f}s "
          f"({evals} residual evaluations, "
          f"{1e3 * elapsed / evals:.2f} ms/evaluation)")


def main():
    print(f"active kernel backend: {kernels.BACKEND}\n")
    bench_pointwise()
    if cy_lane is None:
        print("compiled lane unavailable; end-to-end comparison skipped")
        return
    # swap the dispatch globals to time the full step under each lane
    saved = kernels._compiled
    kernels._compiled = None
    bench_step("numpy lane   ")
    kernels._compiled = saved
    bench_step("compiled lane")


if __name__ == "__main__":
    main()
