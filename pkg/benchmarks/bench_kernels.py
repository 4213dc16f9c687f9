"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both back ends are imported directly, so the environment switch
``PANTSDECOMP_PURE_PYTHON`` has no effect here.
"""
import argparse
import math
import time

import numpy as np

from pantsdecomp import _pykernels
from pantsdecomp.domain import P0, DirichletDomain
from pantsdecomp.surface import bolza_group, random_surface

try:
    from pantsdecomp import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def random_points(rng, n, r_max=3.0):
    r = r_max * np.sqrt(rng.random(n))
    th = rng.uniform(0, 2 * np.pi, n)
    return np.stack([np.cosh(r), np.sinh(r) * np.cos(th), np.sinh(r) * np.sin(th)], axis=1)


def random_normals(rng, m, r_max=3.0):
    # unit normal of the line at distance s from p, facing direction th
    s = rng.uniform(-r_max, r_max, m)
    th = rng.uniform(0, 2 * np.pi, m)
    return np.stack([np.sinh(s), np.cosh(s) * np.cos(th), np.cosh(s) * np.sin(th)], axis=1)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    backends = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])
    if _ckernels is None:
        print("compiled extension not built; timing the numpy fallback only")

    X = random_points(rng, 4000)
    N = random_normals(rng, 600)
    print(f"min_abs_dot: {len(X)} points x {len(N)} lines")
    ref = None
    for name, mod in backends:
        t = best_of(lambda: mod.min_abs_dot(X, N), args.repeat)
        v, _ = mod.min_abs_dot(X, N)
        ref = v if ref is None else ref
        print(f"  {name:<7} {t * 1e3:9.2f} ms   max |diff| {np.max(np.abs(v - ref)):.1e}")

    cases = [("bolza", bolza_group(), 7.0), ("genus 3", random_surface(3, 1.8, 4.0, 0, "ring").group(), 8.0)]
    for label, group, radius in cases:
        D = DirichletDomain.build(group)
        print(f"ball_bfs: {label}, {D.n_sides} sides, radius {radius}")
        sizes = {}
        for name, mod in backends:
            fn = lambda: mod.ball_bfs(D.elements, P0, math.cosh(radius), D.cell, 10**7)
            t = best_of(fn, args.repeat)
            sizes[name] = len(fn()[0])
            print(f"  {name:<7} {t * 1e3:9.2f} ms   {sizes[name]} tiles")
        if len(set(sizes.values())) > 1:
            print("  tile counts differ between back ends")


if __name__ == "__main__":
    main()
