"""Time the compiled split-scan kernel against the numpy fallback.

    python3 benchmarks/bench_splitscan.py [--repeat 5]

Reports per-call kernel time at a few node sizes, then a full forest and
boosting fit on a 300 x 55 binary design (the shape of the founder matrix).
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from founder_success.ml import BoostParams, ForestParams, GradientBoostedTrees, RandomForest, kernels


def node(n: int, d: int, rng: np.random.Generator):
    X = rng.integers(0, 4, (n, d)).astype(float)
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.ascontiguousarray(np.take_along_axis(X, order, axis=0))
    ys = np.ascontiguousarray((rng.random((n, d)) < 0.5).astype(float))
    gs = np.ascontiguousarray(rng.normal(size=(n, d)))
    hs = np.ascontiguousarray(rng.uniform(0.05, 0.25, (n, d)))
    return xs, ys, gs, hs


def best_of(fn, repeat: int, number: int) -> float:
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = ["python"] + (["cython"] if kernels.compiled_kernels is not None else [])
    if len(backends) == 1:
        print("compiled kernel not built; timing the fallback only")
    rng = np.random.default_rng(0)

    print(f"{'kernel':<8} {'rows x cols':>12} " + " ".join(f"{b + ' us':>12}" for b in backends) + f" {'speedup':>8}")
    for n, d in ((16, 7), (64, 7), (240, 7), (240, 55)):
        xs, ys, gs, hs = node(n, d, rng)
        for name in ("gini", "newton"):
            times = []
            for b in backends:
                k = kernels.get(b)
                if name == "gini":
                    call = lambda k=k: k.scan_gini(xs, ys, 1)  # noqa: E731
                else:
                    call = lambda k=k: k.scan_newton(xs, gs, hs, 1.0, 1)  # noqa: E731
                times.append(best_of(call, args.repeat, 200) * 1e6)
            speed = f"{times[0] / times[-1]:7.1f}x" if len(times) == 2 else ""
            print(f"{name:<8} {f'{n} x {d}':>12} " + " ".join(f"{t:12.1f}" for t in times) + f" {speed:>8}")

    X = (rng.random((300, 55)) < 0.3).astype(float)
    X[:, 11] = rng.integers(1, 11, 300)
    y = X[:, 11] + 3 * X[:, 20] + rng.normal(size=300) > 6
    print()
    for label, make in (
        ("forest 100 trees", lambda k: RandomForest(ForestParams(), kernels=k)),
        ("gbt 200 rounds", lambda k: GradientBoostedTrees(BoostParams(), kernels=k)),
    ):
        times = [best_of(lambda b=b: make(kernels.get(b)).fit(X, y), max(1, args.repeat // 2), 1) for b in backends]
        print(f"{label:<18} " + "  ".join(f"{b} {t:.3f} s" for b, t in zip(backends, times)))


if __name__ == "__main__":
    main()
