"""Time each kernel under the numpy fallback and the compiled extension.

    python3 benchmarks/bench_kernels.py [--devices 100] [--repeat 5]
"""
import argparse
import time

import numpy as np

from fogcolony import kernels
from fogcolony.infra import generate_topology


def _inputs(n: int, seed: int):
    rng = np.random.default_rng(seed)
    infra = generate_topology(n, seed=seed)
    lat = infra.latency_matrix
    members = np.arange(n)
    n_items = 4 * n
    req = rng.integers(1, 3, size=n_items).astype(float)
    ptr, idx = [0], []
    for _ in range(n_items):
        idx.extend(rng.choice(n, size=int(rng.integers(1, 6)), replace=False).tolist())
        ptr.append(len(idx))
    parent_item = np.array([int(rng.integers(-1, i)) if i else -1 for i in range(n_items)], dtype=np.int64)
    parent_dev = np.full(n_items, -1, dtype=np.int64)
    caps = rng.integers(1, 5, size=n).astype(float)
    obj = rng.random((3 * n, 2))
    return lat, members, (req, np.array(ptr), np.array(idx), parent_item, parent_dev), caps, obj


def _best(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--devices", type=int, default=100)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    lat, members, ff_args, caps, obj = _inputs(args.devices, args.seed)
    dist = np.ascontiguousarray(kernels.BACKENDS["python"].restricted_dist(lat, members))
    cases = {
        "restricted_dist": lambda b: b.restricted_dist(lat, members),
        "betweenness": lambda b: b.betweenness(lat, members),
        "nondominated_ranks": lambda b: b.nondominated_ranks(obj),
        "first_fit": lambda b: b.first_fit(dist, caps.copy(), *ff_args),
    }
    names = list(kernels.BACKENDS)
    print(f"{args.devices} devices, best of {args.repeat}; active backend: {kernels.BACKEND}")
    print(f"{'kernel':<20}" + "".join(f"{n + ' (ms)':>16}" for n in names) + (f"{'speedup':>10}" if len(names) > 1 else ""))
    for label, call in cases.items():
        t = {n: _best(lambda: call(kernels.BACKENDS[n]), args.repeat) for n in names}
        row = f"{label:<20}" + "".join(f"{1e3 * t[n]:>16.3f}" for n in names)
        if "cython" in t:
            row += f"{t['python'] / t['cython']:>9.1f}x"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
