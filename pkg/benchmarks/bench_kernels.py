"""Compare the compiled and numpy ``subset_entropies`` kernels.

    python3 benchmarks/bench_kernels.py [--repeat 20] [--json]

Workloads mirror what the library does: random joint pmfs over the
five-system two-channel context and over six systems with a larger
auxiliary alphabet.
"""

import argparse
import json
import timeit

import numpy as np

from addicone._kernels import _fallback

try:
    from addicone._kernels import _ckernels
except ImportError:  # extension not built
    _ckernels = None

WORKLOADS = {
    "5 systems, binary": (2, 2, 2, 2, 2),
    "5 systems, |V|=4": (4, 2, 2, 2, 2),
    "6 systems, binary": (2, 2, 2, 2, 2, 2),
    "7 systems, |V|=32": (32, 2, 2, 2, 2, 2, 2),
}


def make_input(radices, seed=0):
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(int(np.prod(radices)))).reshape(radices)
    idx = np.argwhere(p > 0)
    return idx.astype(np.int64), p[tuple(idx.T)].astype(np.float64), np.array(radices, dtype=np.int64)


def run(repeat):
    rows = []
    for name, radices in WORKLOADS.items():
        args = make_input(radices)
        row = {"workload": name, "atoms": int(args[0].shape[0])}
        t_py = min(timeit.repeat(lambda: _fallback.subset_entropies(*args), number=1, repeat=repeat))
        row["python_ms"] = 1e3 * t_py
        if _ckernels is not None:
            ref = _fallback.subset_entropies(*args)
            got = _ckernels.subset_entropies(*args)
            row["max_abs_diff"] = float(np.max(np.abs(ref - got)))
            t_c = min(timeit.repeat(lambda: _ckernels.subset_entropies(*args), number=1, repeat=repeat))
            row["cython_ms"] = 1e3 * t_c
            row["speedup"] = t_py / t_c
        rows.append(row)
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    rows = run(args.repeat)
    if args.json:
        print(json.dumps(rows, indent=2))
        return
    if _ckernels is None:
        print("compiled extension not available; numpy timings only")
    print(f"{'workload':<22}{'atoms':>7}{'numpy ms':>11}{'cython ms':>11}{'speedup':>9}")
    for r in rows:
        c = f"{r['cython_ms']:11.3f}{r['speedup']:9.1f}" if "cython_ms" in r else ""
        print(f"{r['workload']:<22}{r['atoms']:>7}{r['python_ms']:11.3f}{c}")


if __name__ == "__main__":
    main()
