"""Compare the numba and numpy kernel paths on realistic bin states.

    python3 benchmarks/bench_kernels.py [--boxes 60] [--reps 200]

Bin states come from a First-Fit episode prefix on a synthetic collection,
so box counts and candidate sets look like the ones the policies see.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from robopack import kernels
from robopack.core import ORIENTATIONS, allowed_extents, candidate_arrays, RobotConfig
from robopack.heuristics import GRID, candidate_points
from robopack.policies import make_policy
from robopack.sim import gen_synthetic, run_episode


def bin_state(n_boxes: int, seed: int):
    col = gen_synthetic(seed=seed)
    m = run_episode(col.boxes[:n_boxes], make_policy("FF"), n_open=1, seed=seed, timing=False)
    b = max(m.all_bins, key=lambda s: len(s.placements))
    probe = col.boxes[-1]
    return b, probe


def timeit(fn, reps):
    fn()  # warm-up (and numba compile)
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--boxes", type=int, default=60)
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not kernels.HAS_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    b, probe = bin_state(args.boxes, args.seed)
    cfg = RobotConfig()
    exts = [e for _, e in allowed_extents(probe, cfg)]
    boxes, dims = b.boxes, b.dims_array
    cases = {}
    for label, pts in (("extreme", b.extreme_points), ("grid", candidate_points(b, GRID))):
        xyz, ext, _ = candidate_arrays(pts, exts)
        cases[label] = (xyz, ext)

    print(f"bin with {len(b.placements)} boxes; candidates: "
          + ", ".join(f"{k}={v[0].shape[0]}" for k, v in cases.items()))
    print(f"{'kernel':<28}{'numpy (us)':>12}{'numba (us)':>12}{'speed-up':>10}")
    rows = [("extreme_points", lambda k: k.extreme_points(boxes, dims))]
    for label, (xyz, ext) in cases.items():
        rows.append((f"feasible_mask[{label}]", lambda k, xyz=xyz, ext=ext: k.feasible_mask(boxes, dims, xyz, ext, 3, True)))
        rows.append((f"first_feasible[{label}]", lambda k, xyz=xyz, ext=ext: k.first_feasible(boxes, dims, xyz, ext, 3, False)))
    for name, fn in rows:
        a = np.asarray(fn(kernels.numpy_kernels))
        c = np.asarray(fn(kernels.jit_kernels))
        assert np.array_equal(a, c), f"{name}: paths disagree"
        tn = timeit(lambda: fn(kernels.numpy_kernels), args.reps)
        tj = timeit(lambda: fn(kernels.jit_kernels), args.reps)
        print(f"{name:<28}{tn * 1e6:>12.1f}{tj * 1e6:>12.1f}{tn / tj:>9.1f}x")


if __name__ == "__main__":
    main()
