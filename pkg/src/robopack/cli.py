"""``robopack`` command line: gen, bench, validate, export-milp.

Exit codes: 0 success, 1 validation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from robopack.core import ORIENTATIONS, Orientation, RobotConfig
from robopack.heuristics import CANDIDATE_MODES
from robopack.mpack import build_milp, export_model
from robopack.opack import Weights
from robopack.oracle import replay_trace
from robopack.policies import POLICY_NAMES, make_policy
from robopack.sim.data import (
    SYN_MAX_SIDE,
    SYN_MIN_SIDE,
    BIN_TYPES,
    bin_dims_for,
    collection_files,
    gen_industrial_like,
    gen_synthetic,
    load_collection,
    save_certificate,
    save_collection,
)
from robopack.sim.episode import run_episode
from robopack.sim.traces import (
    TraceError,
    metrics_row,
    read_trace,
    trace_document,
    write_metrics,
    write_trace,
)

EXIT_OK, EXIT_INVALID, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    policies: list = field(default_factory=lambda: ["O-FF", "O-BF", "MPL"])
    bin_type: str = "SYN"
    bin_dims: Optional[str] = None
    lookaheads: list = field(default_factory=lambda: [1, 2, 3, 4, 5])
    seeds: list = field(default_factory=lambda: list(range(25)))
    weights: Weights = field(default_factory=Weights)
    open_bins: int = 3
    orientations: Optional[list] = None
    forbid_upright: bool = False
    candidate_mode: str = "extreme"
    cep: Optional[bool] = None
    count_open_at_end: bool = False
    collections: Optional[str] = None
    out: str = "bench_out"
    export_milp: Optional[str] = None
    timing: bool = True
    node_cap: int = 10**7
    write_traces: bool = True

    @property
    def bin(self):
        return bin_dims_for(self.bin_dims or self.bin_type)

    @property
    def bin_label(self) -> str:
        return self.bin_dims if self.bin_dims else self.bin_type.upper()

    def robot(self) -> RobotConfig:
        allowed = ORIENTATIONS if not self.orientations else [Orientation.from_name(n) for n in self.orientations]
        return RobotConfig(frozenset(allowed), forbid_largest_dim_vertical=self.forbid_upright)


def parse_range(text: str) -> list:
    """``"1..5"``, ``"1,3,5"`` or ``"2"`` -> list of ints."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            a, b = part.split("..", 1)
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    if not out:
        raise ValueError(f"empty range {text!r}")
    return out


def parse_seeds(text: str) -> list:
    """A bare count ``N`` means seeds 0..N-1; lists and ranges are explicit."""
    text = text.strip()
    if text.isdigit():
        n = int(text)
        if n < 1:
            raise ValueError("need at least one seed")
        return list(range(n))
    return parse_range(text)


def _workers() -> int:
    raw = os.environ.get("BINPACK_THREADS", "")
    try:
        cap = int(raw) if raw else (os.cpu_count() or 1)
    except ValueError:
        cap = 1
    return max(1, cap)


def _collection_for(rc: RunConfig, seed: int, files):
    if files:
        return load_collection(files[seed % len(files)])
    if rc.bin_type.upper() == "SYN" or rc.bin_dims:
        # small custom bins get side bounds scaled down to fit
        hi = min(SYN_MAX_SIDE, min(rc.bin.sides))
        lo = min(SYN_MIN_SIDE, max(1, hi // 4))
        return gen_synthetic(rc.bin, 10, lo, hi, seed=seed).boxes
    return gen_industrial_like(rc.bin_type.upper(), 4, seed=seed)


def _episode(job):
    rc, policy_name, lookahead, seed, files = job
    boxes = _collection_for(rc, seed, files)
    policy = make_policy(
        policy_name, rc.robot(), rc.weights, rc.candidate_mode, cep=rc.cep, node_cap=rc.node_cap
    )
    hook = None
    if rc.export_milp and policy_name == "MP":
        folder = os.path.join(rc.export_milp, f"{policy_name}_l{lookahead}_s{seed}")
        os.makedirs(folder, exist_ok=True)
        hook = _milp_hook(folder, lookahead, policy)
    m = run_episode(
        boxes, policy, rc.bin, lookahead, seed, rc.open_bins,
        count_open_at_end=rc.count_open_at_end, timing=rc.timing, on_step=hook,
    )
    doc = trace_document(m, boxes, rc.bin, {"bin_type": rc.bin_label, "open_bins": rc.open_bins, **policy.describe()})
    return m, doc


def _milp_hook(folder, lookahead, policy):
    def hook(step, bins, window):
        model = build_milp(bins, window, policy.cfg, policy.weights)
        export_model(model, os.path.join(folder, f"step_{step}_l{lookahead}.lp-format"))
    return hook


def run_grid(rc: RunConfig, progress=None) -> list:
    files = collection_files(rc.collections) if rc.collections else None
    jobs = [(rc, p, l, s, files) for p in rc.policies for l in rc.lookaheads for s in rc.seeds]
    workers = min(_workers(), len(jobs))
    results = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for res in pool.map(_episode, jobs):
                results.append(res)
                if progress:
                    progress(res[0])
    else:
        for job in jobs:
            res = _episode(job)
            results.append(res)
            if progress:
                progress(res[0])
    return results


def summary_table(rows, policies, lookaheads) -> str:
    """Table-1-shaped text: one line per (lookahead, bin), FR% and time/box per policy."""
    cells = {}
    for r in rows:
        key = (r[2], r[1], r[0])
        cells.setdefault(key, []).append((float(r[4]), float(r[5])))
    bins = sorted({r[1] for r in rows})
    head = f"{'l':>2} {'bin':<9}" + "".join(f" {p:>8} FR% {'T(ms)':>9}" for p in policies)
    lines = [head, "-" * len(head)]
    for l in lookaheads:
        for b in bins:
            line = f"{l:>2} {b:<9}"
            for p in policies:
                vals = cells.get((l, b, p))
                if not vals:
                    line += f" {'-':>12} {'-':>9}"
                    continue
                fr = [v[0] for v in vals if not np.isnan(v[0])]
                mfr = f"{np.mean(fr):.2f}" if fr else "nan"
                line += f" {mfr:>12} {np.mean([v[1] for v in vals]):>9.3f}"
            lines.append(line)
    return "\n".join(lines)


# ---------------------------------------------------------------------------


def cmd_gen(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    os.makedirs(args.out, exist_ok=True)
    if args.kind == "synthetic":
        bd = bin_dims_for(args.dims)
        total = 0
        for k in range(args.n):
            col = gen_synthetic(bd, args.bins, args.min_side, args.max_side, seed=args.seed + k)
            base = os.path.join(args.out, f"syn_{k:03d}")
            save_collection(col.boxes, base + ".csv")
            save_certificate(col, base + ".cert.json")
            vol = sum(b.grid_volume for b in col.boxes)
            expect = args.bins * bd.grid_volume
            if vol != expect:
                print(f"certificate mismatch in {base}: {vol} != {expect}", file=sys.stderr)
                return EXIT_INVALID
            total += len(col.boxes)
        print(
            f"wrote {args.n} synthetic collections to {args.out}: {total} boxes, "
            f"each tiles {args.bins} bins of {'x'.join(map(str, bd.sides))} exactly (certificate fill 100.0%)"
        )
    else:
        kind = args.type.upper()
        if kind not in BIN_TYPES or kind == "SYN":
            raise UsageError(f"--type must be one of LDC, RC, PAL, EQ (got {args.type})")
        total = 0
        for k in range(args.n):
            boxes = gen_industrial_like(kind, args.target_bins, seed=args.seed + k)
            save_collection(boxes, os.path.join(args.out, f"{kind.lower()}_{k:03d}.csv"))
            total += len(boxes)
        print(f"wrote {args.n} {kind} collections to {args.out}: {total} boxes")
    return EXIT_OK


def _run_config(args) -> RunConfig:
    policies = [p.strip() for p in args.policies.split(",") if p.strip()]
    bad = [p for p in policies if p not in POLICY_NAMES]
    if bad:
        raise UsageError(f"unknown policy {', '.join(bad)}; valid names: {', '.join(POLICY_NAMES)}")
    try:
        rc = RunConfig(
            policies=policies,
            bin_type=args.bin_type,
            bin_dims=args.bin_dims,
            lookaheads=parse_range(args.l),
            seeds=parse_seeds(args.seeds),
            weights=Weights.parse(args.weights),
            open_bins=args.open_bins,
            orientations=args.orientations.split(",") if args.orientations else None,
            forbid_upright=args.forbid_upright,
            candidate_mode=args.candidate_mode,
            cep=None if args.cep is None else args.cep == "on",
            count_open_at_end=args.count_open_at_end,
            collections=args.collections,
            out=args.out,
            export_milp=args.export_milp,
            timing=not args.no_timing,
            node_cap=args.node_cap,
            write_traces=not args.no_traces,
        )
        rc.bin
        rc.robot()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if any(not 1 <= l <= 6 for l in rc.lookaheads):
        raise UsageError("look-ahead values must be within 1..6")
    if rc.open_bins < 1:
        raise UsageError("--open-bins must be at least 1")
    return rc


def cmd_bench(args) -> int:
    rc = _run_config(args)
    os.makedirs(rc.out, exist_ok=True)
    trace_dir = os.path.join(rc.out, "traces")
    if rc.write_traces:
        os.makedirs(trace_dir, exist_ok=True)
    if rc.export_milp:
        os.makedirs(rc.export_milp, exist_ok=True)
    n = len(rc.policies) * len(rc.lookaheads) * len(rc.seeds)
    print(f"running {n} episodes ({len(rc.policies)} policies x {len(rc.lookaheads)} look-aheads x {len(rc.seeds)} seeds)")
    results = run_grid(rc)
    rows = []
    budget = []
    for m, doc in results:
        rows.append(metrics_row(m, rc.bin_label))
        if m.budget_hits:
            budget.append((m.policy, m.lookahead, m.seed, m.budget_hits))
        if rc.write_traces:
            write_trace(os.path.join(trace_dir, f"{m.policy}_l{m.lookahead}_s{m.seed}.json"), doc)
    write_metrics(os.path.join(rc.out, "metrics.csv"), rows)
    print(summary_table(rows, rc.policies, rc.lookaheads))
    if budget:
        print(f"budget exhausted in {len(budget)} episode(s) (node cap {rc.node_cap}); incumbents or shrunk windows were used:")
        for p, l, s, hits in budget:
            print(f"  {p} l={l} seed={s}: {hits} capped solve(s)")
    print(f"metrics: {os.path.join(rc.out, 'metrics.csv')}")
    return EXIT_OK


def cmd_validate(args) -> int:
    status = EXIT_OK
    for path in args.traces:
        if not os.path.exists(path):
            raise UsageError(f"no such trace file: {path}")
        try:
            doc = read_trace(path)
            report = replay_trace(doc)
        except (TraceError, KeyError, TypeError, ValueError) as exc:
            print(f"{path}: parse error: {exc}")
            status = EXIT_INVALID
            continue
        if report.clean:
            print(f"{path}: clean ({report.checked} placements)")
        else:
            status = EXIT_INVALID
            print(f"{path}: {len(report.violations)} violation(s) in {report.checked} placements")
            for step, clause, msg in report.violations:
                print(f"  step {step}: {clause}: {msg}")
    return status


def cmd_export_milp(args) -> int:
    rc = _run_config(args)
    if args.collection:
        boxes = load_collection(args.collection)
    else:
        boxes = _collection_for(rc, rc.seeds[0], None)
    os.makedirs(args.out_dir, exist_ok=True)
    policy = make_policy("MP", rc.robot(), rc.weights, rc.candidate_mode, cep=rc.cep, node_cap=rc.node_cap)
    counts = []
    lookahead = rc.lookaheads[0]

    def hook(step, bins, window):
        if args.steps is not None and step >= args.steps:
            return
        model = build_milp(bins, window, policy.cfg, policy.weights)
        export_model(model, os.path.join(args.out_dir, f"step_{step}_l{lookahead}.lp-format"))
        counts.append((step, model.counts()))

    if args.steps is not None:
        boxes = boxes[: max(args.steps + lookahead - 1, 1)] if args.truncate else boxes
    run_episode(boxes, policy, rc.bin, lookahead, rc.seeds[0], rc.open_bins, timing=False, on_step=hook)
    for step, c in counts:
        print(
            f"step {step}: {c['variables']} variables ({c['binaries']} binary), "
            f"{c['constraints']} constraints, {c['objective_terms']} objective terms"
        )
    print(f"wrote {len(counts)} model file(s) to {args.out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def _add_run_flags(p, defaults):
    p.add_argument("--policies", default=defaults.get("policies", "O-FF,O-BF,MPL"),
                   help=f"comma list from {','.join(POLICY_NAMES)}")
    p.add_argument("--l", default=defaults.get("l", "1..5"), help="look-ahead values, e.g. 1..5 or 1,3,5")
    p.add_argument("--seeds", default="25", help="seed count N (0..N-1) or explicit list")
    p.add_argument("--weights", default="1,1,100", help="w1,w2,w3")
    p.add_argument("--open-bins", type=int, default=3)
    p.add_argument("--bin-type", default="SYN", help=f"one of {','.join(BIN_TYPES)}")
    p.add_argument("--bin-dims", default=None, help="custom bin LxBxH (overrides --bin-type)")
    p.add_argument("--orientations", default=None, help="allowed orientations, e.g. lbh,blh (default all 6)")
    p.add_argument("--forbid-upright", action="store_true", help="largest side may not stand vertical")
    p.add_argument("--candidate-mode", choices=list(CANDIDATE_MODES), default="extreme")
    p.add_argument("--cep", choices=["on", "off"], default=None, help="default: on for MP, off otherwise")
    p.add_argument("--count-open-at-end", action="store_true")
    p.add_argument("--collections", default=None, help="directory of collection CSVs (seed picks a file)")
    p.add_argument("--out", default="bench_out")
    p.add_argument("--export-milp", default=None, metavar="DIR")
    p.add_argument("--no-timing", action="store_true", help="write zero times so outputs are byte-stable")
    p.add_argument("--no-traces", action="store_true")
    p.add_argument("--node-cap", type=int, default=10**7, help="MP branch-and-bound node budget per solve")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="robopack", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate box collections")
    gsub = g.add_subparsers(dest="kind", required=True)
    gs = gsub.add_parser("synthetic", help="guillotine-cut bins into boxes (100%% packable)")
    gs.add_argument("--bins", type=int, default=10)
    gs.add_argument("--dims", default="80x45x45")
    gs.add_argument("--n", type=int, default=30)
    gs.add_argument("--min-side", type=int, default=None)
    gs.add_argument("--max-side", type=int, default=None)
    gs.add_argument("--seed", type=int, default=0)
    gs.add_argument("--out", default="collections")
    gi = gsub.add_parser("industrial", help="industrial-style real-valued boxes")
    gi.add_argument("--type", default="LDC")
    gi.add_argument("--target-bins", type=float, default=4)
    gi.add_argument("--n", type=int, default=25)
    gi.add_argument("--seed", type=int, default=0)
    gi.add_argument("--out", default="collections")

    b = sub.add_parser("bench", help="run the policy x look-ahead x seed grid")
    _add_run_flags(b, {})

    v = sub.add_parser("validate", help="replay traces through the voxel oracle")
    v.add_argument("traces", nargs="+")

    e = sub.add_parser("export-milp", help="run MP and write one MILP file per step")
    _add_run_flags(e, {"policies": "MP", "l": "3"})
    e.add_argument("--collection", default=None, help="collection CSV (default: synthetic from first seed)")
    e.add_argument("--steps", type=int, default=None, help="export only the first N steps")
    e.add_argument("--truncate", action="store_true", help="with --steps, also stop the episode early")
    e.add_argument("--out-dir", default="milp_out")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "gen":
            if args.kind == "synthetic":
                from robopack.sim import data

                args.min_side = data.SYN_MIN_SIDE if args.min_side is None else args.min_side
                args.max_side = data.SYN_MAX_SIDE if args.max_side is None else args.max_side
            try:
                return cmd_gen(args)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
        if args.command == "bench":
            return cmd_bench(args)
        if args.command == "validate":
            return cmd_validate(args)
        if args.command == "export-milp":
            return cmd_export_milp(args)
    except UsageError as exc:
        print(f"robopack: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"robopack: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
