"""Exact joint placement of a whole look-ahead window, and the MPack step.

The joint search is a depth-first branch and bound. Boxes are laid in
canonical bottom-up order, keyed by ``(z, rank)``, so every joint layout is
visited once and a box can rest on any look-ahead box below it. Support
comes only from strictly lower boxes. That makes the stability check at
each node exact. Lateral contacts (CEP) can also come from boxes placed
later, so CEP is checked on complete layouts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from robopack import kernels
from robopack.core import (
    BinState,
    BoxDims,
    Placement,
    RobotConfig,
    allowed_extents,
    candidate_arrays,
    cep_contacts,
)
from robopack.heuristics import EXTREME, GRID, candidate_points
from robopack.opack import Choice, Weights, boxpack_select, score

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
BUDGET = "budget"

DEFAULT_NODE_CAP = 10**7


@dataclass
class JointSolution:
    status: str
    placements: dict = field(default_factory=dict)  # conveyor position -> Placement
    objective: float = math.inf
    nodes: int = 0

    @property
    def found(self) -> bool:
        return bool(self.placements)


class _Budget(Exception):
    pass


def _branch_rank(window: Sequence[BoxDims]) -> list[int]:
    # decreasing volume; position breaks ties
    return sorted(range(len(window)), key=lambda i: (-window[i].grid_volume, i))


def solve_joint_exact(
    committed: Sequence[BinState],
    window: Sequence[BoxDims],
    cfg: RobotConfig,
    w: Weights = Weights(),
    mode: str = EXTREME,
    node_cap: int = DEFAULT_NODE_CAP,
) -> JointSolution:
    """Minimise the summed placement score of all window boxes jointly.

    With ``mode="grid"`` the candidate set is every stable grid corner, so the
    result is the exact grid optimum. ``mode="extreme"`` restricts each node
    to the extreme points of its current state.
    """
    if not window:
        raise ValueError("look-ahead window is empty")
    bins = sorted(committed, key=lambda b: b.index)
    rank_of = {pos: r for r, pos in enumerate(_branch_rank(window))}
    opts = [allowed_extents(b, cfg) for b in window]
    if any(not o for o in opts):
        return JointSolution(INFEASIBLE)
    min_dz = [min(e[2] for _, e in o) for o in opts]
    min_j = bins[0].index if bins else 1
    floor_term = [w.w2 * min_dz[i] + w.w3 * min_j for i in range(len(window))]

    # grid mode: a box either rests on committed boxes (so it is a root
    # candidate) or on another window box, which lifts it by that box's height
    root_min = [math.inf] * len(window)
    if mode == GRID:
        for i, box in enumerate(window):
            for b in bins:
                r = _bin_candidates(b, i, box, opts[i], cfg, w, mode, -1, -1, rank_of)
                if r:
                    root_min[i] = min(root_min[i], r[0][0])
        for i in range(len(window)):
            others = [min_dz[k] for k in range(len(window)) if k != i]
            stacked = w.w2 * ((min(others) if others else math.inf) + min_dz[i]) + w.w3 * min_j
            root_min[i] = min(root_min[i], stacked)
            if not math.isfinite(root_min[i]):
                return JointSolution(INFEASIBLE)

    best = {"obj": math.inf, "sol": None}
    nodes = 0

    def bound(rem, z_floor):
        total = 0.0
        for i in rem:
            lb = w.w2 * z_floor + floor_term[i]
            if mode == GRID:
                lb = max(lb, root_min[i])
            total += lb
        return total

    def dfs(state, rem, last_z, last_rank, cost, chosen):
        nonlocal nodes
        if not rem:
            if cfg.require_cep and not _cep_ok(state, chosen):
                return
            if cost < best["obj"]:
                best["obj"] = cost
                best["sol"] = dict(chosen)
            return
        children = []
        for i in rem:
            for b in state:
                children.extend(
                    _bin_candidates(b, i, window[i], opts[i], cfg, w, mode, last_z, last_rank, rank_of)
                )
        children.sort(key=lambda c: c[:-1])
        for sc, _, z, _, _, _, rk, (i, p) in children:
            nodes += 1
            if nodes > node_cap:
                raise _Budget
            rest = [k for k in rem if k != i]
            if cost + sc + bound(rest, z) >= best["obj"]:
                continue
            nxt = [b.add(p) if b.index == p.bin_index else b for b in state]
            chosen[i] = p
            dfs(nxt, rest, z, rk, cost + sc, chosen)
            del chosen[i]

    status = OPTIMAL
    try:
        dfs(bins, list(range(len(window))), -1, -1, 0.0, {})
    except _Budget:
        status = BUDGET
    if best["sol"] is None:
        return JointSolution(BUDGET if status == BUDGET else INFEASIBLE, nodes=nodes)
    return JointSolution(status, best["sol"], best["obj"], nodes)


def _bin_candidates(bin, i, box, opts, cfg, w, mode, last_z, last_rank, rank_of):
    pts = candidate_points(bin, mode)
    rk = rank_of[i]
    # canonical order: (z, rank) strictly increasing along a branch
    keep = (pts[:, 2] > last_z) | ((pts[:, 2] == last_z) & (rk > last_rank))
    pts = pts[keep]
    if pts.shape[0] == 0:
        return []
    xyz, ext, slot = candidate_arrays(pts, [e for _, e in opts])
    ok = kernels.feasible_mask(
        bin.boxes, bin.dims_array, xyz, ext, cfg.min_supported_vertices, False
    )
    idx = np.flatnonzero(ok)
    out = []
    for k in idx:
        x, y, z = (int(v) for v in xyz[k])
        sc = w.w1 * (x + y) + w.w2 * (z + int(ext[k, 2])) + w.w3 * bin.index
        p = Placement(box, bin.index, (x, y, z), opts[slot[k]][0])
        out.append((sc, bin.index, z, y, x, int(slot[k]), rk, (i, p)))
    out.sort(key=lambda c: c[:-1])
    return out


def _cep_ok(state, chosen) -> bool:
    by_index = {b.index: b for b in state}
    for p in chosen.values():
        b = by_index[p.bin_index]
        others = BinState(b.dims, b.index, b.serial, tuple(q for q in b.placements if q is not p))
        if cep_contacts(p, others) < 2:
            return False
    return True


@dataclass
class MPackStats:
    solves: int = 0
    shrinks: int = 0
    budget_hits: int = 0
    nodes: int = 0


def mpack_step(
    bins: Sequence[BinState],
    window: Sequence[BoxDims],
    cfg: RobotConfig,
    w: Weights = Weights(),
    mode: str = EXTREME,
    node_cap: int = DEFAULT_NODE_CAP,
    stats: Optional[MPackStats] = None,
) -> Optional[Choice]:
    """One rolling-horizon decision.

    Returns ``None`` when no box can go anywhere; the caller then closes the
    fullest bin, opens a fresh one and calls again.
    """
    stats = stats if stats is not None else MPackStats()
    cache = {}

    def solve(sub):
        key = tuple(sub)
        if key not in cache:
            sol = solve_joint_exact(bins, [window[k] for k in sub], cfg, w, mode, node_cap)
            stats.solves += 1
            stats.nodes += sol.nodes
            if sol.status == BUDGET:
                stats.budget_hits += 1
            cache[key] = sol
        return cache[key]

    def select(pairs):
        cands = [(pos, window[pos], p) for pos, p in pairs]
        return boxpack_select(bins, cands, w, cfg)

    # shrink from the far end of the conveyor until a joint layout exists
    k = len(window)
    while k >= 1:
        sub = list(range(k))
        sol = solve(sub)
        if sol.found:
            choice = select((sub[i], p) for i, p in sol.placements.items())
            if choice is not None:
                return choice
        if k == 1:
            break
        stats.shrinks += 1
        k -= 1

    pairs = []
    for pos in range(len(window)):
        sol = solve([pos])
        if sol.found:
            pairs.extend((pos, p) for p in sol.placements.values())
    return select(pairs)


def joint_objective(placements: Sequence[Placement], w: Weights) -> float:
    return sum(score(p, w) for p in placements)
