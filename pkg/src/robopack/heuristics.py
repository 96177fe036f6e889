"""First-Fit and Best-Fit over extreme-point candidates."""

from __future__ import annotations

from dataclasses import dataclass
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
    grid_points,
)

EXTREME = "extreme"
GRID = "grid"
CANDIDATE_MODES = (EXTREME, GRID)


@dataclass(frozen=True)
class CandidatePoint:
    bin_index: int
    point: tuple[int, int, int]
    provenance: str  # origin | extreme-point | full-grid


@dataclass(frozen=True)
class PlacementDecision:
    box_id: object
    placement: Placement
    policy_name: str
    score: Optional[float] = None


def candidate_points(bin: BinState, mode: str = EXTREME) -> np.ndarray:
    """(K, 3) candidate corners sorted by (z, y, x)."""
    if mode == EXTREME:
        return bin.extreme_points
    if mode == GRID:
        return grid_points(bin)
    raise ValueError(f"unknown candidate mode {mode!r}; expected one of {CANDIDATE_MODES}")


def extreme_points(bin: BinState) -> list[CandidatePoint]:
    out = []
    for p in bin.extreme_points:
        pt = tuple(int(v) for v in p)
        prov = "origin" if pt == (0, 0, 0) else "extreme-point"
        out.append(CandidatePoint(bin.index, pt, prov))
    return out


def first_in_bin(
    bin: BinState, box: BoxDims, cfg: RobotConfig, mode: str = EXTREME
) -> Optional[Placement]:
    """First feasible placement scanning points by (z, y, x), then orientations."""
    opts = allowed_extents(box, cfg)
    if not opts:
        return None
    pts = candidate_points(bin, mode)
    xyz, ext, slot = candidate_arrays(pts, [e for _, e in opts])
    i = kernels.first_feasible(
        bin.boxes, bin.dims_array, xyz, ext, cfg.min_supported_vertices, cfg.require_cep
    )
    if i < 0:
        return None
    return Placement(box, bin.index, tuple(xyz[i]), opts[slot[i]][0])


def first_fit(
    box: BoxDims, bins: Sequence[BinState], cfg: RobotConfig, mode: str = EXTREME
) -> Optional[PlacementDecision]:
    for bin in sorted(bins, key=lambda b: b.index):
        p = first_in_bin(bin, box, cfg, mode)
        if p is not None:
            return PlacementDecision(box.id, p, "FF")
    return None


def best_fit(
    box: BoxDims, bins: Sequence[BinState], cfg: RobotConfig, mode: str = EXTREME
) -> Optional[PlacementDecision]:
    best = None
    for bin in sorted(bins, key=lambda b: b.index):
        p = first_in_bin(bin, box, cfg, mode)
        if p is None:
            continue
        fr = bin.fill_rate
        if best is None or fr > best[0]:
            best = (fr, p)
    if best is None:
        return None
    return PlacementDecision(box.id, best[1], "BF", score=best[0])


def ff_rule(bins, box, cfg, mode: str = EXTREME) -> Optional[Placement]:
    d = first_fit(box, bins, cfg, mode)
    return None if d is None else d.placement


def bf_rule(bins, box, cfg, mode: str = EXTREME) -> Optional[Placement]:
    d = best_fit(box, bins, cfg, mode)
    return None if d is None else d.placement
