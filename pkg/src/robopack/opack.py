"""OPack: adapting a single-box packing rule to a look-ahead window.

Each step sorts the window, packs every box *virtually* with the rule (later
boxes see earlier virtual ones), and then commits exactly one box whose
virtual spot is stable on the real bin contents alone.

MPackLite is OPack around :func:`packrule_mpl`, the single-box minimiser of
``w1*(x+y) + w2*z_far + w3*bin_index``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Optional, Sequence

import numpy as np

from robopack import kernels
from robopack.core import (
    BinState,
    BoxDims,
    Placement,
    RobotConfig,
    allowed_extents,
    candidate_arrays,
    is_feasible,
)
from robopack.heuristics import EXTREME, bf_rule, candidate_points, ff_rule

PackRule = Callable[[Sequence[BinState], BoxDims, RobotConfig], Optional[Placement]]


@dataclass(frozen=True)
class Weights:
    w1: float = 1.0
    w2: float = 1.0
    w3: float = 100.0

    def __post_init__(self):
        if min(self.w1, self.w2, self.w3) < 0:
            raise ValueError(f"weights must be non-negative, got {self}")

    @classmethod
    def parse(cls, text: str) -> "Weights":
        parts = [float(t) for t in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"expected w1,w2,w3, got {text!r}")
        return cls(*parts)


def score(p: Placement, w: Weights) -> float:
    x, y, _ = p.corner
    return w.w1 * (x + y) + w.w2 * p.far_corner[2] + w.w3 * p.bin_index


def selection_score(p: Placement, w: Weights) -> float:
    # box choice ignores the bin-index term
    x, y, _ = p.corner
    return w.w1 * (x + y) + w.w2 * p.far_corner[2]


def sort_lookahead(boxes: Sequence[BoxDims]) -> list[int]:
    """Conveyor positions ordered by volume desc, then height desc."""
    return sorted(range(len(boxes)), key=lambda i: (-boxes[i].grid_volume, -boxes[i].h, i))


@dataclass
class VirtualState:
    bins: list[BinState]
    virtual_placements: dict = field(default_factory=dict)

    def place(self, p: Placement) -> None:
        self.bins = [b.add(p) if b.index == p.bin_index else b for b in self.bins]
        self.virtual_placements[p.box.id] = p


def best_in_bin(bin: BinState, box: BoxDims, cfg: RobotConfig, w: Weights, mode: str = EXTREME):
    """Lowest-score feasible placement in one bin as ``(sort_key, Placement)``."""
    opts = allowed_extents(box, cfg)
    if not opts:
        return None
    pts = candidate_points(bin, mode)
    if pts.shape[0] == 0:
        return None
    xyz, ext, slot = candidate_arrays(pts, [e for _, e in opts])
    sc = w.w1 * (xyz[:, 0] + xyz[:, 1]) + w.w2 * (xyz[:, 2] + ext[:, 2]) + w.w3 * bin.index
    order = np.lexsort((slot, xyz[:, 0], xyz[:, 1], xyz[:, 2], sc))
    i = kernels.first_feasible(
        bin.boxes, bin.dims_array, xyz[order], ext[order], cfg.min_supported_vertices, cfg.require_cep
    )
    if i < 0:
        return None
    k = order[i]
    x, y, z = (int(v) for v in xyz[k])
    key = (float(sc[k]), bin.index, z, y, x, int(slot[k]))
    return key, Placement(box, bin.index, (x, y, z), opts[slot[k]][0])


def packrule_mpl(
    bins: Sequence[BinState], box: BoxDims, cfg: RobotConfig, w: Weights = Weights(), mode: str = EXTREME
) -> Optional[Placement]:
    """Minimise the placement score over every open bin, candidate and orientation."""
    best = None
    for bin in bins:
        r = best_in_bin(bin, box, cfg, w, mode)
        if r is not None and (best is None or r[0] < best[0]):
            best = r
    return None if best is None else best[1]


@dataclass(frozen=True)
class Choice:
    position: int  # conveyor position in the window, 0 = nearest the arm
    box: BoxDims
    placement: Placement


def boxpack_select(
    real_bins: Sequence[BinState],
    candidates: Sequence[tuple[int, BoxDims, Placement]],
    w: Weights,
    cfg: RobotConfig,
    selection: str = "score",
    size_threshold: float = 50.0,
) -> Optional[Choice]:
    """Pick the box to commit among virtually packed candidates.

    A candidate survives only if its spot is legal against the committed bins
    by themselves (no help from other virtual boxes).
    """
    by_index = {b.index: b for b in real_bins}
    alive = []
    for pos, box, p in candidates:
        real = by_index.get(p.bin_index)
        if real is not None and is_feasible(real, p, cfg).ok:
            alive.append((pos, box, p))
    if not alive:
        return None
    if selection == "score":
        key = lambda c: (selection_score(c[2], w), c[0])
    elif selection == "size":
        def key(c):
            fr = by_index[c[2].bin_index].fill_rate
            vol = c[1].grid_volume
            return (-vol if fr < size_threshold else vol, c[0])
    else:
        raise ValueError(f"unknown selection rule {selection!r}")
    pos, box, p = min(alive, key=key)
    return Choice(pos, box, p)


def opack_step(
    rule: PackRule,
    bins: Sequence[BinState],
    window: Sequence[BoxDims],
    cfg: RobotConfig,
    w: Weights = Weights(),
    selection: str = "score",
) -> Optional[Choice]:
    """One OPack decision; ``None`` means no box found a stable spot."""
    if not window:
        raise ValueError("look-ahead window is empty")
    vstate = VirtualState(list(bins))
    found = []
    for pos in sort_lookahead(window):
        box = window[pos]
        p = rule(vstate.bins, box, cfg)
        if p is None:
            continue  # stays on the conveyor
        vstate.place(p)
        found.append((pos, box, p))
    return boxpack_select(bins, found, w, cfg, selection)


def make_rule(name: str, w: Weights = Weights(), mode: str = EXTREME) -> PackRule:
    if name == "FF":
        return partial(ff_rule, mode=mode)
    if name == "BF":
        return partial(bf_rule, mode=mode)
    if name == "MPL":
        return partial(packrule_mpl, w=w, mode=mode)
    raise ValueError(f"unknown packing rule {name!r}")
