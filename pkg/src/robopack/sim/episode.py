"""Conveyor and bin-manager simulation of one packing episode."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from robopack.core import BinState, BoxDims, packable
from robopack.policies import Policy, make_policy
from robopack.sim.data import bin_dims_for


class ProtocolError(RuntimeError):
    """A policy failed to place a box although an empty bin was open."""


def fill_rate(bin: BinState) -> float:
    return bin.fill_rate


@dataclass
class LookAhead:
    """The boxes visible on the conveyor; position 0 is nearest the arm."""

    capacity: int
    pending: list = field(default_factory=list)

    def __post_init__(self):
        if not 1 <= self.capacity <= 6:
            raise ValueError(f"look-ahead must be in 1..6, got {self.capacity}")

    @property
    def window(self) -> list:
        return self.pending[: self.capacity]

    def pick(self, position: int) -> BoxDims:
        if not 0 <= position < min(self.capacity, len(self.pending)):
            raise IndexError(f"position {position} outside the window")
        return self.pending.pop(position)

    def __len__(self):
        return len(self.pending)


class BinManager:
    """Keeps at most ``n_open`` bins; closes the fullest before opening a new one."""

    def __init__(self, bin_dims: BoxDims, n_open: int = 3):
        if n_open < 1:
            raise ValueError("need at least one open bin")
        self.bin_dims = bin_dims
        self.n_open = n_open
        self.next_serial = 0
        self.open: list[BinState] = []
        self.closed: list[tuple[BinState, float]] = []
        for _ in range(n_open):
            self._open_new()

    def _open_new(self) -> None:
        if len(self.open) >= self.n_open:
            raise RuntimeError("bin capacity reached; close a bin first")
        self.open.append(BinState(self.bin_dims, index=len(self.open) + 1, serial=self.next_serial))
        self.next_serial += 1

    def commit(self, placement) -> BinState:
        j = placement.bin_index - 1
        self.open[j] = self.open[j].add(placement)
        return self.open[j]

    def has_empty(self) -> bool:
        return any(not b.placements for b in self.open)

    def close_fullest(self) -> BinState:
        # ties go to the lower index
        j = max(range(len(self.open)), key=lambda k: (self.open[k].fill_rate, -k))
        gone = self.open.pop(j)
        self.closed.append((gone, gone.fill_rate))
        self.open = [b.reindexed(k + 1) for k, b in enumerate(self.open)]
        self._open_new()
        return gone

    def indices_ok(self) -> bool:
        return [b.index for b in self.open] == list(range(1, len(self.open) + 1))


@dataclass
class EpisodeMetrics:
    closed_fill_rates: list
    mean_fill_rate: float
    time_per_box: list
    boxes_packed: int
    bins_closed: int
    trace: list
    policy: str = ""
    lookahead: int = 1
    seed: int = 0
    closed_bins: list = field(default_factory=list)
    open_bins: list = field(default_factory=list)
    budget_hits: int = 0

    @property
    def mean_time_per_box(self) -> float:
        return float(np.mean(self.time_per_box)) if self.time_per_box else 0.0

    @property
    def all_bins(self) -> list:
        return list(self.closed_bins) + list(self.open_bins)


def shuffled(boxes: Sequence[BoxDims], seed: int) -> list:
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(boxes))
    return [boxes[i] for i in order]


def run_episode(
    boxes: Sequence[BoxDims],
    policy,
    bin_dims=(80, 45, 45),
    lookahead: int = 1,
    seed: int = 0,
    n_open: int = 3,
    count_open_at_end: bool = False,
    timing: bool = True,
    shuffle: bool = True,
    on_step=None,
) -> EpisodeMetrics:
    """Stream ``boxes`` (shuffled by ``seed``) past ``policy`` until all are packed.

    ``on_step(step, open_bins, window)`` is called once per step before the
    policy runs (used for MILP export).
    """
    if not boxes:
        raise ValueError("empty collection")
    if isinstance(policy, str):
        policy = make_policy(policy)
    bd = bin_dims_for(bin_dims)
    for b in boxes:
        if not packable(b, bd):
            raise ValueError(f"box {b.id!r} {b.sides} does not fit bin {bd.sides}")
    conveyor = LookAhead(lookahead, shuffled(boxes, seed) if shuffle else list(boxes))
    manager = BinManager(bd, n_open)
    trace, times = [], []
    step = 0
    stats = getattr(policy, "stats", None)
    hits0 = getattr(stats, "budget_hits", 0)
    while len(conveyor):
        window = conveyor.window
        if on_step is not None:
            on_step(step, list(manager.open), list(window))
        spent = 0.0
        while True:
            t0 = time.perf_counter()
            choice = policy(manager.open, window)
            spent += time.perf_counter() - t0
            if choice is not None:
                break
            if manager.has_empty():
                raise ProtocolError(
                    f"step {step}: policy {getattr(policy, 'name', policy)} placed none of "
                    f"{[b.id for b in window]} although an empty bin is open"
                )
            manager.close_fullest()
        box = conveyor.pick(choice.position)
        target = manager.commit(choice.placement)
        p = choice.placement
        times.append(spent if timing else 0.0)
        trace.append({
            "step": step,
            "box_id": box.id,
            "bin_serial": target.serial,
            "corner": list(p.corner),
            "orientation": p.orientation.name,
            "closed_bins_so_far": len(manager.closed),
            "policy_time_ms": round(spent * 1000.0, 3) if timing else 0.0,
        })
        step += 1

    rates = [fr for _, fr in manager.closed]
    if count_open_at_end:
        rates += [b.fill_rate for b in manager.open if b.placements]
    return EpisodeMetrics(
        closed_fill_rates=rates,
        mean_fill_rate=float(np.mean(rates)) if rates else math.nan,
        time_per_box=times,
        boxes_packed=step,
        bins_closed=len(rates),
        trace=trace,
        policy=getattr(policy, "name", str(policy)),
        lookahead=lookahead,
        seed=seed,
        closed_bins=[b for b, _ in manager.closed],
        open_bins=list(manager.open),
        budget_hits=getattr(stats, "budget_hits", 0) - hits0,
    )
