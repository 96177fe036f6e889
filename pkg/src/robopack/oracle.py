"""Independent replay checker built on voxel label grids.

Deliberately shares no geometry code with :mod:`robopack.core`: overlap
and containment are read off a per-bin array of box labels, and a base
vertex counts as supported when a voxel diagonally below it belongs to a
box whose top face sits exactly at the vertex height.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_SIDES = "lbh"


@dataclass
class OracleReport:
    checked: int = 0
    violations: list = field(default_factory=list)  # (step, clause, message)

    @property
    def clean(self) -> bool:
        return not self.violations

    def count(self, clause: str) -> int:
        return sum(1 for v in self.violations if v[1] == clause)


class VoxelBin:
    def __init__(self, L: int, B: int, H: int):
        self.shape = (L, B, H)
        self.labels = np.full((L, B, H), -1, dtype=np.int32)

    def check_and_place(self, label, corner, ext, min_support=3):
        """Return violated clauses (placing the box anyway, clipped to the bin)."""
        x, y, z = corner
        dx, dy, dz = ext
        L, B, H = self.shape
        bad = []
        if x < 0 or y < 0 or z < 0 or x + dx > L or y + dy > B or z + dz > H:
            bad.append(("containment", f"box {corner}+{ext} outside {self.shape}"))
        xs = slice(max(x, 0), min(x + dx, L))
        ys = slice(max(y, 0), min(y + dy, B))
        zs = slice(max(z, 0), min(z + dz, H))
        region = self.labels[xs, ys, zs]
        if (region >= 0).any():
            others = sorted(set(int(v) for v in np.unique(region) if v >= 0))
            bad.append(("overlap", f"voxels shared with {others}"))
        if z > 0:
            n = sum(self._vertex_supported(vx, vy, z) for vx in (x, x + dx) for vy in (y, y + dy))
            if n < min_support:
                bad.append(("stability", f"{n} of 4 base vertices supported"))
        region[region < 0] = label
        return bad

    def _vertex_supported(self, vx, vy, z) -> bool:
        L, B, H = self.shape
        for cx in (vx - 1, vx):
            for cy in (vy - 1, vy):
                if not (0 <= cx < L and 0 <= cy < B and 1 <= z <= H):
                    continue
                below = self.labels[cx, cy, z - 1]
                if below < 0:
                    continue
                above = self.labels[cx, cy, z] if z < H else -1
                if above != below:
                    return True
        return False


def extents(sides, orientation: str):
    return tuple(sides[_SIDES.index(c)] for c in orientation)


def replay_trace(doc: dict, min_support: int | None = None) -> OracleReport:
    """Check every record of a trace document (see :mod:`robopack.sim.traces`)."""
    L, B, H = (int(v) for v in doc["bin_dims"])
    cfg = doc.get("config", {}) or {}
    if min_support is None:
        min_support = int(cfg.get("min_supported_vertices", 3))
    forbid = bool(cfg.get("forbid_largest_dim_vertical", False))
    allowed = set(cfg.get("allowed_orientations", []) or [])
    sides_of = {str(b[0]): (int(b[1]), int(b[2]), int(b[3])) for b in doc["boxes"]}
    report = OracleReport()
    bins = {}
    placed = set()
    prev_step = None
    for n, rec in enumerate(doc["records"]):
        step = rec["step"]
        if prev_step is not None and not step > prev_step:
            report.violations.append((step, "order", f"record {n}: step {step} after {prev_step}"))
        prev_step = step
        bid = str(rec["box_id"])
        if bid not in sides_of:
            report.violations.append((step, "schema", f"unknown box id {bid}"))
            continue
        if bid in placed:
            report.violations.append((step, "schema", f"box {bid} placed twice"))
        placed.add(bid)
        orient = rec["orientation"]
        if sorted(orient) != sorted(_SIDES):
            report.violations.append((step, "schema", f"bad orientation {orient!r}"))
            continue
        sides = sides_of[bid]
        ext = extents(sides, orient)
        if allowed and orient not in allowed:
            report.violations.append((step, "orientation", f"{orient} not in allowed set"))
        top = max(sides)
        if forbid and sides.count(top) == 1 and ext[2] == top:
            report.violations.append((step, "orientation", f"largest side {top} upright"))
        vb = bins.setdefault(rec["bin_serial"], VoxelBin(L, B, H))
        for clause, msg in vb.check_and_place(n, tuple(int(c) for c in rec["corner"]), ext, min_support):
            report.violations.append((step, clause, f"box {bid}: {msg}"))
        report.checked += 1
    return report


def replay_bins(bin_states, min_support: int = 3) -> OracleReport:
    """Replay committed :class:`BinState` contents in placement order."""
    report = OracleReport()
    for b in bin_states:
        L, B, H = b.shape
        vb = VoxelBin(L, B, H)
        for n, p in enumerate(b.placements):
            ext = extents(p.box.sides, p.orientation.name)
            for clause, msg in vb.check_and_place(n, p.corner, ext, min_support):
                report.violations.append((n, clause, f"bin {b.serial} box {p.box.id}: {msg}"))
            report.checked += 1
    return report
