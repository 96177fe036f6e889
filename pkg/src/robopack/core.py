"""Boxes, bins, orientations and the placement legality rules.

Everything lives on a 1 cm integer grid. ``is_feasible`` is the reference
check for a single placement; the batch kernels in :mod:`robopack.kernels`
implement the same rules for candidate sets and are tested against it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

from robopack import kernels

SIDE_NAMES = "lbh"
AXES = "xyz"


@dataclass(frozen=True)
class BoxDims:
    """Integer-cm cuboid. ``true_volume`` keeps the pre-ceiling volume, if any."""

    l: int
    b: int
    h: int
    id: object = None
    true_volume: Optional[float] = None

    def __post_init__(self):
        for name in ("l", "b", "h"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError(f"box {self.id!r}: side {name}={v!r} must be a positive integer")
            object.__setattr__(self, name, int(v))
        if self.true_volume is not None:
            tv = float(self.true_volume)
            if not (tv > 0) or tv > self.grid_volume * (1 + 1e-12):
                raise ValueError(
                    f"box {self.id!r}: true_volume {tv} must lie in (0, {self.grid_volume}]"
                )
            object.__setattr__(self, "true_volume", tv)

    @property
    def sides(self) -> tuple[int, int, int]:
        return (self.l, self.b, self.h)

    @property
    def grid_volume(self) -> int:
        return self.l * self.b * self.h

    @property
    def volume(self) -> float:
        return float(self.grid_volume) if self.true_volume is None else self.true_volume

    @classmethod
    def from_real(cls, l: float, b: float, h: float, id=None) -> "BoxDims":
        """Ceil real dimensions onto the grid and remember the real volume."""
        sides = [int(math.ceil(round(float(v), 9))) for v in (l, b, h)]
        true_volume = float(l) * float(b) * float(h)
        exact = all(float(v) == s for v, s in zip((l, b, h), sides))
        return cls(*sides, id=id, true_volume=None if exact else true_volume)


@dataclass(frozen=True, order=True)
class Orientation:
    """``perm[axis]`` is the box side (0=l, 1=b, 2=h) laid along bin axis x/y/z."""

    perm: tuple[int, int, int]

    def __post_init__(self):
        if sorted(self.perm) != [0, 1, 2]:
            raise ValueError(f"not a permutation of the box sides: {self.perm!r}")

    @property
    def name(self) -> str:
        return "".join(SIDE_NAMES[s] for s in self.perm)

    @classmethod
    def from_name(cls, name: str) -> "Orientation":
        try:
            return cls(tuple(SIDE_NAMES.index(c) for c in name))
        except ValueError:
            raise ValueError(f"bad orientation name {name!r}") from None

    @property
    def index(self) -> int:
        return ORIENTATIONS.index(self)

    def __str__(self):
        return self.name


ORIENTATIONS: tuple[Orientation, ...] = tuple(Orientation(p) for p in itertools.permutations(range(3)))
IDENTITY = ORIENTATIONS[0]


def orient(dims: BoxDims, o: Orientation) -> tuple[int, int, int]:
    s = dims.sides
    return (s[o.perm[0]], s[o.perm[1]], s[o.perm[2]])


@dataclass(frozen=True)
class RobotConfig:
    allowed_orientations: frozenset = frozenset(ORIENTATIONS)
    forbid_largest_dim_vertical: bool = False
    min_supported_vertices: int = 3
    require_cep: bool = False

    def __post_init__(self):
        object.__setattr__(self, "allowed_orientations", frozenset(self.allowed_orientations))
        if not self.allowed_orientations:
            raise ValueError("allowed_orientations must not be empty")
        if not 1 <= self.min_supported_vertices <= 4:
            raise ValueError("min_supported_vertices must be in 1..4")


def orientation_allowed(dims: BoxDims, o: Orientation, cfg: RobotConfig) -> bool:
    if o not in cfg.allowed_orientations:
        return False
    if cfg.forbid_largest_dim_vertical:
        s = dims.sides
        top = max(s)
        # ties for the largest side are allowed upright
        if s.count(top) == 1 and s[o.perm[2]] == top:
            return False
    return True


def allowed_extents(dims: BoxDims, cfg: RobotConfig) -> list[tuple[Orientation, tuple[int, int, int]]]:
    """Allowed orientations in canonical order, dropping repeats of the same extents."""
    seen = set()
    out = []
    for o in ORIENTATIONS:
        if not orientation_allowed(dims, o, cfg):
            continue
        e = orient(dims, o)
        if e not in seen:
            seen.add(e)
            out.append((o, e))
    return out


@dataclass(frozen=True)
class Placement:
    box: BoxDims
    bin_index: int
    corner: tuple[int, int, int]
    orientation: Orientation = IDENTITY

    def __post_init__(self):
        object.__setattr__(self, "corner", tuple(int(c) for c in self.corner))

    @property
    def extents(self) -> tuple[int, int, int]:
        return orient(self.box, self.orientation)

    @property
    def far_corner(self) -> tuple[int, int, int]:
        return tuple(c + e for c, e in zip(self.corner, self.extents))

    @property
    def row(self) -> tuple[int, ...]:
        return self.corner + self.far_corner

    def key(self) -> tuple:
        """Geometry identity, independent of the current open-bin index."""
        return (self.box.id, self.corner, self.orientation.perm)


def overlaps(a: Placement, b: Placement) -> bool:
    a0, a1, b0, b1 = a.corner, a.far_corner, b.corner, b.far_corner
    return all(b0[k] < a1[k] and a0[k] < b1[k] for k in range(3))


@dataclass(frozen=True)
class BinState:
    """One open bin. Immutable: :meth:`add` returns a new state."""

    dims: BoxDims
    index: int = 1
    serial: int = 0
    placements: tuple[Placement, ...] = ()

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.dims.sides

    @property
    def volume(self) -> int:
        return self.dims.grid_volume

    @cached_property
    def boxes(self) -> np.ndarray:
        arr = np.array([p.row for p in self.placements], dtype=np.int64).reshape(-1, 6)
        arr.setflags(write=False)
        return arr

    @cached_property
    def dims_array(self) -> np.ndarray:
        return np.array(self.shape, dtype=np.int64)

    @cached_property
    def packed_volume_grid(self) -> int:
        return sum(p.box.grid_volume for p in self.placements)

    @cached_property
    def packed_volume_true(self) -> float:
        return float(sum(p.box.volume for p in self.placements))

    @property
    def fill_rate(self) -> float:
        return 100.0 * self.packed_volume_true / self.volume

    @cached_property
    def height_map(self) -> np.ndarray:
        L, B, _ = self.shape
        hm = np.zeros((L, B), dtype=np.int64)
        for x0, y0, _, x1, y1, z1 in self.boxes:
            np.maximum(hm[x0:x1, y0:y1], z1, out=hm[x0:x1, y0:y1])
        hm.setflags(write=False)
        return hm

    @cached_property
    def tops(self) -> np.ndarray:
        """Distinct top-face heights below the ceiling, plus the floor."""
        return np.unique(np.concatenate([[0], self.boxes[:, 5]]))

    @cached_property
    def extreme_points(self) -> np.ndarray:
        pts = kernels.unique_points(kernels.extreme_points(self.boxes, self.dims_array))
        pts.setflags(write=False)
        return pts

    def add(self, p: Placement) -> "BinState":
        if p.bin_index != self.index:
            p = replace(p, bin_index=self.index)
        new = BinState(self.dims, self.index, self.serial, self.placements + (p,))
        arr = np.vstack([self.boxes, np.array(p.row, dtype=np.int64)[None, :]])
        arr.setflags(write=False)
        new.__dict__["boxes"] = arr
        return new

    def reindexed(self, index: int) -> "BinState":
        if index == self.index:
            return self
        ps = tuple(replace(p, bin_index=index) for p in self.placements)
        new = BinState(self.dims, index, self.serial, ps)
        for name in ("boxes", "extreme_points", "height_map", "tops"):
            if name in self.__dict__:
                new.__dict__[name] = self.__dict__[name]
        return new

    def digest(self) -> tuple:
        return (self.serial, tuple(p.key() for p in self.placements))


def support_count(p: Placement, bin: BinState) -> int:
    x0, y0, z0 = p.corner
    x1, y1, _ = p.far_corner
    if z0 == 0:
        return 4
    tops = [q for q in bin.placements if q.far_corner[2] == z0]
    count = 0
    for vx, vy in ((x0, y0), (x1, y0), (x0, y1), (x1, y1)):
        for q in tops:
            (qx0, qy0, _), (qx1, qy1, _) = q.corner, q.far_corner
            if qx0 <= vx <= qx1 and qy0 <= vy <= qy1:
                count += 1
                break
    return count


def cep_contacts(p: Placement, bin: BinState) -> int:
    """Lateral contact directions (of -x, +x, -y, +y) touching a wall or a box face."""
    lo, hi = p.corner, p.far_corner
    L, B, _ = bin.shape
    hit = {"x-": lo[0] == 0, "x+": hi[0] == L, "y-": lo[1] == 0, "y+": hi[1] == B}

    def spans(q, axis):
        return q.corner[axis] < hi[axis] and lo[axis] < q.far_corner[axis]

    for q in bin.placements:
        if not spans(q, 2):
            continue
        if spans(q, 1):
            hit["x-"] |= q.far_corner[0] == lo[0]
            hit["x+"] |= q.corner[0] == hi[0]
        if spans(q, 0):
            hit["y-"] |= q.far_corner[1] == lo[1]
            hit["y+"] |= q.corner[1] == hi[1]
    return sum(hit.values())


@dataclass(frozen=True)
class Violation:
    clause: str  # containment | overlap | orientation | stability | cep
    detail: str = ""

    def __str__(self):
        return f"{self.clause}: {self.detail}" if self.detail else self.clause


@dataclass(frozen=True)
class FeasibilityVerdict:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def clauses(self) -> set[str]:
        return {v.clause for v in self.violations}

    def __bool__(self):
        return self.ok


def is_feasible(bin: BinState, p: Placement, cfg: RobotConfig) -> FeasibilityVerdict:
    out = []
    lo, hi = p.corner, p.far_corner
    if min(lo) < 0 or any(h > d for h, d in zip(hi, bin.shape)):
        out.append(Violation("containment", f"{lo}..{hi} outside {bin.shape}"))
    clash = [q.box.id for q in bin.placements if overlaps(p, q)]
    if clash:
        out.append(Violation("overlap", f"intersects {clash}"))
    if not orientation_allowed(p.box, p.orientation, cfg):
        out.append(Violation("orientation", f"{p.orientation.name} not allowed for {p.box.sides}"))
    sup = support_count(p, bin)
    if sup < cfg.min_supported_vertices:
        out.append(Violation("stability", f"{sup} < {cfg.min_supported_vertices} supported vertices"))
    if cfg.require_cep:
        c = cep_contacts(p, bin)
        if c < 2:
            out.append(Violation("cep", f"{c} < 2 lateral contacts"))
    return FeasibilityVerdict(tuple(out))


def empty_bins(dims: BoxDims, n: int, first_serial: int = 0) -> list[BinState]:
    return [BinState(dims, index=j + 1, serial=first_serial + j) for j in range(n)]


def packable(box: BoxDims, bin_dims: BoxDims) -> bool:
    return max(box.sides) <= min(bin_dims.sides)


def candidate_arrays(
    points: np.ndarray, exts: Sequence[tuple[int, int, int]]
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cross product of points with orientation extents, point-major order.

    Returns ``(xyz, ext, orient_slot)`` where ``orient_slot`` indexes ``exts``.
    """
    k = len(exts)
    n = points.shape[0]
    xyz = np.repeat(points, k, axis=0)
    ext = np.tile(np.asarray(exts, dtype=np.int64).reshape(k, 3), (n, 1))
    slot = np.tile(np.arange(k), n)
    return xyz, ext, slot


def grid_points(bin: BinState) -> np.ndarray:
    """Every corner a stable box could use: all (x, y) over the floor and top faces."""
    L, B, H = bin.shape
    zs = bin.tops[bin.tops < H]
    xs, ys = np.arange(L), np.arange(B)
    g = np.stack(np.meshgrid(xs, ys, zs, indexing="ij"), axis=-1).reshape(-1, 3).astype(np.int64)
    order = np.lexsort((g[:, 0], g[:, 1], g[:, 2]))
    return g[order]


def total_grid_volume(boxes: Iterable[BoxDims]) -> int:
    return sum(b.grid_volume for b in boxes)
