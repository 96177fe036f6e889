"""Box collections: synthetic guillotine tilings, industrial-style samples, CSV I/O."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from robopack.core import BoxDims

BIN_TYPES = {
    "SYN": (80, 45, 45),
    "LDC": (120, 80, 80),
    "RC": (120, 70, 160),
    "PAL": (220, 120, 80),
    "EQ": (80, 80, 80),
}

# synthetic side range and the chance a piece that already fits stops being cut
SYN_MIN_SIDE = 8
SYN_MAX_SIDE = 30
SYN_STOP_PROB = 0.5


class CollectionFormatError(ValueError):
    pass


def bin_dims_for(name_or_dims) -> BoxDims:
    """``"LDC"``/``"SYN"``/... or ``"80x45x45"`` or a tuple -> bin ``BoxDims``."""
    if isinstance(name_or_dims, BoxDims):
        return name_or_dims
    if isinstance(name_or_dims, str):
        key = name_or_dims.strip().upper()
        if key in BIN_TYPES:
            return BoxDims(*BIN_TYPES[key], id=key)
        try:
            parts = [int(p) for p in key.replace("*", "X").split("X")]
        except ValueError:
            raise ValueError(f"bad bin size {name_or_dims!r}; use LxBxH or one of {sorted(BIN_TYPES)}") from None
        if len(parts) != 3:
            raise ValueError(f"bad bin size {name_or_dims!r}; use LxBxH")
        return BoxDims(*parts, id="x".join(map(str, parts)))
    return BoxDims(*name_or_dims, id="x".join(map(str, name_or_dims)))


def _splittable(s: int, lo: int, hi: int) -> bool:
    """Can length ``s`` be cut into integer pieces all within [lo, hi]?"""
    return math.ceil(s / hi) <= s // lo


@dataclass
class SyntheticCollection:
    boxes: list
    certificate: list  # (bin_no, box_id, (x, y, z)) with identity orientation
    bin_dims: BoxDims

    def to_json(self) -> dict:
        return {
            "bin_dims": list(self.bin_dims.sides),
            "n_bins": 1 + max((c[0] for c in self.certificate), default=-1),
            "placements": [[b, i, *corner] for b, i, corner in self.certificate],
        }


def gen_synthetic(
    bin_dims=(80, 45, 45),
    n_bins: int = 10,
    min_side: int = SYN_MIN_SIDE,
    max_side: int = SYN_MAX_SIDE,
    seed: int = 0,
    stop_prob: float = SYN_STOP_PROB,
) -> SyntheticCollection:
    """Guillotine-cut ``n_bins`` full bins into boxes with sides in [min_side, max_side].

    The pieces tile each bin exactly, so the returned certificate packs the
    collection at 100 %.
    """
    bd = bin_dims_for(bin_dims)
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    if min_side < 1:
        raise ValueError("min_side must be >= 1")
    if max_side < min_side:
        raise ValueError(f"max_side {max_side} < min_side {min_side}")
    if max_side > min(bd.sides):
        raise ValueError(f"max_side {max_side} exceeds the smallest bin side {min(bd.sides)}")
    for s in bd.sides:
        if not _splittable(s, min_side, max_side):
            raise ValueError(
                f"bin side {s} cannot be cut into integer pieces within [{min_side}, {max_side}]"
            )
    rng = np.random.default_rng(seed)
    boxes, cert = [], []
    for k in range(n_bins):
        stack = [((0, 0, 0), bd.sides)]
        while stack:
            origin, size = stack.pop()
            fits = max(size) <= max_side
            cuts = []
            for axis, s in enumerate(size):
                pos = [c for c in range(min_side, s - min_side + 1)
                       if _splittable(c, min_side, max_side) and _splittable(s - c, min_side, max_side)]
                if pos:
                    cuts.append((axis, pos))
            if fits and (not cuts or rng.random() < stop_prob):
                box = BoxDims(*size, id=len(boxes))
                boxes.append(box)
                cert.append((k, box.id, origin))
                continue
            if not fits:
                # an oversize side must be cut
                cuts = [(a, p) for a, p in cuts if size[a] > max_side]
            weights = np.array([size[a] for a, _ in cuts], dtype=float)
            axis, pos = cuts[rng.choice(len(cuts), p=weights / weights.sum())]
            c = int(pos[rng.integers(len(pos))])
            lo_size = list(size)
            lo_size[axis] = c
            hi_size = list(size)
            hi_size[axis] = size[axis] - c
            hi_origin = list(origin)
            hi_origin[axis] += c
            stack.append((tuple(hi_origin), tuple(hi_size)))
            stack.append((origin, tuple(lo_size)))
    return SyntheticCollection(boxes, cert, bd)


def gen_industrial_like(
    bin_type: str = "LDC",
    target_bins: float = 4,
    seed: int = 0,
    low: float = 10.0,
    high: float = 60.0,
) -> list:
    """Log-uniform real sides (0.1 cm) until the true volume reaches ``target_bins`` bins."""
    bd = bin_dims_for(bin_type)
    if high > min(bd.sides):
        raise ValueError(f"side bound {high} exceeds the smallest bin side {min(bd.sides)}")
    if not 0 < low <= high:
        raise ValueError("need 0 < low <= high")
    rng = np.random.default_rng(seed)
    target = target_bins * bd.grid_volume
    boxes, total = [], 0.0
    while total < target:
        sides = np.round(np.exp(rng.uniform(np.log(low), np.log(high), size=3)), 1)
        sides = np.clip(sides, low, high)
        box = BoxDims.from_real(*sides, id=len(boxes))
        boxes.append(box)
        total += box.volume
    return boxes


def _fmt(v) -> str:
    return repr(float(v)) if not float(v).is_integer() else str(int(v))


def save_collection(boxes, path) -> None:
    with_tv = any(b.true_volume is not None for b in boxes)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "l", "b", "h"] + (["true_volume"] if with_tv else []))
        for b in boxes:
            row = [b.id, b.l, b.b, b.h]
            if with_tv:
                row.append("" if b.true_volume is None else repr(b.true_volume))
            w.writerow(row)


def _parse_id(text: str):
    try:
        return int(text)
    except ValueError:
        return text


def load_collection(path) -> list:
    boxes = []
    with open(path, newline="") as fh:
        rows = csv.reader(fh)
        header = next(rows, None)
        if header is None:
            raise CollectionFormatError(f"{path}: empty file")
        header = [h.strip() for h in header]
        if header[:4] != ["id", "l", "b", "h"] or header[4:] not in ([], ["true_volume"]):
            raise CollectionFormatError(f"{path}: line 1: header must be id,l,b,h[,true_volume]")
        seen = set()
        for lineno, row in enumerate(rows, start=2):
            if not row or not "".join(row).strip():
                continue
            if len(row) not in (4, len(header)):
                raise CollectionFormatError(f"{path}: line {lineno}: expected {len(header)} fields")
            try:
                bid = _parse_id(row[0].strip())
                sides = [float(v) for v in row[1:4]]
                if min(sides) <= 0 or not all(math.isfinite(s) for s in sides):
                    raise ValueError(f"dimensions must be positive, got {row[1:4]}")
                tv = row[4].strip() if len(row) > 4 else ""
                if tv:
                    grid = [int(math.ceil(round(s, 9))) for s in sides]
                    box = BoxDims(*grid, id=bid, true_volume=float(tv))
                else:
                    box = BoxDims.from_real(*sides, id=bid)
            except ValueError as exc:
                raise CollectionFormatError(f"{path}: line {lineno}: {exc}") from None
            if bid in seen:
                raise CollectionFormatError(f"{path}: line {lineno}: duplicate id {bid!r}")
            seen.add(bid)
            boxes.append(box)
    if not boxes:
        raise CollectionFormatError(f"{path}: no boxes")
    return boxes


def save_certificate(col: SyntheticCollection, path) -> None:
    with open(path, "w") as fh:
        json.dump(col.to_json(), fh, indent=1)
        fh.write("\n")


def collection_files(directory) -> list:
    names = sorted(n for n in os.listdir(directory) if n.endswith(".csv"))
    if not names:
        raise FileNotFoundError(f"no collection .csv files in {directory}")
    return [os.path.join(directory, n) for n in names]
