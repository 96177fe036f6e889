"""Hot geometry kernels over integer box arrays.

Every kernel exists twice: a numba ``@njit`` loop version and a pure numpy
broadcast version. The module-level names bind to one of them at import
time. Set ``ROBOPACK_JIT=0`` to force the numpy path (or if numba is not
importable). Both paths are kept importable as ``jit_kernels`` and
``numpy_kernels`` so tests and the benchmark can compare them.

Array conventions
-----------------
``boxes``  int64 (N, 6): ``x, y, z, x_far, y_far, z_far`` of placed boxes.
``xyz``    int64 (M, 3): candidate front-left-bottom corners.
``ext``    int64 (M, 3): candidate oriented extents.
``dims``   int64 (3,):   bin ``L, B, H``.
"""

from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None
    HAS_NUMBA = False

USE_JIT = HAS_NUMBA and os.environ.get("ROBOPACK_JIT", "1").strip().lower() not in ("0", "false", "off", "no")


# ---------------------------------------------------------------------------
# numpy path
# ---------------------------------------------------------------------------


def _np_support_counts(boxes, xyz, ext):
    m = xyz.shape[0]
    counts = np.full(m, 4, dtype=np.int64)
    lifted = xyz[:, 2] > 0
    if not lifted.any():
        return counts
    if boxes.shape[0] == 0:
        counts[lifted] = 0
        return counts
    x0, y0, z0 = xyz[:, 0], xyz[:, 1], xyz[:, 2]
    x1, y1 = x0 + ext[:, 0], y0 + ext[:, 1]
    vx = np.stack([x0, x1, x0, x1], axis=1)[:, :, None]
    vy = np.stack([y0, y0, y1, y1], axis=1)[:, :, None]
    bx0, by0, bx1, by1, btop = (boxes[:, k][None, None, :] for k in (0, 1, 3, 4, 5))
    on_top = (
        (btop == z0[:, None, None])
        & (bx0 <= vx) & (vx <= bx1)
        & (by0 <= vy) & (vy <= by1)
    )
    supported = on_top.any(axis=2).sum(axis=1)
    counts[lifted] = supported[lifted]
    return counts


def _np_cep_counts(boxes, dims, xyz, ext):
    lo = xyz
    hi = xyz + ext
    walls = np.stack(
        [lo[:, 0] == 0, hi[:, 0] == dims[0], lo[:, 1] == 0, hi[:, 1] == dims[1]], axis=1
    )
    if boxes.shape[0] > 0:
        blo = boxes[None, :, 0:3]
        bhi = boxes[None, :, 3:6]
        clo = lo[:, None, :]
        chi = hi[:, None, :]
        open_ov = (blo < chi) & (clo < bhi)  # (M, N, 3) per-axis interior overlap
        yz = open_ov[:, :, 1] & open_ov[:, :, 2]
        xz = open_ov[:, :, 0] & open_ov[:, :, 2]
        walls[:, 0] |= ((bhi[:, :, 0] == clo[:, :, 0]) & yz).any(axis=1)
        walls[:, 1] |= ((blo[:, :, 0] == chi[:, :, 0]) & yz).any(axis=1)
        walls[:, 2] |= ((bhi[:, :, 1] == clo[:, :, 1]) & xz).any(axis=1)
        walls[:, 3] |= ((blo[:, :, 1] == chi[:, :, 1]) & xz).any(axis=1)
    return walls.sum(axis=1).astype(np.int64)


def _np_feasible_mask(boxes, dims, xyz, ext, min_support, need_cep):
    hi = xyz + ext
    ok = (xyz >= 0).all(axis=1) & (hi <= dims[None, :]).all(axis=1)
    if boxes.shape[0] > 0 and ok.any():
        ov = (
            (boxes[None, :, 0:3] < hi[:, None, :]) & (xyz[:, None, :] < boxes[None, :, 3:6])
        ).all(axis=2)
        ok &= ~ov.any(axis=1)
    if ok.any():
        idx = np.flatnonzero(ok)
        sup = _np_support_counts(boxes, xyz[idx], ext[idx])
        good = sup >= min_support
        if need_cep:
            good &= _np_cep_counts(boxes, dims, xyz[idx], ext[idx]) >= 2
        ok[idx] = good
    return ok


def _np_first_feasible(boxes, dims, xyz, ext, min_support, need_cep):
    # chunked so an early hit skips most of the work
    m = xyz.shape[0]
    step = 512
    for start in range(0, m, step):
        mask = _np_feasible_mask(
            boxes, dims, xyz[start:start + step], ext[start:start + step], min_support, need_cep
        )
        hits = np.flatnonzero(mask)
        if hits.size:
            return int(start + hits[0])
    return -1


def _np_extreme_points(boxes, dims):
    n = boxes.shape[0]
    origin = np.zeros((1, 3), dtype=np.int64)
    if n == 0:
        return origin
    x0, y0, z0, x1, y1, z1 = (boxes[:, k] for k in range(6))
    # three far corners per box, and the two axes each corner is projected along
    corners = [
        (np.stack([x1, y0, z0], axis=1), (1, 2)),
        (np.stack([x0, y1, z0], axis=1), (0, 2)),
        (np.stack([x0, y0, z1], axis=1), (0, 1)),
    ]
    per_box = []
    for pts, axes in corners:
        per_box.append(pts)
        for a in axes:
            per_box.append(_np_project(boxes, pts, a))
    # box-major order, the same as the jit path
    allp = np.concatenate([origin, np.stack(per_box, axis=1).reshape(-1, 3)], axis=0)
    inside = (allp[:, 0] < dims[0]) & (allp[:, 1] < dims[1]) & (allp[:, 2] < dims[2])
    return allp[inside]


def _np_project(boxes, pts, axis):
    """Slide each point toward the wall along -axis until it meets a box face."""
    b, c = [k for k in range(3) if k != axis]
    blo = boxes[None, :, :3]
    bhi = boxes[None, :, 3:]
    p = pts[:, None, :]
    hit = (
        (bhi[:, :, axis] <= p[:, :, axis])
        & (blo[:, :, b] <= p[:, :, b]) & (p[:, :, b] < bhi[:, :, b])
        & (blo[:, :, c] <= p[:, :, c]) & (p[:, :, c] < bhi[:, :, c])
    )
    stop = np.where(hit, bhi[:, :, axis], 0).max(axis=1)
    res = pts.copy()
    res[:, axis] = stop
    return res


numpy_kernels = SimpleNamespace(
    name="numpy",
    support_counts=_np_support_counts,
    cep_counts=_np_cep_counts,
    feasible_mask=_np_feasible_mask,
    first_feasible=_np_first_feasible,
    extreme_points=_np_extreme_points,
)


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------

if HAS_NUMBA:
    njit = numba.njit(cache=True, nogil=True)

    @njit
    def _support_one(boxes, x0, y0, z0, x1, y1):
        if z0 == 0:
            return 4
        cnt = 0
        for v in range(4):
            vx = x0 if (v & 1) == 0 else x1
            vy = y0 if (v & 2) == 0 else y1
            for n in range(boxes.shape[0]):
                if (
                    boxes[n, 5] == z0
                    and boxes[n, 0] <= vx and vx <= boxes[n, 3]
                    and boxes[n, 1] <= vy and vy <= boxes[n, 4]
                ):
                    cnt += 1
                    break
        return cnt

    @njit
    def _cep_one(boxes, dims, x0, y0, z0, x1, y1, z1):
        xn = x0 == 0
        xp = x1 == dims[0]
        yn = y0 == 0
        yp = y1 == dims[1]
        for n in range(boxes.shape[0]):
            if xn and xp and yn and yp:
                break
            zo = boxes[n, 2] < z1 and z0 < boxes[n, 5]
            if not zo:
                continue
            yo = boxes[n, 1] < y1 and y0 < boxes[n, 4]
            xo = boxes[n, 0] < x1 and x0 < boxes[n, 3]
            if yo:
                if boxes[n, 3] == x0:
                    xn = True
                if boxes[n, 0] == x1:
                    xp = True
            if xo:
                if boxes[n, 4] == y0:
                    yn = True
                if boxes[n, 1] == y1:
                    yp = True
        return int(xn) + int(xp) + int(yn) + int(yp)

    @njit
    def _feasible_one(boxes, dims, x0, y0, z0, dx, dy, dz, min_support, need_cep):
        x1 = x0 + dx
        y1 = y0 + dy
        z1 = z0 + dz
        if x0 < 0 or y0 < 0 or z0 < 0 or x1 > dims[0] or y1 > dims[1] or z1 > dims[2]:
            return False
        for n in range(boxes.shape[0]):
            if (
                boxes[n, 0] < x1 and x0 < boxes[n, 3]
                and boxes[n, 1] < y1 and y0 < boxes[n, 4]
                and boxes[n, 2] < z1 and z0 < boxes[n, 5]
            ):
                return False
        if _support_one(boxes, x0, y0, z0, x1, y1) < min_support:
            return False
        if need_cep and _cep_one(boxes, dims, x0, y0, z0, x1, y1, z1) < 2:
            return False
        return True

    @njit
    def _jit_feasible_mask(boxes, dims, xyz, ext, min_support, need_cep):
        m = xyz.shape[0]
        out = np.zeros(m, dtype=np.bool_)
        for i in range(m):
            out[i] = _feasible_one(
                boxes, dims, xyz[i, 0], xyz[i, 1], xyz[i, 2],
                ext[i, 0], ext[i, 1], ext[i, 2], min_support, need_cep,
            )
        return out

    @njit
    def _jit_first_feasible(boxes, dims, xyz, ext, min_support, need_cep):
        for i in range(xyz.shape[0]):
            if _feasible_one(
                boxes, dims, xyz[i, 0], xyz[i, 1], xyz[i, 2],
                ext[i, 0], ext[i, 1], ext[i, 2], min_support, need_cep,
            ):
                return i
        return -1

    @njit
    def _jit_support_counts(boxes, xyz, ext):
        m = xyz.shape[0]
        out = np.empty(m, dtype=np.int64)
        for i in range(m):
            out[i] = _support_one(
                boxes, xyz[i, 0], xyz[i, 1], xyz[i, 2], xyz[i, 0] + ext[i, 0], xyz[i, 1] + ext[i, 1]
            )
        return out

    @njit
    def _jit_cep_counts(boxes, dims, xyz, ext):
        m = xyz.shape[0]
        out = np.empty(m, dtype=np.int64)
        for i in range(m):
            out[i] = _cep_one(
                boxes, dims, xyz[i, 0], xyz[i, 1], xyz[i, 2],
                xyz[i, 0] + ext[i, 0], xyz[i, 1] + ext[i, 1], xyz[i, 2] + ext[i, 2],
            )
        return out

    @njit
    def _jit_project(boxes, px, py, pz, axis):
        p = (px, py, pz)
        b = 1 if axis == 0 else 0
        c = 1 if axis == 2 else 2
        best = 0
        for n in range(boxes.shape[0]):
            top = boxes[n, 3 + axis]
            if (
                top <= p[axis] and top > best
                and boxes[n, b] <= p[b] and p[b] < boxes[n, 3 + b]
                and boxes[n, c] <= p[c] and p[c] < boxes[n, 3 + c]
            ):
                best = top
        return best

    @njit
    def _jit_extreme_points(boxes, dims):
        n = boxes.shape[0]
        out = np.empty((1 + 9 * n, 3), dtype=np.int64)
        out[0, 0] = 0
        out[0, 1] = 0
        out[0, 2] = 0
        k = 1
        for i in range(n):
            x0, y0, z0, x1, y1, z1 = boxes[i, 0], boxes[i, 1], boxes[i, 2], boxes[i, 3], boxes[i, 4], boxes[i, 5]
            for corner in range(3):
                if corner == 0:
                    px, py, pz, a1, a2 = x1, y0, z0, 1, 2
                elif corner == 1:
                    px, py, pz, a1, a2 = x0, y1, z0, 0, 2
                else:
                    px, py, pz, a1, a2 = x0, y0, z1, 0, 1
                out[k, 0] = px
                out[k, 1] = py
                out[k, 2] = pz
                k += 1
                for a in (a1, a2):
                    s = _jit_project(boxes, px, py, pz, a)
                    out[k, 0] = s if a == 0 else px
                    out[k, 1] = s if a == 1 else py
                    out[k, 2] = s if a == 2 else pz
                    k += 1
        keep = np.zeros(k, dtype=np.bool_)
        for i in range(k):
            keep[i] = out[i, 0] < dims[0] and out[i, 1] < dims[1] and out[i, 2] < dims[2]
        return out[:k][keep]

    jit_kernels = SimpleNamespace(
        name="numba",
        support_counts=_jit_support_counts,
        cep_counts=_jit_cep_counts,
        feasible_mask=_jit_feasible_mask,
        first_feasible=_jit_first_feasible,
        extreme_points=_jit_extreme_points,
    )
else:  # pragma: no cover
    jit_kernels = None


active = jit_kernels if USE_JIT else numpy_kernels

support_counts = active.support_counts
cep_counts = active.cep_counts
feasible_mask = active.feasible_mask
first_feasible = active.first_feasible
extreme_points = active.extreme_points


def unique_points(points: np.ndarray) -> np.ndarray:
    """Deduplicate (K, 3) points and sort them by (z, y, x)."""
    if points.shape[0] == 0:
        return points.reshape(0, 3)
    pts = np.unique(points, axis=0)
    order = np.lexsort((pts[:, 0], pts[:, 1], pts[:, 2]))
    return pts[order]
