"""Symbolic MILP for one rolling-horizon step, solver agnostic.

Open bins are laid side by side along x: bin ``j`` (1-based) spans
``[(j-1)L, jL]``. Coordinates are global in that frame, so boxes in
different bins can never overlap. The objective subtracts the bin offset
to score the in-bin ``x``.

Variable families (per box ``i`` of committed + look-ahead):
  ``x,y,z,xf,yf,zf`` corners, ``p[i,j]`` box-in-bin, ``r[i,a,s]`` side s
  along axis a. Per bin: ``u[j]``. Per ordered pair with a look-ahead
  member and axis: ``s[a,i,k]`` (i lies on the positive side of k).
  Look-ahead boxes also get stability binaries (``f``, ``sig``, ``beta``)
  and, when CEP is on, contact binaries ``d[i,k,c]`` and ``dw[i,j,e]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from robopack.core import AXES, ORIENTATIONS, BinState, BoxDims, RobotConfig, orientation_allowed, packable
from robopack.opack import Weights

CONT = "C"
BIN = "B"
TAGS = ("geometric", "stability", "cep", "fixing")


@dataclass
class Var:
    name: str
    kind: str = CONT
    lb: float = 0.0
    ub: float = 1.0


@dataclass
class Constraint:
    name: str
    terms: dict  # var name -> coefficient
    sense: str  # "<=", ">=", "="
    rhs: float
    tag: str


@dataclass
class MilpModel:
    name: str = "MPACK"
    variables: dict = field(default_factory=dict)  # insertion ordered
    constraints: list = field(default_factory=list)
    objective: dict = field(default_factory=dict)
    big_m: dict = field(default_factory=dict)

    def var(self, name, kind=CONT, lb=0.0, ub=1.0):
        if name in self.variables:
            raise ValueError(f"duplicate variable {name}")
        self.variables[name] = Var(name, kind, float(lb), float(ub))
        return name

    def add(self, tag, terms, sense, rhs, name=None):
        if tag not in TAGS:
            raise ValueError(f"unknown constraint tag {tag}")
        merged = {}
        for v, c in terms:
            merged[v] = merged.get(v, 0.0) + float(c)
        merged = {v: c for v, c in merged.items() if c != 0.0}
        self.constraints.append(
            Constraint(name or f"{tag[:3]}{len(self.constraints)}", merged, sense, float(rhs), tag)
        )

    def counts(self) -> dict:
        by_tag = {t: 0 for t in TAGS}
        for c in self.constraints:
            by_tag[c.tag] += 1
        return {
            "variables": len(self.variables),
            "binaries": sum(v.kind == BIN for v in self.variables.values()),
            "constraints": len(self.constraints),
            "objective_terms": len(self.objective),
            **by_tag,
        }

    def validate(self) -> None:
        for c in self.constraints:
            for v in c.terms:
                if v not in self.variables:
                    raise ValueError(f"constraint {c.name} uses undeclared variable {v}")
        for v in self.objective:
            if v not in self.variables:
                raise ValueError(f"objective uses undeclared variable {v}")


def build_milp(
    committed: Sequence[BinState],
    window: Sequence[BoxDims],
    cfg: RobotConfig,
    w: Weights = Weights(),
) -> MilpModel:
    if not window:
        raise ValueError("look-ahead window is empty")
    bins = sorted(committed, key=lambda b: b.index)
    if not bins:
        raise ValueError("at least one open bin is required")
    L, B, H = bins[0].shape
    if any(b.shape != (L, B, H) for b in bins):
        raise ValueError("open bins must share one size")
    nb = len(bins)
    bin_dims = bins[0].dims
    for box in window:
        if not packable(box, bin_dims):
            raise ValueError(f"box {box.id!r} {box.sides} violates max side <= min bin side")

    m = MilpModel()
    MX = nb * L  # x spans every bin in the side-by-side frame
    m.big_m = {"x": MX, "y": B, "z": H}
    ext = {"x": MX, "y": B, "z": H}

    fixed = []  # (tag, placement, bin position j)
    for j, b in enumerate(bins, start=1):
        for p in b.placements:
            fixed.append((f"c{len(fixed)}", p, j))
    look = [(f"a{k}", box) for k, box in enumerate(window)]
    all_ids = [t for t, _, _ in fixed] + [t for t, _ in look]
    dims_of = {t: p.box.sides for t, p, _ in fixed}
    dims_of.update({t: box.sides for t, box in look})
    boxes_of = {t: p.box for t, p, _ in fixed}
    boxes_of.update({t: box for t, box in look})
    la = {t for t, _ in look}

    for j in range(1, nb + 1):
        m.var(f"u[{j}]", BIN)

    for i in all_ids:
        for a in AXES:
            m.var(f"{a}[{i}]", CONT, 0, ext[a])
        for a in AXES:
            m.var(f"{a}f[{i}]", CONT, 0, ext[a])
        for j in range(1, nb + 1):
            m.var(f"p[{i},{j}]", BIN)
        for a in AXES:
            for s in "lbh":
                m.var(f"r[{i},{a},{s}]", BIN)

    # geometric
    for i in all_ids:
        m.add("geometric", [(f"p[{i},{j}]", 1) for j in range(1, nb + 1)], "=", 1)
        for j in range(1, nb + 1):
            m.add("geometric", [(f"p[{i},{j}]", 1), (f"u[{j}]", -1)], "<=", 0)
        m.add("geometric", [(f"x[{i}]", 1)] + [(f"p[{i},{j}]", -(j - 1) * L) for j in range(1, nb + 1)], ">=", 0)
        m.add("geometric", [(f"xf[{i}]", 1)] + [(f"p[{i},{j}]", -j * L) for j in range(1, nb + 1)], "<=", 0)
        m.add("geometric", [(f"yf[{i}]", 1)], "<=", B)
        m.add("geometric", [(f"zf[{i}]", 1)], "<=", H)
        sides = dict(zip("lbh", dims_of[i]))
        for a in AXES:
            m.add(
                "geometric",
                [(f"{a}f[{i}]", 1), (f"{a}[{i}]", -1)] + [(f"r[{i},{a},{s}]", -sides[s]) for s in "lbh"],
                "=", 0,
            )
            m.add("geometric", [(f"r[{i},{a},{s}]", 1) for s in "lbh"], "=", 1)
        for s in "lbh":
            m.add("geometric", [(f"r[{i},{a},{s}]", 1) for a in AXES], "=", 1)

    # orientation restrictions for look-ahead boxes
    for i, box in look:
        s = box.sides
        top = max(s)
        if cfg.forbid_largest_dim_vertical and s.count(top) == 1:
            m.add("geometric", [(f"r[{i},z,{'lbh'[s.index(top)]}]", 1)], "=", 0)
        for o in ORIENTATIONS:
            if o not in cfg.allowed_orientations:
                m.add("geometric", [(f"r[{i},{a},{'lbh'[o.perm[n]]}]", 1) for n, a in enumerate(AXES)], "<=", 2)

    # pairwise non-overlap, only pairs touching the look-ahead
    pairs = [(i, k) for i in all_ids for k in all_ids if i != k and (i in la or k in la)]
    for i, k in pairs:
        for a in AXES:
            m.var(f"s[{a},{i},{k}]", BIN)
    for i, k in pairs:
        for a in AXES:
            M = ext[a]
            # s=1  =>  a_i >= af_k
            m.add("geometric", [(f"{a}f[{k}]", 1), (f"{a}[{i}]", -1), (f"s[{a},{i},{k}]", M)], "<=", M)
    seen = set()
    for i, k in pairs:
        key = frozenset((i, k))
        if key in seen:
            continue
        seen.add(key)
        m.add("geometric", [(f"s[{a},{i},{k}]", 1) for a in AXES] + [(f"s[{a},{k},{i}]", 1) for a in AXES], ">=", 1)

    # vertical stability: floor, or enough base vertices on coplanar top faces
    need = cfg.min_supported_vertices
    for i, _ in look:
        others = [k for k in all_ids if k != i]
        if not others:
            m.add("stability", [(f"z[{i}]", 1)], "<=", 0)
            continue
        m.var(f"f[{i}]", BIN)
        m.add("stability", [(f"z[{i}]", 1), (f"f[{i}]", H)], "<=", H)
        verts = [("x", "y"), ("xf", "y"), ("x", "yf"), ("xf", "yf")]
        for v in range(4):
            m.var(f"sig[{i},{v}]", BIN)
            for k in others:
                m.var(f"beta[{i},{k},{v}]", BIN)
        for v, (vx, vy) in enumerate(verts):
            m.add("stability", [(f"sig[{i},{v}]", 1)] + [(f"beta[{i},{k},{v}]", -1) for k in others], "<=", 0)
            for k in others:
                beta = f"beta[{i},{k},{v}]"
                m.add("stability", [(f"z[{i}]", 1), (f"zf[{k}]", -1), (beta, H)], "<=", H)
                m.add("stability", [(f"zf[{k}]", 1), (f"z[{i}]", -1), (beta, H)], "<=", H)
                m.add("stability", [(f"x[{k}]", 1), (f"{vx}[{i}]", -1), (beta, MX)], "<=", MX)
                m.add("stability", [(f"{vx}[{i}]", 1), (f"xf[{k}]", -1), (beta, MX)], "<=", MX)
                m.add("stability", [(f"y[{k}]", 1), (f"{vy}[{i}]", -1), (beta, B)], "<=", B)
                m.add("stability", [(f"{vy}[{i}]", 1), (f"yf[{k}]", -1), (beta, B)], "<=", B)
                for j in range(1, nb + 1):
                    # supporter shares the bin
                    m.add("stability", [(beta, 1), (f"p[{i},{j}]", 1), (f"p[{k},{j}]", -1)], "<=", 1)
        m.add("stability", [(f"sig[{i},{v}]", 1) for v in range(4)] + [(f"f[{i}]", need)], ">=", need)

    if cfg.require_cep:
        _add_cep(m, look, all_ids, nb, L, B, MX)

    # fix committed boxes to their recorded pose
    for i, p, j in fixed:
        off = (j - 1) * L
        lo, hi = p.corner, p.far_corner
        vals = {
            f"x[{i}]": lo[0] + off, f"y[{i}]": lo[1], f"z[{i}]": lo[2],
            f"xf[{i}]": hi[0] + off, f"yf[{i}]": hi[1], f"zf[{i}]": hi[2],
        }
        for jj in range(1, nb + 1):
            vals[f"p[{i},{jj}]"] = 1 if jj == j else 0
        for n, a in enumerate(AXES):
            for s_idx, s in enumerate("lbh"):
                vals[f"r[{i},{a},{s}]"] = 1 if p.orientation.perm[n] == s_idx else 0
        for v, val in vals.items():
            m.add("fixing", [(v, 1)], "=", val)

    # objective over the look-ahead only
    obj = {}
    for i, _ in look:
        obj[f"x[{i}]"] = w.w1
        obj[f"y[{i}]"] = w.w1
        obj[f"zf[{i}]"] = w.w2
        for j in range(1, nb + 1):
            c = w.w3 * j - w.w1 * (j - 1) * L
            if c != 0:
                obj[f"p[{i},{j}]"] = c
    m.objective = {v: c for v, c in obj.items() if c != 0}
    m.validate()
    return m


def _add_cep(m, look, all_ids, nb, L, B, MX):
    span = {"x": MX, "y": B}
    for i, _ in look:
        others = [k for k in all_ids if k != i]
        contacts = {"x": [], "y": []}
        for k in others:
            for c in "xy":
                d = m.var(f"d[{i},{k},{c}]", BIN)
                contacts[c].append(d)
                D = span[c]
                # d=1  =>  c_i == cf_k
                m.add("cep", [(f"{c}[{i}]", 1), (f"{c}f[{k}]", -1), (d, D)], "<=", D)
                m.add("cep", [(f"{c}f[{k}]", 1), (f"{c}[{i}]", -1), (d, D)], "<=", D)
                for j in range(1, nb + 1):
                    m.add("cep", [(d, 1), (f"p[{i},{j}]", 1), (f"p[{k},{j}]", -1)], "<=", 1)
        for j in range(1, nb + 1):
            # walls: 1 x-low, 2 y-low, 3 x-high, 4 y-high
            walls = {
                1: ("x", (j - 1) * L, "x"),
                2: ("y", 0, "y"),
                3: ("xf", j * L, "x"),
                4: ("yf", B, "y"),
            }
            for e, (coord, at, c) in walls.items():
                d = m.var(f"dw[{i},{j},{e}]", BIN)
                contacts[c].append(d)
                D = span[c]
                m.add("cep", [(f"{coord}[{i}]", 1), (d, D)], "<=", at + D)
                m.add("cep", [(f"{coord}[{i}]", -1), (d, D)], "<=", D - at)
                m.add("cep", [(d, 1), (f"p[{i},{j}]", -1)], "<=", 0)
        m.add("cep", [(d, 1) for d in contacts["x"]], "<=", 1)
        m.add("cep", [(d, 1) for d in contacts["y"]], "<=", 1)
        m.add("cep", [(d, 1) for d in contacts["x"] + contacts["y"]], ">=", 2)
