import hashlib

import numpy as np
import pytest

from robopack.core import BinState, BoxDims, RobotConfig, empty_bins, is_feasible
from robopack.heuristics import GRID
from robopack.mpack import (
    BUDGET,
    INFEASIBLE,
    OPTIMAL,
    MPackStats,
    build_milp,
    export_model,
    format_mps,
    mpack_step,
    parse_mps,
    read_mps,
    solve_joint_exact,
)
from robopack.mpack.milp import BIN
from robopack.mpack.search import joint_objective
from robopack.opack import Weights, packrule_mpl, score

from conftest import place, random_stable_bin
from oracles import boxes_of, brute_joint

CFG = RobotConfig()
W = Weights()


def solve_with_highs(model):
    """Optimal objective of a MilpModel via scipy's HiGHS, or None if infeasible."""
    from scipy.optimize import Bounds, LinearConstraint, milp

    names = list(model.variables)
    col = {n: k for k, n in enumerate(names)}
    c = np.zeros(len(names))
    for v, coef in model.objective.items():
        c[col[v]] = coef
    A = np.zeros((len(model.constraints), len(names)))
    lo = np.full(len(model.constraints), -np.inf)
    hi = np.full(len(model.constraints), np.inf)
    for r, con in enumerate(model.constraints):
        for v, coef in con.terms.items():
            A[r, col[v]] = coef
        if con.sense in ("<=", "="):
            hi[r] = con.rhs
        if con.sense in (">=", "="):
            lo[r] = con.rhs
    integrality = np.array([model.variables[n].kind == BIN for n in names], dtype=int)
    bounds = Bounds([model.variables[n].lb for n in names], [model.variables[n].ub for n in names])
    res = milp(c, constraints=LinearConstraint(A, lo, hi), integrality=integrality, bounds=bounds)
    return res.fun if res.status == 0 else None


# --- model construction -----------------------------------------------------


def test_single_box_model_has_17_variables():
    m = build_milp(empty_bins(BoxDims(10, 10, 10), 1), [BoxDims(3, 4, 5)], CFG)
    assert m.counts()["variables"] == 17
    assert m.counts()["binaries"] == 11
    assert set(m.objective) <= set(m.variables)


def test_forbidden_upright_fixes_r_to_zero():
    cfg = RobotConfig(forbid_largest_dim_vertical=True)
    m = build_milp(empty_bins(BoxDims(10, 10, 10), 1), [BoxDims(3, 9, 5)], cfg)
    fixed = [c for c in m.constraints if c.terms == {"r[a0,z,b]": 1.0} and c.sense == "=" and c.rhs == 0]
    assert len(fixed) == 1


def test_objective_covers_lookahead_only():
    bins = empty_bins(BoxDims(10, 10, 10), 2)
    bins[0] = place(bins[0], 4, 4, 4, (0, 0, 0), id="old")
    m = build_milp(bins, [BoxDims(2, 2, 2, id="a"), BoxDims(3, 3, 3, id="b")], CFG)
    owners = {v.split("[")[1].split(",")[0].rstrip("]") for v in m.objective}
    assert owners == {"a0", "a1"}
    assert m.counts()["fixing"] > 0
    assert all(c.tag == "fixing" for c in m.constraints if set(c.terms) == {"x[c0]"})


def test_build_milp_rejects_bad_input():
    bins = empty_bins(BoxDims(10, 10, 10), 1)
    with pytest.raises(ValueError):
        build_milp(bins, [], CFG)
    with pytest.raises(ValueError):
        build_milp(bins, [BoxDims(11, 2, 2)], CFG)
    with pytest.raises(ValueError):
        build_milp([], [BoxDims(1, 1, 1)], CFG)


def test_cep_adds_contact_binaries():
    bins = empty_bins(BoxDims(10, 10, 10), 1)
    bins[0] = place(bins[0], 4, 4, 4, (0, 0, 0))
    m = build_milp(bins, [BoxDims(2, 2, 2)], RobotConfig(require_cep=True))
    assert m.counts()["cep"] > 0
    assert "d[a0,c0,x]" in m.variables and "dw[a0,1,4]" in m.variables


# --- MPS export -------------------------------------------------------------


def test_mps_round_trip(tmp_path):
    bins = empty_bins(BoxDims(10, 10, 10), 2)
    bins[0] = place(bins[0], 4, 4, 4, (0, 0, 0))
    m = build_milp(bins, [BoxDims(2, 3, 4), BoxDims(5, 1, 2)], RobotConfig(require_cep=True))
    path = export_model(m, tmp_path / "step_0_l2.lp-format")
    back = read_mps(path)
    assert back.counts() == m.counts()
    assert back.objective == pytest.approx(m.objective)
    for a, b in zip(m.constraints, back.constraints):
        assert (a.name, a.sense, a.tag) == (b.name, b.sense, b.tag)
        assert a.rhs == b.rhs and a.terms == pytest.approx(b.terms)
    assert {n: (v.kind, v.lb, v.ub) for n, v in m.variables.items()} == {
        n: (v.kind, v.lb, v.ub) for n, v in back.variables.items()
    }


def test_mps_single_box_declares_17_columns():
    m = build_milp(empty_bins(BoxDims(10, 10, 10), 1), [BoxDims(3, 4, 5)], CFG)
    text = format_mps(m)
    assert sum(1 for line in text.splitlines() if line.startswith("* VAR ")) == 17
    assert len(parse_mps(text).variables) == 17


def test_empty_objective_is_rejected():
    m = build_milp(empty_bins(BoxDims(10, 10, 10), 1), [BoxDims(3, 4, 5)], CFG)
    m.objective = {}
    with pytest.raises(ValueError):
        format_mps(m)


def test_mps_export_is_byte_stable(tmp_path):
    rng = np.random.default_rng(7)
    bins = [random_stable_bin(rng, shape=(10, 10, 10), n_tries=6, index=j + 1, serial=j) for j in range(2)]
    window = [BoxDims(2, 3, 4, id="a"), BoxDims(3, 3, 1, id="b")]
    one = format_mps(build_milp(bins, window, RobotConfig(require_cep=True)))
    two = format_mps(build_milp(bins, window, RobotConfig(require_cep=True)))
    assert one == two
    assert hashlib.sha256(one.encode()).hexdigest() == hashlib.sha256(two.encode()).hexdigest()


def test_mps_fixed_columns():
    text = format_mps(build_milp(empty_bins(BoxDims(10, 10, 10), 1), [BoxDims(3, 4, 5)], CFG))
    cols = text.split("COLUMNS")[1].split("RHS")[0].splitlines()[1:]
    for line in cols:
        assert line[4:12].strip() == "MARKER" or line[4:12].startswith("V")
        assert len(line) <= 61


# --- exact joint search -----------------------------------------------------


def test_joint_two_slabs():
    bins = empty_bins(BoxDims(6, 6, 6), 1)
    sol = solve_joint_exact(bins, [BoxDims(6, 6, 3), BoxDims(6, 6, 3)], CFG, W, mode=GRID)
    assert sol.status == OPTIMAL
    assert sol.objective == W.w2 * (3 + 6) + 2 * W.w3
    assert joint_objective(list(sol.placements.values()), W) == sol.objective


def test_joint_infeasible_pair():
    bins = empty_bins(BoxDims(6, 6, 6), 1)
    sol = solve_joint_exact(bins, [BoxDims(6, 6, 4), BoxDims(6, 6, 4)], CFG, W, mode=GRID)
    assert sol.status == INFEASIBLE and not sol.found


def test_joint_budget_is_reported():
    bins = empty_bins(BoxDims(8, 8, 8), 2)
    sol = solve_joint_exact(bins, [BoxDims(2, 2, 2, id=k) for k in range(3)], CFG, W, mode=GRID, node_cap=5)
    assert sol.status == BUDGET


def test_single_box_joint_equals_packrule(rng):
    for _ in range(10):
        bins = [random_stable_bin(rng, shape=(8, 7, 6), n_tries=10, index=j + 1, serial=j) for j in range(2)]
        box = BoxDims(*(int(v) for v in rng.integers(1, 5, 3)))
        sol = solve_joint_exact(bins, [box], CFG, W, mode=GRID)
        p = packrule_mpl(bins, box, CFG, W, mode=GRID)
        assert sol.found == (p is not None)
        if p is not None:
            assert sol.objective == score(p, W)


@pytest.mark.parametrize("seed", range(6))
def test_joint_matches_brute_force(seed):
    rng = np.random.default_rng(500 + seed)
    bins = [random_stable_bin(rng, shape=(5, 5, 5), n_tries=4, max_side=3, index=j + 1, serial=j) for j in range(2)]
    window = [BoxDims(*(int(v) for v in rng.integers(2, 5, 3)), id=k) for k in range(2)]
    sol = solve_joint_exact(bins, window, CFG, W, mode=GRID)
    ref = brute_joint([(b.shape, boxes_of(b)) for b in bins], [b.sides for b in window])
    assert (ref is None) == (not sol.found)
    if ref is not None:
        assert sol.objective == ref


def test_joint_with_cep_matches_brute_force():
    rng = np.random.default_rng(42)
    cfg = RobotConfig(require_cep=True)
    for _ in range(4):
        bins = [random_stable_bin(rng, shape=(5, 5, 4), n_tries=3, max_side=3)]
        window = [BoxDims(*(int(v) for v in rng.integers(1, 4, 3)), id=k) for k in range(2)]
        sol = solve_joint_exact(bins, window, cfg, W, mode=GRID)
        ref = brute_joint([(b.shape, boxes_of(b)) for b in bins], [b.sides for b in window], need_cep=True)
        assert (ref is None) == (not sol.found)
        if ref is not None:
            assert sol.objective == ref


def test_joint_placements_are_mutually_feasible(rng):
    bins = [random_stable_bin(rng, shape=(8, 8, 8), n_tries=8, index=j + 1, serial=j) for j in range(2)]
    window = [BoxDims(3, 3, 2, id=k) for k in range(3)]
    sol = solve_joint_exact(bins, window, CFG, W)
    assert sol.found
    state = list(bins)
    for p in sorted(sol.placements.values(), key=lambda p: p.corner[2]):
        j = p.bin_index - 1
        assert is_feasible(state[j], p, CFG).ok
        state[j] = state[j].add(p)


# --- MILP consistency with an external solver -------------------------------


@pytest.mark.parametrize("seed", range(4))
def test_milp_optimum_matches_search(seed):
    pytest.importorskip("scipy")
    rng = np.random.default_rng(900 + seed)
    bins = [random_stable_bin(rng, shape=(5, 4, 4), n_tries=3, max_side=3, index=j + 1, serial=j) for j in range(2)]
    window = [BoxDims(*(int(v) for v in rng.integers(1, 4, 3)), id=k) for k in range(1 + seed % 2)]
    model = build_milp(bins, window, CFG, W)
    sol = solve_joint_exact(bins, window, CFG, W, mode=GRID)
    ref = solve_with_highs(parse_mps(format_mps(model)))
    assert (ref is None) == (not sol.found)
    if ref is not None:
        assert ref == pytest.approx(sol.objective, abs=1e-6)


# --- rolling-horizon step ---------------------------------------------------


def test_mpack_step_single_solve_when_all_fit():
    stats = MPackStats()
    bins = empty_bins(BoxDims(10, 10, 10), 1)
    ch = mpack_step(bins, [BoxDims(3, 3, 3, id=k) for k in range(2)], CFG, W, mode=GRID, stats=stats)
    assert ch is not None and ch.placement.corner == (0, 0, 0)
    assert stats.solves == 1 and stats.shrinks == 0


def test_mpack_step_shrinks_once():
    stats = MPackStats()
    bins = empty_bins(BoxDims(6, 6, 6), 1)
    window = [BoxDims(6, 6, 2, id="a"), BoxDims(6, 6, 2, id="b"), BoxDims(6, 6, 4, id="c")]
    ch = mpack_step(bins, window, CFG, W, mode=GRID, stats=stats)
    assert ch is not None and ch.box.id in ("a", "b")
    assert stats.shrinks == 1


def test_mpack_step_exhausted_returns_none():
    full = place(BinState(BoxDims(6, 6, 6)), 6, 6, 6, (0, 0, 0))
    assert mpack_step([full], [BoxDims(1, 1, 1)], CFG, W) is None
