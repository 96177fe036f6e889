import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robopack.core import (
    ORIENTATIONS,
    BinState,
    BoxDims,
    Orientation,
    Placement,
    RobotConfig,
    allowed_extents,
    cep_contacts,
    is_feasible,
    orient,
    orientation_allowed,
    overlaps,
    support_count,
)

from conftest import place, random_stable_bin
from oracles import boxes_of, lateral_contacts, vertex_support

BIN10 = BoxDims(10, 10, 10)
SWAP_LB = Orientation((1, 0, 2))


def test_boxdims_validation():
    with pytest.raises(ValueError):
        BoxDims(0, 1, 1)
    with pytest.raises(ValueError):
        BoxDims(2, 2, 2, true_volume=9.0)
    b = BoxDims.from_real(10.2, 5.0, 3.01)
    assert b.sides == (11, 5, 4)
    assert b.true_volume == pytest.approx(10.2 * 5.0 * 3.01)
    assert b.volume == pytest.approx(153.51)
    assert b.grid_volume == 220


def test_orient_examples():
    d = BoxDims(10, 20, 30)
    assert orient(d, ORIENTATIONS[0]) == (10, 20, 30)
    assert orient(d, SWAP_LB) == (20, 10, 30)
    assert len({orient(d, o) for o in ORIENTATIONS}) == 6
    assert len({orient(BoxDims(10, 10, 30), o) for o in ORIENTATIONS}) == 3


def test_orientation_names_roundtrip():
    names = [o.name for o in ORIENTATIONS]
    assert names == ["lbh", "lhb", "blh", "bhl", "hlb", "hbl"]
    for o in ORIENTATIONS:
        assert Orientation.from_name(o.name) == o
    with pytest.raises(ValueError):
        Orientation((0, 0, 1))


def test_largest_dim_vertical_rule():
    cfg = RobotConfig(forbid_largest_dim_vertical=True)
    d = BoxDims(10, 20, 30)
    assert not orientation_allowed(d, Orientation.from_name("lbh"), cfg)
    assert orientation_allowed(d, Orientation.from_name("hbl"), cfg)
    # tie for the largest side: either may stand upright
    tie = BoxDims(30, 30, 10)
    assert orientation_allowed(tie, Orientation.from_name("blh"), cfg)
    assert orientation_allowed(tie, Orientation.from_name("hbl"), cfg)
    assert not orientation_allowed(d, ORIENTATIONS[0], RobotConfig(allowed_orientations=[SWAP_LB]))


def test_robot_config_invariants():
    with pytest.raises(ValueError):
        RobotConfig(allowed_orientations=[])
    with pytest.raises(ValueError):
        RobotConfig(min_supported_vertices=0)


def test_allowed_extents_dedups_equal_shapes():
    ext = [e for _, e in allowed_extents(BoxDims(5, 5, 5), RobotConfig())]
    assert ext == [(5, 5, 5)]


def test_overlap_examples():
    a = Placement(BoxDims(4, 4, 4), 1, (0, 0, 0))
    assert not overlaps(a, Placement(BoxDims(4, 4, 4), 1, (4, 0, 0)))
    assert overlaps(a, Placement(BoxDims(4, 4, 4), 1, (3, 3, 3)))


def test_overlap_matches_voxel_oracle():
    big = Placement(BoxDims(2, 2, 2), 1, (1, 2, 1))
    vox = np.zeros((5, 5, 5), bool)
    vox[1:3, 2:4, 1:3] = True
    for x, y, z in itertools.product(range(5), repeat=3):
        unit = Placement(BoxDims(1, 1, 1), 1, (x, y, z))
        assert overlaps(big, unit) == vox[x, y, z]
        assert overlaps(unit, big) == vox[x, y, z]


def test_support_count_examples():
    bin = place(BinState(BIN10), 4, 4, 2, (0, 0, 0))
    assert support_count(Placement(BoxDims(4, 4, 2), 1, (2, 0, 2)), bin) == 2
    assert support_count(Placement(BoxDims(4, 4, 2), 1, (0, 0, 2)), bin) == 4
    assert support_count(Placement(BoxDims(3, 3, 3), 1, (6, 6, 0)), bin) == 4
    # vertex on the edge of the supporting face counts (closed region)
    assert support_count(Placement(BoxDims(4, 4, 2), 1, (0, 0, 2), ), bin) == 4
    assert support_count(Placement(BoxDims(2, 2, 2), 1, (3, 3, 2)), bin) == 1
    # wrong height: no support
    assert support_count(Placement(BoxDims(4, 4, 2), 1, (0, 0, 3)), bin) == 0


def test_is_feasible_examples():
    cfg = RobotConfig()
    empty = BinState(BIN10)
    assert is_feasible(empty, Placement(BoxDims(3, 3, 3), 1, (0, 0, 0)), cfg).ok
    v = is_feasible(empty, Placement(BoxDims(3, 3, 3), 1, (0, 0, 5)), cfg)
    assert v.clauses == {"stability"}
    bin = place(empty, 4, 4, 2, (0, 0, 0))
    v = is_feasible(bin, Placement(BoxDims(4, 4, 2), 1, (2, 0, 2)), cfg)
    assert v.clauses == {"stability"}
    assert "2 < 3" in str(v.violations[0])


def test_is_feasible_reports_every_clause():
    cfg = RobotConfig(forbid_largest_dim_vertical=True, require_cep=True)
    bin = place(BinState(BIN10), 4, 4, 4, (0, 0, 0))
    p = Placement(BoxDims(2, 3, 8), 1, (3, 3, 3))
    assert is_feasible(bin, p, cfg).clauses == {"containment", "overlap", "orientation", "stability", "cep"}


def test_cep_examples():
    empty = BinState(BIN10)
    assert cep_contacts(Placement(BoxDims(4, 4, 4), 1, (0, 0, 0)), empty) == 2
    assert cep_contacts(Placement(BoxDims(2, 2, 2), 1, (4, 4, 0)), empty) == 0
    bin = place(empty, 4, 4, 4, (0, 0, 0))
    assert cep_contacts(Placement(BoxDims(4, 4, 4), 1, (4, 0, 0)), bin) == 2
    # edge-only contact (zero area) does not count
    assert cep_contacts(Placement(BoxDims(4, 4, 4), 1, (4, 4, 0)), bin) == 0
    # both walls on the same axis
    assert cep_contacts(Placement(BoxDims(10, 2, 2), 1, (0, 3, 0)), empty) == 2


def test_bin_state_is_append_only():
    b0 = BinState(BIN10)
    b1 = place(b0, 2, 2, 2, (0, 0, 0))
    assert b0.placements == () and len(b1.placements) == 1
    assert b1.packed_volume_grid == 8
    assert b1.height_map[1, 1] == 2 and b1.height_map[2, 2] == 0
    assert b1.reindexed(3).placements[0].bin_index == 3
    assert b1.reindexed(3).digest() == b1.digest()


def test_true_volume_drives_fill_rate():
    b = BinState(BIN10).add(Placement(BoxDims.from_real(9.5, 10, 10), 1, (0, 0, 0)))
    assert b.packed_volume_grid == 1000
    assert b.fill_rate == pytest.approx(95.0)


sides = st.integers(1, 12)


@given(sides, sides, sides)
def test_orientation_preserves_volume(l, b, h):
    d = BoxDims(l, b, h)
    for o in ORIENTATIONS:
        e = orient(d, o)
        assert sorted(e) == sorted(d.sides)
        assert e[0] * e[1] * e[2] == d.grid_volume


box_st = st.tuples(sides, sides, sides, st.integers(0, 10), st.integers(0, 10), st.integers(0, 10))


@given(box_st, box_st)
def test_overlap_symmetry_and_voxels(a, b):
    pa = Placement(BoxDims(*a[:3]), 1, a[3:])
    pb = Placement(BoxDims(*b[:3]), 1, b[3:])
    assert overlaps(pa, pb) == overlaps(pb, pa)
    va = np.zeros((24, 24, 24), bool)
    vb = np.zeros_like(va)
    va[tuple(slice(c, c + s) for c, s in zip(pa.corner, pa.extents))] = True
    vb[tuple(slice(c, c + s) for c, s in zip(pb.corner, pb.extents))] = True
    assert overlaps(pa, pb) == bool((va & vb).any())


@settings(max_examples=60)
@given(st.integers(0, 2**31 - 1), box_st)
def test_feasibility_monotone_for_geometric_clauses(seed, q):
    from conftest import random_stable_bin

    rng = np.random.default_rng(seed)
    small = random_stable_bin(rng, n_tries=8)
    big = small
    for extra in random_stable_bin(rng, n_tries=10).placements:
        if is_feasible(big, extra, RobotConfig()).ok:
            big = big.add(extra)
    p = Placement(BoxDims(*q[:3]), 1, q[3:])
    geo = {"containment", "overlap", "orientation"}
    rejected = is_feasible(small, p, RobotConfig()).clauses & geo
    assert rejected <= is_feasible(big, p, RobotConfig()).clauses


@given(box_st)
def test_floor_always_fully_supported(q):
    p = Placement(BoxDims(*q[:3]), 1, (q[3], q[4], 0))
    assert support_count(p, BinState(BIN10)) == 4


def test_support_and_cep_match_brute_force(rng):
    for _ in range(40):
        bin = random_stable_bin(rng, shape=(8, 8, 8), n_tries=15)
        boxes = boxes_of(bin)
        for _ in range(10):
            ext = tuple(int(v) for v in rng.integers(1, 5, 3))
            x, y = (int(rng.integers(0, 8 - e + 1)) for e in ext[:2])
            z = int(bin.height_map[x : x + ext[0], y : y + ext[1]].max())
            if z + ext[2] > 8:
                continue
            p = Placement(BoxDims(*ext), 1, (x, y, z))
            far = (x + ext[0], y + ext[1], z + ext[2])
            assert cep_contacts(p, bin) == lateral_contacts(boxes, bin.shape, x, y, z, *far)
            assert support_count(p, bin) == vertex_support(boxes, x, y, far[0], far[1], z)
