import numpy as np
import pytest

from robopack.core import BinState, BoxDims, Placement, RobotConfig, ORIENTATIONS, is_feasible


def place(bin: BinState, l, b, h, corner, orientation=ORIENTATIONS[0], id=None) -> BinState:
    box = BoxDims(l, b, h, id=id if id is not None else len(bin.placements))
    return bin.add(Placement(box, bin.index, corner, orientation))


def random_stable_bin(rng, shape=(10, 10, 10), n_tries=30, max_side=5, index=1, serial=0) -> BinState:
    """Drop random boxes at random grid spots, keeping only feasible ones."""
    bin = BinState(BoxDims(*shape), index=index, serial=serial)
    cfg = RobotConfig()
    for k in range(n_tries):
        box = BoxDims(*(int(v) for v in rng.integers(1, max_side + 1, 3)), id=f"r{k}")
        o = ORIENTATIONS[int(rng.integers(6))]
        p = Placement(box, index, (0, 0, 0), o)
        ext = p.extents
        x = int(rng.integers(0, shape[0] - ext[0] + 1))
        y = int(rng.integers(0, shape[1] - ext[1] + 1))
        col = bin.height_map[x : x + ext[0], y : y + ext[1]]
        z = int(col.max()) if col.size else 0
        p = Placement(box, index, (x, y, z), o)
        if is_feasible(bin, p, cfg).ok:
            bin = bin.add(p)
    return bin


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance verdicts, filled by test_acceptance and printed after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
