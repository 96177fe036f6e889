"""Online 3D bin packing with look-ahead for a robotic packer."""

from robopack.core import (
    ORIENTATIONS,
    BinState,
    BoxDims,
    FeasibilityVerdict,
    Orientation,
    Placement,
    RobotConfig,
    cep_contacts,
    is_feasible,
    orient,
    orientation_allowed,
    overlaps,
    support_count,
)
from robopack.opack import Weights

__version__ = "0.1.0"
