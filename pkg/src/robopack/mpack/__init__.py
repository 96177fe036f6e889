from robopack.mpack.milp import Constraint, MilpModel, Var, build_milp
from robopack.mpack.mps import export_model, format_mps, parse_mps, read_mps
from robopack.mpack.search import (
    BUDGET,
    INFEASIBLE,
    OPTIMAL,
    JointSolution,
    MPackStats,
    mpack_step,
    solve_joint_exact,
)

__all__ = [
    "BUDGET",
    "INFEASIBLE",
    "OPTIMAL",
    "Constraint",
    "JointSolution",
    "MPackStats",
    "MilpModel",
    "Var",
    "build_milp",
    "export_model",
    "format_mps",
    "mpack_step",
    "parse_mps",
    "read_mps",
    "solve_joint_exact",
]
