"""Named online policies with one calling convention: ``policy(bins, window) -> Choice | None``."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from robopack.core import BinState, BoxDims, RobotConfig
from robopack.heuristics import EXTREME, best_fit, first_fit
from robopack.mpack.search import DEFAULT_NODE_CAP, MPackStats, mpack_step
from robopack.opack import Choice, Weights, make_rule, opack_step

POLICY_NAMES = ("FF", "BF", "O-FF", "O-BF", "MPL", "MP")

# CEP belongs to the MPack formulation; MPackLite and the heuristics drop it
CEP_DEFAULT = {"FF": False, "BF": False, "O-FF": False, "O-BF": False, "MPL": False, "MP": True}


@dataclass
class Policy:
    name: str
    cfg: RobotConfig = field(default_factory=RobotConfig)
    weights: Weights = field(default_factory=Weights)
    mode: str = EXTREME
    selection: str = "score"
    node_cap: int = DEFAULT_NODE_CAP
    stats: MPackStats = field(default_factory=MPackStats)

    def __post_init__(self):
        if self.name not in POLICY_NAMES:
            raise ValueError(f"unknown policy {self.name!r}; valid: {', '.join(POLICY_NAMES)}")

    def __call__(self, bins: Sequence[BinState], window: Sequence[BoxDims]) -> Optional[Choice]:
        if self.name in ("FF", "BF"):
            # plain heuristics only ever look at the nearest box
            fn = first_fit if self.name == "FF" else best_fit
            d = fn(window[0], bins, self.cfg, self.mode)
            return None if d is None else Choice(0, window[0], d.placement)
        if self.name == "MP":
            return mpack_step(bins, window, self.cfg, self.weights, self.mode, self.node_cap, self.stats)
        rule = make_rule(self.name.replace("O-", ""), self.weights, self.mode)
        return opack_step(rule, bins, window, self.cfg, self.weights, self.selection)

    def describe(self) -> dict:
        cfg = self.cfg
        return {
            "policy": self.name,
            "weights": [self.weights.w1, self.weights.w2, self.weights.w3],
            "candidate_mode": self.mode,
            "selection": self.selection,
            "node_cap": self.node_cap,
            "allowed_orientations": sorted(o.name for o in cfg.allowed_orientations),
            "forbid_largest_dim_vertical": cfg.forbid_largest_dim_vertical,
            "largest_dim_tie_rule": "ties may stand upright",
            "min_supported_vertices": cfg.min_supported_vertices,
            "require_cep": cfg.require_cep,
        }


def make_policy(
    name: str,
    cfg: Optional[RobotConfig] = None,
    weights: Optional[Weights] = None,
    mode: str = EXTREME,
    cep: Optional[bool] = None,
    **kw,
) -> Policy:
    if name not in POLICY_NAMES:
        raise ValueError(f"unknown policy {name!r}; valid: {', '.join(POLICY_NAMES)}")
    cfg = cfg or RobotConfig()
    cfg = replace(cfg, require_cep=CEP_DEFAULT[name] if cep is None else bool(cep))
    return Policy(name, cfg, weights or Weights(), mode, **kw)
