from robopack.sim.data import (
    BIN_TYPES,
    CollectionFormatError,
    SyntheticCollection,
    bin_dims_for,
    gen_industrial_like,
    gen_synthetic,
    load_collection,
    save_collection,
)
from robopack.sim.episode import (
    BinManager,
    EpisodeMetrics,
    LookAhead,
    ProtocolError,
    fill_rate,
    run_episode,
)

__all__ = [
    "BIN_TYPES",
    "BinManager",
    "CollectionFormatError",
    "EpisodeMetrics",
    "LookAhead",
    "ProtocolError",
    "SyntheticCollection",
    "bin_dims_for",
    "fill_rate",
    "gen_industrial_like",
    "gen_synthetic",
    "load_collection",
    "run_episode",
    "save_collection",
]
