"""Flow-guided assignment and path finding for robotic sorting systems."""

from ._rssflow import (
    Config,
    ConfigError,
    DisconnectedCommodity,
    InfeasibleDemand,
    Layout,
    Network,
    Pipeline,
    RssError,
    SaturatedWorkstation,
    Timing,
    cost_gradient,
    decompose,
    report,
    run_battery,
    solve,
    spearman,
    total_cost,
)

__all__ = [
    "Config",
    "ConfigError",
    "DisconnectedCommodity",
    "InfeasibleDemand",
    "Layout",
    "Network",
    "Pipeline",
    "RssError",
    "SaturatedWorkstation",
    "Timing",
    "cost_gradient",
    "decompose",
    "report",
    "run_battery",
    "solve",
    "spearman",
    "total_cost",
]
