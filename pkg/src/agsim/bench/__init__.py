from .bridge import BridgeResult, bridge_compare
from .harness import (
    BenchConfig,
    BenchReport,
    LatencyResult,
    StabilityReport,
    latency_bench,
    run_harness,
    stability_run,
)
from .profiles import PROFILES, WorkloadProfile, apply_profile, get_profile
from .stats import harmonic_mean, leak_regression, median_iqr

__all__ = [
    "BenchConfig",
    "BenchReport",
    "BridgeResult",
    "LatencyResult",
    "PROFILES",
    "StabilityReport",
    "WorkloadProfile",
    "apply_profile",
    "bridge_compare",
    "get_profile",
    "harmonic_mean",
    "latency_bench",
    "leak_regression",
    "median_iqr",
    "run_harness",
    "stability_run",
]
