"""edgesplit: split a divisible workload across CPU-capped containers on an
edge device, measure or simulate the time/energy/power trade-off, fit
performance models to the measurements, and plan the container count."""

from edgesplit.executor import (
    BUILTIN_PROFILES,
    DeviceProfile,
    ExperimentError,
    LocalProcessBackend,
    MockBackend,
    RunMetrics,
    SimulatedBackend,
    container_adapter_command,
    run_experiment,
    simulate_run,
)
from edgesplit.modelfit import (
    DataPoint,
    NormalizedMetrics,
    QuadraticModel,
    SaturatingExpModel,
    fit_auto,
    fit_quadratic,
    fit_saturating_exp,
    normalize_metrics,
    predict,
)
from edgesplit.planner import (
    Constraints,
    Objective,
    SavingsReport,
    marginal_gain_cutoff,
    optimal_containers,
    savings_report,
)
from edgesplit.powermeter import (
    ConstantSource,
    FunctionSource,
    PowerSample,
    PowerTrace,
    ReplaySource,
    average_power,
    integrate_energy,
    sample_power,
)
from edgesplit.splitter import (
    Segment,
    SegmentResult,
    SplitPlan,
    make_split_plan,
    merge_segments,
)

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_PROFILES",
    "Constraints",
    "ConstantSource",
    "DataPoint",
    "DeviceProfile",
    "ExperimentError",
    "FunctionSource",
    "LocalProcessBackend",
    "MockBackend",
    "NormalizedMetrics",
    "Objective",
    "PowerSample",
    "PowerTrace",
    "QuadraticModel",
    "ReplaySource",
    "RunMetrics",
    "SaturatingExpModel",
    "SavingsReport",
    "Segment",
    "SegmentResult",
    "SimulatedBackend",
    "SplitPlan",
    "average_power",
    "container_adapter_command",
    "fit_auto",
    "fit_quadratic",
    "fit_saturating_exp",
    "integrate_energy",
    "make_split_plan",
    "marginal_gain_cutoff",
    "merge_segments",
    "normalize_metrics",
    "optimal_containers",
    "predict",
    "run_experiment",
    "sample_power",
    "savings_report",
    "simulate_run",
    "__version__",
]
