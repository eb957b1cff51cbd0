"""Container-count planning from fitted performance models.

Evaluates every integer count in range, drops counts whose predicted
absolute power busts the cap, and picks the argmin of the objective
(lowest count wins ties: fewer containers need less memory). Also computes
the marginal-gain cutoff, the count beyond which the predicted per-step
improvement is smaller than epsilon, and saving percentages relative to
the single-container benchmark.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Callable, Sequence, Union

from edgesplit.modelfit import DataPoint, Model, QuadraticModel, predict

OBJECTIVE_KINDS = ("min_time", "min_energy", "weighted")

# Flattening threshold on normalized metrics when none is given explicitly.
DEFAULT_EPSILON = 0.02

Evaluable = Union[Model, Callable[[float], float]]


def _eval(model: Evaluable, x: float) -> float:
    if hasattr(model, "predict"):
        return predict(model, x)
    return model(x)


@dataclass(frozen=True)
class Objective:
    """What to minimize: time, energy, or a unit-free weighted blend."""

    kind: str
    weight_time: float = 0.0
    weight_energy: float = 0.0

    def __post_init__(self):
        if self.kind not in OBJECTIVE_KINDS:
            raise ValueError(f"unknown objective kind: {self.kind!r}")
        if self.kind == "weighted":
            if self.weight_time < 0 or self.weight_energy < 0:
                raise ValueError("weights must be >= 0")
            if abs(self.weight_time + self.weight_energy - 1.0) > 1e-9:
                raise ValueError("weights must sum to 1")


@dataclass(frozen=True)
class Constraints:
    max_containers: int
    power_cap: float | None = None
    marginal_gain_epsilon: float | None = None

    def __post_init__(self):
        if self.max_containers < 1:
            raise ValueError("max_containers must be >= 1")
        if self.marginal_gain_epsilon is not None \
                and not (self.marginal_gain_epsilon > 0):
            raise ValueError("marginal_gain_epsilon must be > 0")


@dataclass(frozen=True)
class PlanDecision:
    """Chosen container count with its predicted metrics."""

    n_containers: int
    objective_value: float
    time_ratio: float
    energy_ratio: float
    power_ratio: float
    time_s: float
    energy_j: float
    power_w: float
    continuous_minimum: float | None = None


def optimal_containers(time_model: Evaluable, energy_model: Evaluable,
                       power_model: Evaluable | None, objective: Objective,
                       constraints: Constraints, device) -> PlanDecision:
    """Exhaustive argmin of the objective over feasible integer counts."""
    if constraints.power_cap is not None and power_model is None:
        raise ValueError("a power cap requires a power model")

    metric = _objective_metric(time_model, energy_model, objective)
    hi = min(constraints.max_containers, device.max_containers)
    if constraints.marginal_gain_epsilon is not None:
        hi = min(hi, marginal_gain_cutoff(
            metric, constraints.marginal_gain_epsilon, hi))

    best_n = None
    best_value = None
    for n in range(1, hi + 1):
        if power_model is not None:
            power_ratio = _eval(power_model, n)
            if constraints.power_cap is not None \
                    and device.ref_power * power_ratio > constraints.power_cap:
                continue
        value = _eval(metric, n)
        if best_value is None or value < best_value:
            best_n, best_value = n, value
    if best_n is None:
        raise ValueError("no feasible container count under the constraints")

    time_ratio = _eval(time_model, best_n)
    energy_ratio = _eval(energy_model, best_n)
    if power_model is not None:
        power_ratio = _eval(power_model, best_n)
    else:
        power_ratio = energy_ratio / time_ratio  # E = P*T identity
    return PlanDecision(
        n_containers=best_n,
        objective_value=best_value,
        time_ratio=time_ratio,
        energy_ratio=energy_ratio,
        power_ratio=power_ratio,
        time_s=device.ref_time * time_ratio,
        energy_j=device.ref_energy * energy_ratio,
        power_w=device.ref_power * power_ratio,
        continuous_minimum=_continuous_minimum(metric),
    )


def _objective_metric(time_model: Evaluable, energy_model: Evaluable,
                      objective: Objective) -> Evaluable:
    if objective.kind == "min_time":
        return time_model
    if objective.kind == "min_energy":
        return energy_model
    wt, we = objective.weight_time, objective.weight_energy

    def blended(x: float) -> float:
        return wt * _eval(time_model, x) + we * _eval(energy_model, x)

    return blended


def _continuous_minimum(metric: Evaluable) -> float | None:
    # Diagnostic only: the integer argmin above is the decision.
    if isinstance(metric, QuadraticModel) and metric.a > 0:
        return -metric.b / (2.0 * metric.a)
    return None


def marginal_gain_cutoff(model: Evaluable, epsilon: float,
                         max_containers: int) -> int:
    """Smallest n whose step to n+1 improves by less than epsilon, or
    max_containers when the model keeps improving fast everywhere."""
    if not (epsilon > 0):
        raise ValueError("epsilon must be > 0")
    if max_containers < 1:
        raise ValueError("max_containers must be >= 1")
    for n in range(1, max_containers):
        if _eval(model, n) - _eval(model, n + 1) < epsilon:
            return n
    return max_containers


# --- savings reports ---------------------------------------------------------

MetricInput = Union[Sequence[DataPoint], Model, None]

REPORT_CSV_HEADER = ("n", "time_saving_pct", "energy_saving_pct",
                     "power_increase_pct")


@dataclass(frozen=True)
class SavingsRow:
    """Percent changes at n containers relative to the n=1 benchmark."""

    n: int
    time_saving_pct: float | None = None
    energy_saving_pct: float | None = None
    power_increase_pct: float | None = None

    @property
    def time_ratio(self) -> float | None:
        if self.time_saving_pct is None:
            return None
        return 1.0 - self.time_saving_pct / 100.0

    @property
    def energy_ratio(self) -> float | None:
        if self.energy_saving_pct is None:
            return None
        return 1.0 - self.energy_saving_pct / 100.0

    @property
    def power_ratio(self) -> float | None:
        if self.power_increase_pct is None:
            return None
        return 1.0 + self.power_increase_pct / 100.0


@dataclass(frozen=True)
class SavingsReport:
    rows: tuple[SavingsRow, ...]

    def row(self, n: int) -> SavingsRow:
        for row in self.rows:
            if row.n == n:
                return row
        raise KeyError(f"no report row for n={n}")

    def to_csv_text(self) -> str:
        out = io.StringIO()
        out.write(",".join(REPORT_CSV_HEADER) + "\n")
        for row in self.rows:
            cells = [str(row.n)]
            for value in (row.time_saving_pct, row.energy_saving_pct,
                          row.power_increase_pct):
                cells.append("" if value is None else repr(value))
            out.write(",".join(cells) + "\n")
        return out.getvalue()


def _ratio_table(metric: MetricInput,
                 max_containers: int | None) -> dict[int, float] | None:
    if metric is None:
        return None
    if isinstance(metric, (list, tuple)):
        values: dict[int, float] = {}
        for point in metric:
            n = round(point.x)
            if abs(point.x - n) > 1e-9:
                raise ValueError(
                    f"container counts must be integers, got {point.x}")
            if n in values:
                raise ValueError(f"duplicate data point at n={n}")
            values[n] = point.y
        if 1 not in values:
            raise ValueError("missing n=1 benchmark row")
        ref = values[1]
        if ref == 0:
            raise ValueError("benchmark value at n=1 must be nonzero")
        return {n: v / ref for n, v in values.items()}
    if max_containers is None:
        raise ValueError("max_containers is required for model inputs")
    ref = predict(metric, 1)
    return {n: predict(metric, n) / ref
            for n in range(1, max_containers + 1)}


def savings_report(time: MetricInput = None, energy: MetricInput = None,
                   power: MetricInput = None,
                   max_containers: int | None = None) -> SavingsReport:
    """Savings table from data points or fitted models, per metric.

    saving_pct = (1 - ratio) * 100 for time and energy;
    power reports (ratio - 1) * 100 since splitting raises average power.
    """
    time_table = _ratio_table(time, max_containers)
    energy_table = _ratio_table(energy, max_containers)
    power_table = _ratio_table(power, max_containers)
    if time_table is None and energy_table is None and power_table is None:
        raise ValueError("at least one metric input is required")

    counts: set[int] = set()
    for table in (time_table, energy_table, power_table):
        if table is not None:
            counts.update(table)

    rows = []
    for n in sorted(counts):
        rows.append(SavingsRow(
            n=n,
            time_saving_pct=None if time_table is None or n not in time_table
            else (1.0 - time_table[n]) * 100.0,
            energy_saving_pct=None if energy_table is None
            or n not in energy_table
            else (1.0 - energy_table[n]) * 100.0,
            power_increase_pct=None if power_table is None
            or n not in power_table
            else (power_table[n] - 1.0) * 100.0,
        ))
    return SavingsReport(rows=tuple(rows))
