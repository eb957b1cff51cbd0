"""Metric normalization and performance-model fitting.

Normalized time/energy/power metrics (measured run over benchmark run) are
fitted against container or core count with one of two families:

* quadratic  a*x^2 + b*x + c        - convex dip with a best interior count
* saturating exponential  floor + amp*exp(-rate*x)  - flattens as resources grow

The quadratic solve goes through the 3x3 normal equations; the exponential
fit is separable: a deterministic log-spaced scan over the rate with a
closed-form linear solve for (amp, floor) at each candidate, refined by
golden-section search. No starting guesses, fully reproducible.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from edgesplit import kernels
from edgesplit.errors import DataFormatError

RATE_MIN = 0.01
RATE_MAX = 10.0
RATE_GRID_SIZE = 256
# Bracket width at which the golden-section rate refinement stops. Tighter
# than strictly needed so exact-family data is recovered well below 1e-6.
RATE_REFINE_TOL = 1e-9

ENERGY_BALANCE_TOL = 0.01  # |energy - time*power| allowance on ratios


@dataclass(frozen=True)
class DataPoint:
    """One observation: x is a container or core count, y the metric."""

    x: float
    y: float

    def __post_init__(self):
        if not (self.x > 0):
            raise ValueError(f"x must be > 0, got {self.x}")
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite data point ({self.x}, {self.y})")


@dataclass(frozen=True)
class QuadraticModel:
    """y = a*x^2 + b*x + c."""

    a: float
    b: float
    c: float
    rmse: float = 0.0

    def predict(self, x: float) -> float:
        return self.a * x * x + self.b * x + self.c


@dataclass(frozen=True)
class SaturatingExpModel:
    """y = floor + amp*exp(-rate*x); degenerate marks an all-flat fit."""

    amp: float
    rate: float
    floor: float
    rmse: float = 0.0
    degenerate: bool = False

    def __post_init__(self):
        if not (self.rate > 0):
            raise ValueError(f"rate must be > 0, got {self.rate}")
        for value in (self.amp, self.rate, self.floor):
            if not math.isfinite(value):
                raise ValueError("model coefficients must be finite")

    def predict(self, x: float) -> float:
        return self.floor + self.amp * math.exp(-self.rate * x)


Model = Union[QuadraticModel, SaturatingExpModel]


@dataclass(frozen=True)
class NormalizedMetrics:
    """Run metrics divided by the benchmark metrics."""

    time_ratio: float
    energy_ratio: float
    power_ratio: float

    def __post_init__(self):
        for name in ("time_ratio", "energy_ratio", "power_ratio"):
            if not (getattr(self, name) > 0):
                raise ValueError(f"{name} must be > 0")
        gap = abs(self.energy_ratio - self.time_ratio * self.power_ratio)
        if gap > ENERGY_BALANCE_TOL + 1e-9:
            raise ValueError(
                f"inconsistent ratios: |energy - time*power| = {gap:.4f}")


def normalize_metrics(run, reference) -> NormalizedMetrics:
    """Element-wise run/reference ratios of wall time, energy, avg power."""
    for name in ("wall_time", "energy", "avg_power"):
        if not (getattr(reference, name) > 0):
            raise ValueError(f"reference {name} must be > 0")
    return NormalizedMetrics(
        time_ratio=run.wall_time / reference.wall_time,
        energy_ratio=run.energy / reference.energy,
        power_ratio=run.avg_power / reference.avg_power,
    )


def predict(model: Model, x: float) -> float:
    """Evaluate a fitted model at a positive x."""
    if not (x > 0):
        raise ValueError(f"x must be > 0, got {x}")
    return model.predict(x)


def compute_rmse(model: Model, points: Sequence[DataPoint]) -> float:
    sse = sum((p.y - model.predict(p.x)) ** 2 for p in points)
    return math.sqrt(sse / len(points))


def _columns(points: Sequence[DataPoint]) -> tuple:
    x = kernels.as_vector(p.x for p in points)
    y = kernels.as_vector(p.y for p in points)
    return x, y


def _solve3(matrix: list[list[float]], rhs: list[float]) -> list[float]:
    """Gaussian elimination with partial pivoting on a 3x3 system."""
    aug = [row[:] + [val] for row, val in zip(matrix, rhs)]
    for col in range(3):
        pivot = max(range(col, 3), key=lambda r: abs(aug[r][col]))
        if aug[pivot][col] == 0.0:
            raise ValueError("singular normal equations")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        for row in range(col + 1, 3):
            factor = aug[row][col] / aug[col][col]
            for k in range(col, 4):
                aug[row][k] -= factor * aug[col][k]
    out = [0.0, 0.0, 0.0]
    for row in (2, 1, 0):
        acc = aug[row][3]
        for k in range(row + 1, 3):
            acc -= aug[row][k] * out[k]
        out[row] = acc / aug[row][row]
    return out


def fit_quadratic(points: Sequence[DataPoint]) -> QuadraticModel:
    """Least-squares quadratic through the 3x3 normal equations."""
    if len(points) < 3:
        raise ValueError(f"need at least 3 points, got {len(points)}")
    if len({p.x for p in points}) < 3:
        raise ValueError("rank-deficient input: need 3 distinct x values")
    x, y = _columns(points)
    s1, s2, s3, s4, t0, t1, t2 = kernels.quad_design_sums(x, y)
    n = float(len(points))
    a, b, c = _solve3(
        [[s4, s3, s2], [s3, s2, s1], [s2, s1, n]],
        [t2, t1, t0],
    )
    rmse = math.sqrt(kernels.quad_sse(x, y, a, b, c) / len(points))
    return QuadraticModel(a=a, b=b, c=c, rmse=rmse)


def _rate_grid() -> list[float]:
    lo = math.log10(RATE_MIN)
    hi = math.log10(RATE_MAX)
    step = (hi - lo) / (RATE_GRID_SIZE - 1)
    return [10.0 ** (lo + step * k) for k in range(RATE_GRID_SIZE)]


def fit_saturating_exp(points: Sequence[DataPoint]) -> SaturatingExpModel:
    """Separable least squares for floor + amp*exp(-rate*x).

    Scans the rate over a log-spaced grid, solving the inner linear
    problem in closed form, then narrows the best bracket by golden
    section. Deterministic for identical input.
    """
    if len(points) < 4:
        raise ValueError(f"need at least 4 points, got {len(points)}")
    if len({p.x for p in points}) < 4:
        raise ValueError("rank-deficient input: need 4 distinct x values")
    x, y = _columns(points)
    degenerate = max(y) == min(y)

    def sse_at(rate: float) -> float:
        sse = kernels.exp_solve_at_rate(x, y, rate)[2]
        return sse if math.isfinite(sse) else math.inf

    grid = _rate_grid()
    errors = [sse_at(rate) for rate in grid]
    best = min(range(len(grid)), key=lambda k: errors[k])

    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, len(grid) - 1)]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = sse_at(c), sse_at(d)
    for _ in range(200):
        if hi - lo <= RATE_REFINE_TOL:
            break
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = sse_at(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = sse_at(d)

    rate = 0.5 * (lo + hi)
    amp, floor, sse = kernels.exp_solve_at_rate(x, y, rate)
    rmse = math.sqrt(sse / len(points)) if math.isfinite(sse) else math.inf
    return SaturatingExpModel(amp=amp, rate=rate, floor=floor, rmse=rmse,
                              degenerate=degenerate)


def fit_auto(points: Sequence[DataPoint]) -> Model:
    """Fit both families where possible and keep the lower-rmse one."""
    candidates: list[Model] = []
    for fitter in (fit_quadratic, fit_saturating_exp):
        try:
            candidates.append(fitter(points))
        except ValueError:
            continue
    if not candidates:
        raise ValueError("not enough distinct points for any model family")
    return min(candidates, key=lambda m: m.rmse)


# --- model and points files -------------------------------------------------

FAMILY_QUADRATIC = "quadratic"
FAMILY_EXP = "exp"

POINTS_CSV_HEADER = ("x", "value")


@dataclass(frozen=True)
class StoredModel:
    """A fitted model plus the benchmark reference it scales against."""

    model: Model
    reference_value: float = 1.0
    reference_unit: str = "ratio"


def model_to_text(stored: StoredModel) -> str:
    model = stored.model
    if isinstance(model, QuadraticModel):
        lines = [
            f"family: {FAMILY_QUADRATIC}",
            f"coeff_a: {model.a!r}",
            f"coeff_b: {model.b!r}",
            f"coeff_c: {model.c!r}",
        ]
    else:
        lines = [
            f"family: {FAMILY_EXP}",
            f"amp: {model.amp!r}",
            f"rate: {model.rate!r}",
            f"floor: {model.floor!r}",
        ]
        if model.degenerate:
            lines.append("degenerate: true")
    lines.append(f"rmse: {model.rmse!r}")
    lines.append(f"reference_value: {stored.reference_value!r}")
    lines.append(f"reference_unit: {stored.reference_unit}")
    return "\n".join(lines) + "\n"


def model_from_text(text: str) -> StoredModel:
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if ":" not in line:
            raise DataFormatError(
                f"model line {lineno}: expected 'key: value'")
        key, _, value = line.partition(":")
        fields[key.strip()] = value.strip()

    family = fields.get("family")
    try:
        if family == FAMILY_QUADRATIC:
            model: Model = QuadraticModel(
                a=float(fields["coeff_a"]),
                b=float(fields["coeff_b"]),
                c=float(fields["coeff_c"]),
                rmse=float(fields.get("rmse", "0.0")),
            )
        elif family == FAMILY_EXP:
            model = SaturatingExpModel(
                amp=float(fields["amp"]),
                rate=float(fields["rate"]),
                floor=float(fields["floor"]),
                rmse=float(fields.get("rmse", "0.0")),
                degenerate=fields.get("degenerate", "false") == "true",
            )
        else:
            raise DataFormatError(f"unknown model family: {family!r}")
        return StoredModel(
            model=model,
            reference_value=float(fields.get("reference_value", "1.0")),
            reference_unit=fields.get("reference_unit", "ratio"),
        )
    except KeyError as exc:
        raise DataFormatError(f"model document missing field {exc}") from None
    except ValueError as exc:
        raise DataFormatError(f"malformed model document: {exc}") from None


def save_model(stored: StoredModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(model_to_text(stored))


def load_model(path: str) -> StoredModel:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return model_from_text(fh.read())
    except OSError as exc:
        raise DataFormatError(f"cannot open model file: {exc}") from None


def points_from_csv(path: str) -> list[DataPoint]:
    """Read `x,value` rows; malformed rows are reported with line numbers."""
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise DataFormatError(f"cannot open points file: {exc}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != POINTS_CSV_HEADER:
            raise DataFormatError(
                f"{path}: expected header '{','.join(POINTS_CSV_HEADER)}'")
        points = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                points.append(DataPoint(x=float(row[0]), y=float(row[1])))
            except (ValueError, IndexError):
                raise DataFormatError(
                    f"{path}: malformed row at line {lineno}: "
                    f"{','.join(row)!r}") from None
    if not points:
        raise DataFormatError(f"{path}: no data rows")
    return points


def points_to_csv(points: Iterable[DataPoint], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(POINTS_CSV_HEADER)
        for point in points:
            writer.writerow([repr(point.x), repr(point.y)])
